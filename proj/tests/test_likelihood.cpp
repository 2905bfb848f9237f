#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "deeptrace/errors.hpp"
#include "deeptrace/likelihood.hpp"
#include "helpers.hpp"

using namespace deeptrace;
using namespace deeptrace::testing;

namespace {

Subgraph whole(Graph g) { return Subgraph::whole(share(std::move(g))); }

// Fig-5-shaped fixture: infected star v3=2 center over {0,1,3,4}, plus
// uninfected contacts giving observed degrees (2,3,4,3,4).
Subgraph fig5_infected_star() {
    std::vector<Edge> edges{{2, 0}, {2, 1}, {2, 3}, {2, 4},          // infected star
                            {0, 5},                                   // v1's contact
                            {1, 6},  {1, 7},                          // v2's contacts
                            {3, 8},  {3, 9},                          // v4's contacts
                            {4, 10}, {4, 11}, {4, 12}};               // v5's contacts
    return Subgraph(share(Graph::from_edges(13, edges)), {0, 1, 2, 3, 4});
}

}  // namespace

TEST_CASE("permutation probability on the 3-path") {
    Subgraph path = whole(path_graph(3));
    LikelihoodConfig cfg;  // exact-boundary, tracing-network

    Permutation bac{{1, 0, 2}};
    CHECK(log_permutation_probability(bac, path, cfg) == doctest::Approx(std::log(0.5)));

    LikelihoodConfig constant2 = cfg;
    constant2.universe = DegreeUniverse::kConstantDegree;
    constant2.constant_degree = 2;
    CHECK(log_permutation_probability(bac, path, constant2) == doctest::Approx(std::log(0.25)));

    // Length-1 permutation: empty product.
    CHECK(log_permutation_probability(Permutation{{0}}, path, cfg) == 0.0);

    // Non-permitted: 2 is not adjacent to 0.
    CHECK(log_permutation_probability(Permutation{{0, 2, 1}}, path, cfg) == kNegInf);
    // Duplicate entry.
    CHECK(log_permutation_probability(Permutation{{0, 1, 1}}, path, cfg) == kNegInf);
}

TEST_CASE("literal and boundary modes coincide on trees") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        Graph tree = random_tree(3 + uint32_t(rng.bounded(7)), rng);
        Subgraph support = whole(std::move(tree));
        LikelihoodConfig boundary;
        LikelihoodConfig literal;
        literal.mode = ProbabilityMode::kLiteralEq3;
        auto degrees = resolve_degrees(support, boundary, {});
        for (NodeId v : support.nodes()) {
            for (const auto& order : enumerate_permitted(support, v, 1 << 20)) {
                double a = log_permutation_probability(order, support, degrees,
                                                       ProbabilityMode::kExactBoundary);
                double b = log_permutation_probability(order, support, degrees,
                                                       ProbabilityMode::kLiteralEq3);
                CHECK(std::abs(a - b) < 1e-12);
            }
        }
    }
}

TEST_CASE("frontier process normalizes over the support universe") {
    Rng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        Graph g = random_connected_graph(3 + uint32_t(rng.bounded(6)), 0.25, rng);
        Subgraph support = whole(std::move(g));
        LikelihoodConfig cfg;  // tracing-network universe
        for (NodeId v : support.nodes()) {
            CHECK(std::abs(exact_log_likelihood(support, v, cfg)) < 1e-9);
        }
    }
}

TEST_CASE("enumerate_permitted on fixtures") {
    Subgraph path = whole(path_graph(3));
    auto from_center = enumerate_permitted(path, 1, 100);
    REQUIRE(from_center.size() == 2);
    CHECK(from_center[0] == std::vector<NodeId>{1, 0, 2});
    CHECK(from_center[1] == std::vector<NodeId>{1, 2, 0});

    Subgraph star = whole(star_graph(3));
    CHECK(enumerate_permitted(star, 1, 100).size() == 2);   // from a leaf
    CHECK(enumerate_permitted(star, 0, 100).size() == 6);   // from the center

    CHECK_THROWS_AS(enumerate_permitted(star, 0, 3), DataError);

    // Lexicographic ordering over all outputs.
    auto all = enumerate_permitted(whole(star_graph(4)), 0, 1000);
    CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("fig-5 permutation counts") {
    Subgraph support = fig5_infected_star();
    CHECK(enumerate_permitted(support, 2, 1000).size() == 24);
    for (NodeId leaf : {0u, 1u, 3u, 4u}) {
        CHECK(enumerate_permitted(support, leaf, 1000).size() == 6);
    }
}

TEST_CASE("exact likelihood on the 3-path with a constant-degree universe") {
    Subgraph path = whole(path_graph(3));
    LikelihoodConfig cfg;
    cfg.universe = DegreeUniverse::kConstantDegree;
    cfg.constant_degree = 2;

    CHECK(exact_log_likelihood(path, 1, cfg) == doctest::Approx(std::log(0.5)));
    CHECK(exact_log_likelihood(path, 0, cfg) == doctest::Approx(std::log(0.25)));
    CHECK(exact_log_likelihood(path, 2, cfg) == doctest::Approx(std::log(0.25)));

    SourceScores scores = exact_mle(path, cfg);
    CHECK(scores.argmax == std::vector<NodeId>{1});  // the centroid

    Subgraph single = whole(Graph::from_edges(1, std::vector<Edge>{}));
    LikelihoodConfig any;
    any.universe = DegreeUniverse::kConstantDegree;
    any.constant_degree = 1;
    CHECK(exact_log_likelihood(single, 0, any) == 0.0);
}

TEST_CASE("tree permutation counting") {
    Subgraph path = whole(path_graph(3));
    CHECK(count_permutations_tree(path, 1).exact == 2);
    CHECK(count_permutations_tree(path, 0).exact == 1);

    Subgraph star = whole(star_graph(3));
    CHECK(count_permutations_tree(star, 0).exact == 6);

    Subgraph cycle = whole(Graph::from_edges(std::vector<Edge>{{0, 1}, {1, 2}, {2, 0}}));
    CHECK_THROWS_AS(count_permutations_tree(cycle, 0), DataError);

    Rng rng(43);
    for (int trial = 0; trial < 60; ++trial) {
        Graph tree = random_tree(2 + uint32_t(rng.bounded(8)), rng);
        Subgraph support = whole(std::move(tree));
        for (NodeId v : support.nodes()) {
            TreeCount count = count_permutations_tree(support, v);
            auto enumerated = enumerate_permitted(support, v, 1 << 20);
            CHECK(count.exact == mpz_class(static_cast<unsigned long>(enumerated.size())));
            CHECK(count.log_value ==
                  doctest::Approx(std::log(double(enumerated.size()))).epsilon(1e-10));
        }
    }
}

TEST_CASE("rerooted count table matches per-root counts") {
    Rng rng(44);
    for (int trial = 0; trial < 30; ++trial) {
        Graph tree = random_tree(2 + uint32_t(rng.bounded(30)), rng);
        Subgraph support = whole(std::move(tree));
        auto table = log_count_permutations_all(support);
        for (NodeId v : support.nodes()) {
            CHECK(table[support.index_of(v)] ==
                  doctest::Approx(count_permutations_tree(support, v).log_value).epsilon(1e-9));
        }
    }
}

TEST_CASE("sample_permutation") {
    Subgraph path = whole(path_graph(4));
    Rng rng(45);
    CHECK(sample_permutation(path, 0, rng) == std::vector<NodeId>{0, 1, 2, 3});

    // Star center: all 6 orders of K_{1,3} near-equal frequency under the
    // edge-uniform rule.
    Subgraph star = whole(star_graph(3));
    std::map<std::vector<NodeId>, int> freq;
    const int kTrials = 10000;
    Rng star_rng(99);
    for (int t = 0; t < kTrials; ++t) freq[sample_permutation(star, 0, star_rng)]++;
    REQUIRE(freq.size() == 6);
    double expected = kTrials / 6.0;
    double sigma = std::sqrt(kTrials * (1.0 / 6.0) * (5.0 / 6.0));
    for (const auto& [order, count] : freq) {
        CHECK(std::abs(count - expected) <= 3.0 * sigma);
    }

    // Sampled orders are always permitted.
    Rng graph_rng(46);
    LikelihoodConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = random_connected_graph(4 + uint32_t(graph_rng.bounded(12)), 0.15, graph_rng);
        Subgraph support = whole(std::move(g));
        auto degrees = resolve_degrees(support, cfg, {});
        NodeId v = support.nodes()[graph_rng.bounded(support.size())];
        auto order = sample_permutation(support, v, graph_rng);
        CHECK(log_permutation_probability(order, support, degrees, cfg.mode) > kNegInf);
    }

    // Seeded repeatability.
    Rng a(7), b(7);
    CHECK(sample_permutation(star, 0, a) == sample_permutation(star, 0, b));
}

TEST_CASE("rsavr collapses to the exact average under enumeration") {
    Rng rng(47);
    Graph tree = random_tree(7, rng);
    Subgraph support = whole(std::move(tree));
    LikelihoodConfig cfg;
    cfg.universe = DegreeUniverse::kConstantDegree;
    cfg.constant_degree = 8;
    for (NodeId v : support.nodes()) {
        Rng sampler(900 + v);
        double collapsed =
            approx_rsavr_log(support, v, 1u << 20, cfg, {}, sampler, nullptr, true);
        CHECK(collapsed == doctest::Approx(exact_log_likelihood(support, v, cfg)).epsilon(1e-10));
    }
}

TEST_CASE("single-permutation supports make every estimator exact") {
    Subgraph path = whole(path_graph(5));
    LikelihoodConfig cfg;
    cfg.universe = DegreeUniverse::kConstantDegree;
    cfg.constant_degree = 4;
    double exact = exact_log_likelihood(path, 0, cfg);
    for (uint32_t k : {1u, 3u, 17u}) {
        Rng rng(500 + k);
        CHECK(approx_rsavr_log(path, 0, k, cfg, {}, rng) == doctest::Approx(exact));
    }
    Rng rng(501);
    CHECK(approx_bfsran_log(path, 0, cfg, {}, rng) == doctest::Approx(exact));
    for (ExtremeMode mode : {ExtremeMode::kDegMax, ExtremeMode::kDegMin, ExtremeMode::kDegRan}) {
        Rng r(502);
        CHECK(approx_extreme_log(path, 0, cfg, {}, mode, r, 5) == doctest::Approx(exact));
    }
}

TEST_CASE("bfsran on the star center is exact under the support universe") {
    Subgraph star = whole(star_graph(3));
    LikelihoodConfig cfg;  // exact-boundary, tracing-network
    Rng rng(48);
    // Every permutation has probability 1/6 and |Omega| = 6.
    CHECK(approx_bfsran_log(star, 0, cfg, {}, rng) == doctest::Approx(0.0));

    Rng a(9), b(9);
    Subgraph bigger = whole(random_tree(12, a));
    Rng s1(10), s2(10);
    LikelihoodConfig c2;
    c2.universe = DegreeUniverse::kConstantDegree;
    c2.constant_degree = 12;
    CHECK(approx_bfsran_log(bigger, 0, c2, {}, s1) ==
          approx_bfsran_log(bigger, 0, c2, {}, s2));
}

TEST_CASE("extremes sandwich the sampled average pointwise") {
    Rng rng(49);
    for (int trial = 0; trial < 15; ++trial) {
        Graph g = random_connected_graph(4 + uint32_t(rng.bounded(5)), 0.2, rng);
        Subgraph support = whole(std::move(g));
        LikelihoodConfig cfg;
        cfg.universe = DegreeUniverse::kConstantDegree;
        cfg.constant_degree = 16;
        for (NodeId v : support.nodes()) {
            Rng r1(trial * 100 + v), r2(trial * 100 + v), r3(trial * 100 + v);
            double lo = approx_extreme_log(support, v, cfg, {}, ExtremeMode::kDegMin, r1, 50);
            double hi = approx_extreme_log(support, v, cfg, {}, ExtremeMode::kDegMax, r2, 50);
            double avg = approx_rsavr_log(support, v, 50, cfg, {}, r3);
            CHECK(lo <= avg + 1e-9);
            CHECK(avg <= hi + 1e-9);
        }
    }
}

TEST_CASE("rsavr error spread shrinks with the sample count") {
    Rng rng(50);
    Graph tree = random_tree(9, rng);
    Subgraph support = whole(std::move(tree));
    LikelihoodConfig cfg;
    cfg.universe = DegreeUniverse::kConstantDegree;
    cfg.constant_degree = 10;
    NodeId v = 0;
    double exact_avg = exact_average_log(support, v, cfg);
    double log_count = count_permutations_tree(support, v).log_value;

    auto quartile_spread = [&](uint32_t k) {
        std::vector<double> errors;
        for (int rep = 0; rep < 41; ++rep) {
            Rng sampler(derive_seed(1234, k, uint64_t(rep)));
            double est = approx_rsavr_log(support, v, k, cfg, {}, sampler);
            errors.push_back(std::abs((est - log_count) - exact_avg));
        }
        std::sort(errors.begin(), errors.end());
        return errors[30] - errors[10];  // interquartile spread over 41 reps
    };
    double s1 = quartile_spread(1);
    double s10 = quartile_spread(10);
    double s100 = quartile_spread(100);
    CHECK(s10 <= s1);
    CHECK(s100 <= s10);

    Rng sampler(3);
    double collapsed = approx_rsavr_log(support, v, 1u << 20, cfg, {}, sampler, nullptr, true);
    CHECK(std::abs(collapsed - (exact_avg + log_count)) < 1e-9);
}

TEST_CASE("regular-tree MLE under constant degrees lands on the centroid") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        GeneratorSpec spec;
        spec.family = GraphFamily::kRandomRegularTree;
        spec.size = 10;
        spec.regular_degree = 3;
        spec.seed = seed;
        Generated gen = generate(spec);
        Subgraph support = Subgraph::whole(gen.graph);
        LikelihoodConfig cfg;
        cfg.universe = DegreeUniverse::kConstantDegree;
        cfg.constant_degree = 3;
        SourceScores scores = exact_mle(support, cfg);
        std::vector<NodeId> centers = centroid(*gen.graph);
        for (NodeId v : scores.argmax) {
            CHECK(std::find(centers.begin(), centers.end(), v) != centers.end());
        }
    }
}

TEST_CASE("degree universe validation") {
    Subgraph star = whole(star_graph(5));
    LikelihoodConfig cfg;
    cfg.universe = DegreeUniverse::kConstantDegree;
    cfg.constant_degree = 2;  // below the center's degree 5
    CHECK_THROWS_AS(resolve_degrees(star, cfg, {}), DataError);

    LikelihoodConfig epi;
    epi.universe = DegreeUniverse::kEpidemicNetwork;
    CHECK_THROWS_AS(resolve_degrees(star, epi, {}), DataError);
}

TEST_CASE("approx_scores assembles deterministic score tables") {
    Rng rng(51);
    Graph tree = random_tree(8, rng);
    Subgraph support = whole(std::move(tree));
    LikelihoodConfig cfg;
    cfg.universe = DegreeUniverse::kConstantDegree;
    cfg.constant_degree = 8;
    SourceScores a = approx_scores(support, "rsavr", 20, cfg, {}, 404);
    SourceScores b = approx_scores(support, "rsavr", 20, cfg, {}, 404);
    CHECK(a.log_scores == b.log_scores);
    CHECK(a.estimator == "rsavr");
    CHECK(!a.argmax.empty());
    CHECK_THROWS_AS(approx_scores(support, "nope", 1, cfg, {}, 1), DataError);
}
