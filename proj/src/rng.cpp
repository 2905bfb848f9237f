#include "deeptrace/rng.hpp"

namespace deeptrace {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t root, uint64_t tag) {
    uint64_t s = root;
    splitmix64(s);
    s ^= tag;
    return splitmix64(s);
}

uint64_t derive_seed(uint64_t root, uint64_t tag_a, uint64_t tag_b) {
    return derive_seed(derive_seed(root, tag_a), tag_b);
}

static uint64_t fnv1a(std::string_view text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t derive_seed(uint64_t root, std::string_view tag) {
    return derive_seed(root, fnv1a(tag));
}

uint64_t derive_seed(uint64_t root, std::string_view tag, uint64_t index) {
    return derive_seed(derive_seed(root, fnv1a(tag)), index);
}

Rng::Rng(uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t Rng::next() {
    uint64_t result = rotl(state_[1] * 5, 7) * 9;
    uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

uint64_t Rng::bounded(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        uint64_t r = next();
        if (r >= threshold) return r % n;
    }
}

double Rng::real() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

}  // namespace deeptrace
