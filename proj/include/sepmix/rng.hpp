#pragma once

#include <cstdint>

namespace sepmix {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream tags keep the different uses of one seed apart.
enum class Stream : std::uint64_t {
    EnvSite = 1,
    ClockCount = 2,
    ClockTime = 3,
    ClockMark = 4,
    Replica = 5,
    Sampler = 6,
    Instance = 7,
};

constexpr std::uint64_t hash_key(std::uint64_t seed, Stream s, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ (0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(s)));
    h = mix64(h ^ a);
    h = mix64(h ^ (b * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (c * 0xa0761d6478bd642fULL));
    return h;
}

// 53-bit uniform in (0,1)
constexpr double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double hash_uniform(std::uint64_t seed, Stream s, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    return to_unit_open(hash_key(seed, s, a, b, c));
}

// Sequential generator for samplers; satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return to_unit_open((*this)()); }

private:
    std::uint64_t state_;
};

}  // namespace sepmix
