#ifndef PATHOED_RNG_HPP
#define PATHOED_RNG_HPP

#include <cstdint>
#include <random>

namespace pathoed {

struct RngSeed {
    std::uint64_t value = 0;
};

namespace detail {

// Fixed-increment splitmix64 step; used only to derive stream keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Deterministically derive an independent seed; used to give each optimizer
// iteration / baseline batch its own stream family.
inline RngSeed derive_seed(RngSeed seed, std::uint64_t salt) {
    return RngSeed{detail::splitmix64(seed.value ^ detail::splitmix64(salt))};
}

// Uniform stream for one sample ordinal. Streams with the same (seed, stream)
// reproduce bit-for-bit: mt19937_64 is fully specified by the standard and the
// [0,1) conversion below avoids implementation-defined distributions.
class RandomStream {
public:
    RandomStream(RngSeed seed, std::uint64_t stream)
        : engine_(detail::splitmix64(seed.value ^ detail::splitmix64(stream))) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace pathoed

#endif
