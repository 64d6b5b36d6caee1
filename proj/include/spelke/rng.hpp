#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace spelke {

// splitmix64 (Steele, Lea, Vigna). Used both as a mixer for deriving
// independent sub-streams and as the engine behind Rng. All randomness in
// the project flows through this file so results are reproducible
// bit-for-bit regardless of platform or worker count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives a stream seed from a base seed plus context words
// (e.g. poke index, rollout index). Order of words is significant.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> words) {
    std::uint64_t s = base;
    std::uint64_t h = splitmix64(s);
    for (std::uint64_t w : words) {
        s = h ^ (w + 0x9E3779B97F4A7C15ull);
        h = splitmix64(s);
    }
    return h;
}

class Rng {
 public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform double in [0, 1), 53 bits of entropy.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Multiply-shift; deterministic, bias is
    // below 2^-64 per draw and irrelevant here.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

 private:
    std::uint64_t state_;
};

}  // namespace spelke
