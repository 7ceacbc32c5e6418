#ifndef INFA_RNG_HPP
#define INFA_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace infa {

// Seeded generator with hand-rolled distributions. std::mt19937_64 output is
// specified by the standard, but std::uniform_*_distribution is not, so the
// helpers below implement the mappings themselves to keep results bit-identical
// across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::size_t index(std::size_t n) {
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<std::size_t>(x % span);
    }

    // Index drawn with probability weights[i] / sum(weights). Weights must be
    // nonnegative with a positive sum.
    std::size_t weighted_index(const std::vector<double>& weights, double total) {
        const double target = uniform() * total;
        double cumulative = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            cumulative += weights[i];
            if (target < cumulative) return i;
        }
        return last_positive;  // float roundoff at the tail
    }

    // Fisher-Yates; identical visitation sequence everywhere.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            const std::size_t j = index(i + 1);
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace infa

#endif
