#ifndef INFA_FACTORIZATION_HPP
#define INFA_FACTORIZATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "infa/rng.hpp"
#include "infa/segmentation.hpp"

namespace infa {

struct Hyperparams {
    std::size_t pattern_count = 2;   // K
    std::size_t window_length = 2;   // L
    std::size_t offset = 1;          // delta
    double lambda_p = 1.0;
    std::size_t iterations = 15;     // I
    std::uint64_t seed = 0;
    std::size_t pair_multiplier = 1; // pairs drawn per segment = K * pair_multiplier
};

// Learned decomposition: K patterns of length L, one simplex-constrained
// membership row per segment, and the incrementally maintained residual
// tensor xi = S - D*P.
struct FactorModel {
    Hyperparams hyper;
    std::size_t n_series = 0;
    std::size_t segments_per_series = 0;
    std::vector<double> patterns;        // K x L
    std::vector<double> memberships;     // N x M x K
    std::vector<double> residuals;       // N x M x L
    std::vector<double> objective_trace; // after init + after each iteration (not serialized)

    double pattern(std::size_t k, std::size_t l) const {
        return patterns[k * hyper.window_length + l];
    }
    double membership(std::size_t i, std::size_t j, std::size_t k) const {
        return memberships[(i * segments_per_series + j) * hyper.pattern_count + k];
    }
    std::size_t total_segments() const { return n_series * segments_per_series; }
};

// Objective value from first principles (S, D and P only; never reads xi):
// sum of squared reconstruction errors plus lambda_p * ||P||^2.
double objective(const SegmentTensor& s, const FactorModel& m);

// k-means++-style seeding: first pattern uniform over segments, the rest drawn
// with weight = squared Euclidean distance to the nearest chosen pattern.
// Memberships start one-hot on the closest pattern; residuals set from the
// definition. Throws config_error when K > N*M or fewer than K distinct
// segments exist.
FactorModel initialize(const SegmentTensor& s, std::size_t pattern_count, Rng& rng);
FactorModel initialize(const SegmentTensor& s, std::size_t pattern_count, std::uint64_t seed);

// Coordinate-descent closed form for one pattern point:
//   P*_{k,l} = sum_{i,j} (xi + D*P_{k,l}) * D / (lambda_p + sum D^2),
// followed by the incremental residual refresh. Skipped when lambda_p = 0 and
// no segment uses pattern k. Never increases the objective.
void update_pattern_point(FactorModel& m, std::size_t k, std::size_t l);

// SMO-style pairwise membership update for segment (i,j) and patterns k != w:
// the closed-form optimum is cropped to [0, pair_sum] and both memberships are
// committed with their sum conserved, keeping the simplex constraint exact.
// Returns false (state untouched) when ||P_w - P_k||^2 < 1e-12.
bool update_membership_pair(FactorModel& m, std::size_t i, std::size_t j,
                            std::size_t k, std::size_t w);

// Full stochastic coordinate descent: initialize, then per iteration visit all
// segments in seeded random order drawing K*pair_multiplier valid pairs each,
// then all pattern points in seeded random order. A single generator is
// threaded through init, segment visitation, pair draws and pattern
// visitation, in that order, so runs are bit-reproducible.
FactorModel fit(const SegmentTensor& s, const Hyperparams& h);

// Recomputes xi from the definition, returns the max absolute drift of the
// incrementally maintained values.
double rebuild_residuals(const SegmentTensor& s, FactorModel& m);

// JSON persistence: {K, L, delta, lambda_p, iterations, seed, patterns,
// memberships}. Numbers round-trip exactly. Residuals are not stored; rebuild
// against the segment tensor if needed.
void save_model(const FactorModel& m, const std::string& path);
FactorModel load_model(const std::string& path);

} // namespace infa

#endif
