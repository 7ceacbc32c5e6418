#ifndef INFA_REPRESENTATION_HPP
#define INFA_REPRESENTATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "infa/dataset.hpp"
#include "infa/factorization.hpp"

namespace infa {

struct ScaleLayout {
    std::size_t scale = 1;          // s, 1-based multiplier
    std::size_t window_length = 0;  // L' = base_L * s
    std::size_t offset = 0;         // delta used at this scale
    std::size_t segment_count = 0;  // M_s
    std::size_t column_begin = 0;   // first of K consecutive columns
};

// Bag-of-patterns features: column block s holds, per series, the summed
// membership degrees of its segments to each of the K patterns of scale s.
struct FeatureMatrix {
    std::vector<double> values;       // n_rows x n_cols
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::size_t patterns_per_scale = 0;
    std::vector<ScaleLayout> scales;

    double at(std::size_t i, std::size_t c) const { return values[i * n_cols + c]; }
    const double* row(std::size_t i) const { return values.data() + i * n_cols; }
};

struct RepresentationOptions {
    std::size_t base_window = 0;     // L
    std::size_t pattern_count = 2;   // K, shared across scales
    double lambda_p = 1.0;
    std::size_t iterations = 15;     // I
    std::size_t scale_count = 4;     // Phi
    std::uint64_t seed = 0;
    double offset_fraction = 0.05;   // delta_s = max(1, round_half_up(frac * L'))
    bool absolute_offset = false;    // use offset_value at every scale instead
    std::size_t offset_value = 0;
    std::size_t pair_multiplier = 1;
    int threads = 1;                 // scales fit in parallel; results identical
};

struct Representation {
    FeatureMatrix features;
    std::vector<FactorModel> models;       // one per retained scale
    std::vector<std::string> warnings;     // skipped scales
};

// Fits one factorization per retained scale (seed + s each) and assembles the
// feature matrix. Scales whose window no longer fits the series are skipped
// with a recorded warning; throws config_error if none remain.
Representation invariant_representation(const Dataset& d, const RepresentationOptions& opt);

// Inductive transform: patterns held fixed, memberships of the new series
// solved by the pairwise updates alone (model's iteration count). Each series
// is folded in with a fresh generator seeded from its scale model, so features
// do not depend on batch composition. All-zero segments keep their one-hot
// initialization. Throws data_error when the series length is incompatible.
FeatureMatrix transform_foldin(const Dataset& d_new, const std::vector<FactorModel>& models);

// Per-scale feature row sums must equal M_s; throws compute_error otherwise.
void check_mass_conservation(const FeatureMatrix& f, double tolerance = 1e-9);

// CSV persistence: optional "# config: ..." comment, then
// label,s1_p1,...,s1_pK,s2_p1,... with %.17g values.
void save_features_csv(const FeatureMatrix& f, const std::vector<double>& row_labels,
                       const std::string& path, const std::string& config_comment = "");

struct LoadedFeatures {
    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> labels;            // raw label column
    std::vector<std::string> column_names;
};

LoadedFeatures load_features_csv(const std::string& path);

} // namespace infa

#endif
