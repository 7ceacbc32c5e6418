#ifndef INFA_CLI_HPP
#define INFA_CLI_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infa/representation.hpp"

namespace infa {

struct Overrides {
    std::optional<std::size_t> window_length;   // --L
    std::optional<std::size_t> pattern_count;   // --K
    std::optional<std::size_t> offset;          // --delta, absolute at every scale
    std::optional<double> lambda_p;             // --lambda-p
    std::optional<std::size_t> iterations;      // --iters
    std::optional<std::size_t> scale_count;     // --scales
    std::optional<std::size_t> pair_multiplier; // --pair-mult
    bool large_preset = false;                  // --large
};

// Fully resolved run parameters; echoed verbatim into every output artifact.
struct RunConfig {
    std::string train_path, test_path, out_dir;
    std::string mode = "joint"; // joint | foldin

    std::size_t series_length = 0;  // Q
    std::size_t window_length = 0;  // L
    std::size_t pattern_count = 0;  // K
    std::size_t offset = 0;         // delta at the base scale
    double offset_fraction = 0.05;  // per-scale delta unless absolute_offset
    bool absolute_offset = false;
    double lambda_p = 1.0;
    std::size_t iterations = 15;
    std::size_t scale_count = 4;    // Phi
    std::size_t pair_multiplier = 1;
    bool large_preset = false;

    std::uint64_t seed = 0;
    int seed_count = 1;  // --seeds
    int threads = 1;
    bool znormalize = false;      // whole-series z-normalization, default off
    bool scale_features = false;  // --scale: per-column max-abs before the SVM
    int svm_degree = 3;
    double svm_c = 1.0;

    nlohmann::json to_json() const;
    RepresentationOptions representation_options() const;
};

// The analytic hyper-parameter recipe: L = 20% of Q, K = 50% of Q (10% with
// the large preset), delta = 5% of L (20% large), Phi = 4, lambda_p = 1,
// I = 15. Percentages round half-up, then clamp to module minimums. Overrides
// are echoed unchanged; anything violating module preconditions raises
// config_error before any compute.
RunConfig resolve_defaults(std::size_t q, const Overrides& overrides);

struct EvaluateOutcome {
    double error_rate = 0.0;
    std::vector<std::vector<std::size_t>> confusion; // true x predicted, class ids
    nlohmann::json report;
};

// Full pipeline for one seed: load, represent (joint or fold-in), train the
// SVM on the training block, predict the test block. Writes features.csv,
// features.json, models/scale_<s>.json, svm.json, predictions.csv and
// report.json under out_dir. Mass conservation is verified on every run.
// On error, files created by this run are removed.
EvaluateOutcome run_evaluate_once(const RunConfig& cfg);

// Handles --seeds: one subdirectory per seed plus an aggregate report.json
// with mean/min/max error. Returns the top-level report.
nlohmann::json cmd_evaluate(const RunConfig& cfg);

// Remaining subcommand bodies; all artifact formats match the owning modules.
nlohmann::json cmd_synth(std::uint64_t seed, const std::string& out_path);
nlohmann::json cmd_segment(const std::string& data_path, std::size_t window_length,
                           std::size_t offset, bool znormalize, const std::string& out_path);
nlohmann::json cmd_factorize(const std::string& data_path, const Hyperparams& h,
                             bool znormalize, const std::string& out_path);
nlohmann::json cmd_transform_joint(const std::string& data_path, const RunConfig& cfg);
nlohmann::json cmd_transform_foldin(const std::string& data_path,
                                    const std::vector<std::string>& model_paths,
                                    const std::string& out_dir);
nlohmann::json cmd_train_svm(const std::string& features_path, int degree, double c,
                             bool scale_features, const std::string& out_path);

// Sorted-unique remapping of raw label values to contiguous 0-based ids.
std::pair<std::vector<int>, std::vector<double>> remap_labels(const std::vector<double>& raw);

} // namespace infa

#endif
