#include "infa/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "infa/classify.hpp"
#include "infa/dataset.hpp"
#include "infa/errors.hpp"
#include "infa/segmentation.hpp"

namespace fs = std::filesystem;

namespace infa {

namespace {

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_json_file(const nlohmann::json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << doc.dump(1) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

// Tracks files/dirs created by a run so a failing stage can clean up after
// itself; disarmed on success.
class ArtifactTracker {
public:
    void created(const fs::path& p) { paths_.push_back(p); }
    void disarm() { armed_ = false; }
    ~ArtifactTracker() {
        if (!armed_) return;
        std::error_code ec;
        for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove(*it, ec);
    }

private:
    std::vector<fs::path> paths_;
    bool armed_ = true;
};

} // namespace

std::pair<std::vector<int>, std::vector<double>> remap_labels(const std::vector<double>& raw) {
    std::map<double, int> remap;
    for (double v : raw) remap.emplace(v, 0);
    int next = 0;
    for (auto& kv : remap) kv.second = next++;
    std::vector<double> originals(static_cast<std::size_t>(next));
    for (const auto& kv : remap) originals[static_cast<std::size_t>(kv.second)] = kv.first;
    std::vector<int> ids;
    ids.reserve(raw.size());
    for (double v : raw) ids.push_back(remap.at(v));
    return {std::move(ids), std::move(originals)};
}

// out_dir is deliberately not echoed: artifacts must be byte-identical across
// same-seed runs regardless of where they are written.
nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["train"] = train_path;
    j["test"] = test_path;
    j["mode"] = mode;
    j["Q"] = series_length;
    j["L"] = window_length;
    j["K"] = pattern_count;
    j["delta"] = offset;
    j["delta_fraction"] = offset_fraction;
    j["absolute_delta"] = absolute_offset;
    j["lambda_p"] = lambda_p;
    j["iterations"] = iterations;
    j["scales"] = scale_count;
    j["pair_multiplier"] = pair_multiplier;
    j["large"] = large_preset;
    j["seed"] = seed;
    j["seeds"] = seed_count;
    j["threads"] = threads;
    j["znormalize"] = znormalize;
    j["scale_features"] = scale_features;
    j["svm_degree"] = svm_degree;
    j["svm_C"] = svm_c;
    return j;
}

RepresentationOptions RunConfig::representation_options() const {
    RepresentationOptions opt;
    opt.base_window = window_length;
    opt.pattern_count = pattern_count;
    opt.lambda_p = lambda_p;
    opt.iterations = iterations;
    opt.scale_count = scale_count;
    opt.seed = seed;
    opt.offset_fraction = offset_fraction;
    opt.absolute_offset = absolute_offset;
    opt.offset_value = offset;
    opt.pair_multiplier = pair_multiplier;
    opt.threads = threads;
    return opt;
}

RunConfig resolve_defaults(std::size_t q, const Overrides& overrides) {
    if (q < 2) throw config_error("series length Q must be >= 2");
    RunConfig cfg;
    cfg.series_length = q;
    cfg.large_preset = overrides.large_preset;

    cfg.window_length = overrides.window_length
                            ? *overrides.window_length
                            : std::max<std::size_t>(2, round_half_up(0.20 * static_cast<double>(q)));
    const double k_fraction = overrides.large_preset ? 0.10 : 0.50;
    cfg.pattern_count = overrides.pattern_count
                            ? *overrides.pattern_count
                            : std::max<std::size_t>(2, round_half_up(k_fraction *
                                                                     static_cast<double>(q)));
    cfg.offset_fraction = overrides.large_preset ? 0.20 : 0.05;
    if (overrides.offset) {
        cfg.offset = *overrides.offset;
        cfg.absolute_offset = true;
    } else {
        cfg.offset = std::max<std::size_t>(
            1, round_half_up(cfg.offset_fraction * static_cast<double>(cfg.window_length)));
    }
    if (overrides.lambda_p) cfg.lambda_p = *overrides.lambda_p;
    if (overrides.iterations) cfg.iterations = *overrides.iterations;
    if (overrides.scale_count) cfg.scale_count = *overrides.scale_count;
    if (overrides.pair_multiplier) cfg.pair_multiplier = *overrides.pair_multiplier;

    if (cfg.window_length < 2 || cfg.window_length >= q)
        throw config_error("resolved window length L=" + std::to_string(cfg.window_length) +
                           " must satisfy 2 <= L < Q=" + std::to_string(q));
    if (cfg.pattern_count < 2)
        throw config_error("resolved pattern count K must be >= 2");
    if (cfg.offset < 1 || cfg.offset > cfg.window_length)
        throw config_error("resolved offset delta=" + std::to_string(cfg.offset) +
                           " must satisfy 1 <= delta <= L");
    if (cfg.lambda_p < 0.0) throw config_error("lambda_p must be nonnegative");
    if (cfg.iterations < 1) throw config_error("iterations must be >= 1");
    if (cfg.scale_count < 1) throw config_error("scale count must be >= 1");
    if (cfg.pair_multiplier < 1) throw config_error("pair multiplier must be >= 1");
    if (segment_count(q, cfg.window_length, cfg.offset) < 1)
        throw config_error("no segment fits at the base scale");
    return cfg;
}

namespace {

struct LabeledFeatures {
    FeatureMatrix features;           // train rows then test rows
    std::vector<double> row_labels;   // original label values
    std::size_t n_train = 0, n_test = 0;
    std::vector<std::string> warnings;
    std::vector<FactorModel> models;
};

LabeledFeatures build_features(const Dataset& train, const Dataset& test, const RunConfig& cfg) {
    LabeledFeatures out;
    out.n_train = train.n_series;
    out.n_test = test.n_series;

    if (cfg.mode == "joint") {
        // Literal transductive reading: factorize train and test together,
        // labels are only consumed by the classifier on the training block.
        Dataset combined;
        combined.n_series = train.n_series + test.n_series;
        combined.length = train.length;
        combined.name = train.name + "+" + test.name;
        combined.series = train.series;
        combined.series.insert(combined.series.end(), test.series.begin(), test.series.end());
        combined.labels.assign(combined.n_series, 0);
        combined.class_count = 1;
        Representation rep = invariant_representation(combined, cfg.representation_options());
        out.features = std::move(rep.features);
        out.warnings = std::move(rep.warnings);
        out.models = std::move(rep.models);
    } else if (cfg.mode == "foldin") {
        Representation rep = invariant_representation(train, cfg.representation_options());
        FeatureMatrix test_features = transform_foldin(test, rep.models);
        FeatureMatrix& f = out.features;
        f = std::move(rep.features);
        f.values.insert(f.values.end(), test_features.values.begin(), test_features.values.end());
        f.n_rows += test_features.n_rows;
        out.warnings = std::move(rep.warnings);
        out.models = std::move(rep.models);
    } else {
        throw config_error("unknown mode '" + cfg.mode + "' (expected joint or foldin)");
    }

    for (std::size_t i = 0; i < train.n_series; ++i)
        out.row_labels.push_back(train.original_labels[static_cast<std::size_t>(train.labels[i])]);
    for (std::size_t i = 0; i < test.n_series; ++i)
        out.row_labels.push_back(test.original_labels[static_cast<std::size_t>(test.labels[i])]);
    return out;
}

nlohmann::json layout_json(const FeatureMatrix& f) {
    auto arr = nlohmann::json::array();
    for (const ScaleLayout& s : f.scales) {
        nlohmann::json rec;
        rec["scale"] = s.scale;
        rec["window_length"] = s.window_length;
        rec["delta"] = s.offset;
        rec["segments"] = s.segment_count;
        rec["column_begin"] = s.column_begin;
        arr.push_back(std::move(rec));
    }
    return arr;
}

} // namespace

EvaluateOutcome run_evaluate_once(const RunConfig& cfg) {
    ArtifactTracker tracker;
    const auto t_start = std::chrono::steady_clock::now();
    nlohmann::json timings;

    auto t0 = std::chrono::steady_clock::now();
    Dataset train = load_ucr(cfg.train_path);
    Dataset test = load_ucr(cfg.test_path);
    if (train.length != test.length)
        throw data_error("train series length " + std::to_string(train.length) +
                         " differs from test series length " + std::to_string(test.length));
    if (cfg.znormalize) {
        train = znormalize_series(train);
        test = znormalize_series(test);
    }
    timings["load"] = seconds_since(t0);

    fs::create_directories(cfg.out_dir);
    const std::string config_str = cfg.to_json().dump();

    t0 = std::chrono::steady_clock::now();
    LabeledFeatures lf = build_features(train, test, cfg);
    check_mass_conservation(lf.features);  // verified on every run
    timings["representation"] = seconds_since(t0);

    const fs::path out_dir(cfg.out_dir);
    const fs::path features_path = out_dir / "features.csv";
    save_features_csv(lf.features, lf.row_labels, features_path.string(), config_str);
    tracker.created(features_path);

    nlohmann::json sidecar;
    sidecar["config"] = cfg.to_json();
    sidecar["scale_layout"] = layout_json(lf.features);
    sidecar["K"] = lf.features.patterns_per_scale;
    sidecar["n_rows"] = lf.features.n_rows;
    sidecar["n_train"] = lf.n_train;
    sidecar["n_test"] = lf.n_test;
    sidecar["warnings"] = lf.warnings;
    const fs::path sidecar_path = out_dir / "features.json";
    write_json_file(sidecar, sidecar_path.string());
    tracker.created(sidecar_path);

    fs::create_directories(out_dir / "models");
    for (std::size_t idx = 0; idx < lf.models.size(); ++idx) {
        const fs::path model_path =
            out_dir / "models" /
            ("scale_" + std::to_string(lf.features.scales[idx].scale) + ".json");
        save_model(lf.models[idx], model_path.string());
        tracker.created(model_path);
    }

    // Classifier sees training rows only.
    const std::size_t dim = lf.features.n_cols;
    std::vector<double> train_rows(lf.features.values.begin(),
                                   lf.features.values.begin() + lf.n_train * dim);
    std::vector<double> test_rows(lf.features.values.begin() + lf.n_train * dim,
                                  lf.features.values.end());
    std::vector<double> train_raw_labels(lf.row_labels.begin(),
                                         lf.row_labels.begin() + lf.n_train);
    auto [train_ids, originals] = remap_labels(train_raw_labels);
    const int class_count = static_cast<int>(originals.size());

    if (cfg.scale_features) {
        // Per-column max-abs scaling fitted on the training block.
        std::vector<double> scale(dim, 1.0);
        for (std::size_t c = 0; c < dim; ++c) {
            double max_abs = 0.0;
            for (std::size_t i = 0; i < lf.n_train; ++i)
                max_abs = std::max(max_abs, std::fabs(train_rows[i * dim + c]));
            if (max_abs > 0.0) scale[c] = max_abs;
        }
        for (std::size_t i = 0; i < lf.n_train; ++i)
            for (std::size_t c = 0; c < dim; ++c) train_rows[i * dim + c] /= scale[c];
        for (std::size_t i = 0; i < lf.n_test; ++i)
            for (std::size_t c = 0; c < dim; ++c) test_rows[i * dim + c] /= scale[c];
    }

    t0 = std::chrono::steady_clock::now();
    SvmParams params;
    params.degree = cfg.svm_degree;
    params.c = cfg.svm_c;
    SvmModel svm = svm_train(train_rows, lf.n_train, dim, train_ids, class_count, params);
    timings["svm_train"] = seconds_since(t0);

    const fs::path svm_path = out_dir / "svm.json";
    save_svm(svm, svm_path.string(), config_str);
    tracker.created(svm_path);

    t0 = std::chrono::steady_clock::now();
    std::vector<int> predicted = svm_predict(svm, test_rows, lf.n_test, dim);
    timings["predict"] = seconds_since(t0);

    EvaluateOutcome outcome;
    outcome.confusion.assign(static_cast<std::size_t>(class_count),
                             std::vector<std::size_t>(static_cast<std::size_t>(class_count), 0));
    std::size_t wrong = 0;
    std::vector<double> predicted_original(lf.n_test), true_original(lf.n_test);
    for (std::size_t i = 0; i < lf.n_test; ++i) {
        const double true_raw = lf.row_labels[lf.n_train + i];
        const double pred_raw = originals[static_cast<std::size_t>(predicted[i])];
        predicted_original[i] = pred_raw;
        true_original[i] = true_raw;
        if (pred_raw != true_raw) ++wrong;
        // Unseen test labels fall outside the training alphabet; count row -1.
        const auto it = std::find(originals.begin(), originals.end(), true_raw);
        if (it != originals.end())
            ++outcome.confusion[static_cast<std::size_t>(it - originals.begin())]
                               [static_cast<std::size_t>(predicted[i])];
    }
    outcome.error_rate =
        lf.n_test == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(lf.n_test);

    const fs::path pred_path = out_dir / "predictions.csv";
    {
        std::ofstream out(pred_path);
        if (!out) throw data_error("cannot write " + pred_path.string());
        out << "# config: " << config_str << '\n';
        out << "index,true_label,predicted_label\n";
        char buf[40];
        for (std::size_t i = 0; i < lf.n_test; ++i) {
            out << i;
            std::snprintf(buf, sizeof(buf), "%.17g", true_original[i]);
            out << ',' << buf;
            std::snprintf(buf, sizeof(buf), "%.17g", predicted_original[i]);
            out << ',' << buf << '\n';
        }
        if (!out) throw data_error("write failed: " + pred_path.string());
    }
    tracker.created(pred_path);

    timings["total"] = seconds_since(t_start);
    nlohmann::json report;
    report["config"] = cfg.to_json();
    report["seed"] = cfg.seed;
    report["train"] = {{"path", cfg.train_path},
                       {"n", train.n_series},
                       {"Q", train.length},
                       {"classes", train.class_count}};
    report["test"] = {{"path", cfg.test_path},
                      {"n", test.n_series},
                      {"Q", test.length},
                      {"classes", test.class_count}};
    report["error_rate"] = outcome.error_rate;
    report["confusion"] = outcome.confusion;
    report["class_labels"] = originals;
    report["scale_layout"] = layout_json(lf.features);
    report["warnings"] = lf.warnings;
    report["mass_conservation_checked"] = true;
    report["timings_seconds"] = timings;
    const fs::path report_path = out_dir / "report.json";
    write_json_file(report, report_path.string());
    tracker.created(report_path);

    outcome.report = std::move(report);
    tracker.disarm();
    return outcome;
}

nlohmann::json cmd_evaluate(const RunConfig& cfg) {
    if (cfg.seed_count <= 1) {
        return run_evaluate_once(cfg).report;
    }
    std::vector<double> errors;
    auto runs = nlohmann::json::array();
    for (int s = 0; s < cfg.seed_count; ++s) {
        RunConfig per_seed = cfg;
        per_seed.seed = cfg.seed + static_cast<std::uint64_t>(s);
        per_seed.seed_count = 1;
        per_seed.out_dir =
            (fs::path(cfg.out_dir) / ("seed_" + std::to_string(per_seed.seed))).string();
        EvaluateOutcome outcome = run_evaluate_once(per_seed);
        errors.push_back(outcome.error_rate);
        runs.push_back(std::move(outcome.report));
    }
    nlohmann::json report;
    report["config"] = cfg.to_json();
    report["error_rates"] = errors;
    report["mean_error"] =
        std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    report["min_error"] = *std::min_element(errors.begin(), errors.end());
    report["max_error"] = *std::max_element(errors.begin(), errors.end());
    report["runs"] = std::move(runs);
    fs::create_directories(cfg.out_dir);
    write_json_file(report, (fs::path(cfg.out_dir) / "report.json").string());
    return report;
}

nlohmann::json cmd_synth(std::uint64_t seed, const std::string& out_path) {
    Dataset d = make_synthetic_figure1(seed);
    save_ucr(d, out_path);
    nlohmann::json j;
    j["path"] = out_path;
    j["n"] = d.n_series;
    j["Q"] = d.length;
    j["classes"] = d.class_count;
    j["seed"] = seed;
    return j;
}

nlohmann::json cmd_segment(const std::string& data_path, std::size_t window_length,
                           std::size_t offset, bool znormalize, const std::string& out_path) {
    Dataset d = load_ucr(data_path);
    if (znormalize) d = znormalize_series(d);
    SegmentTensor s = segment_series(d, window_length, offset);
    nlohmann::json doc;
    doc["source"] = data_path;
    doc["L"] = s.window_length;
    doc["delta"] = s.offset;
    doc["M"] = s.segments_per_series;
    doc["N"] = s.n_series;
    auto values = nlohmann::json::array();
    for (std::size_t i = 0; i < s.n_series; ++i) {
        auto per_series = nlohmann::json::array();
        for (std::size_t j = 0; j < s.segments_per_series; ++j) {
            const double* seg = s.segment(i, j);
            per_series.push_back(std::vector<double>(seg, seg + s.window_length));
        }
        values.push_back(std::move(per_series));
    }
    doc["segments"] = std::move(values);
    write_json_file(doc, out_path);
    nlohmann::json j;
    j["path"] = out_path;
    j["N"] = s.n_series;
    j["M"] = s.segments_per_series;
    j["L"] = s.window_length;
    return j;
}

nlohmann::json cmd_factorize(const std::string& data_path, const Hyperparams& h,
                             bool znormalize, const std::string& out_path) {
    Dataset d = load_ucr(data_path);
    if (znormalize) d = znormalize_series(d);
    SegmentTensor s = segment_series(d, h.window_length, h.offset);
    FactorModel m = fit(s, h);
    save_model(m, out_path);
    nlohmann::json j;
    j["path"] = out_path;
    j["objective"] = m.objective_trace.empty() ? 0.0 : m.objective_trace.back();
    j["objective_trace"] = m.objective_trace;
    return j;
}

nlohmann::json cmd_transform_joint(const std::string& data_path, const RunConfig& cfg) {
    Dataset d = load_ucr(data_path);
    if (cfg.znormalize) d = znormalize_series(d);
    Representation rep = invariant_representation(d, cfg.representation_options());
    check_mass_conservation(rep.features);

    fs::create_directories(cfg.out_dir);
    fs::create_directories(fs::path(cfg.out_dir) / "models");
    const std::string config_str = cfg.to_json().dump();
    std::vector<double> raw_labels;
    for (std::size_t i = 0; i < d.n_series; ++i)
        raw_labels.push_back(d.original_labels[static_cast<std::size_t>(d.labels[i])]);
    save_features_csv(rep.features, raw_labels,
                      (fs::path(cfg.out_dir) / "features.csv").string(), config_str);
    for (std::size_t idx = 0; idx < rep.models.size(); ++idx)
        save_model(rep.models[idx],
                   (fs::path(cfg.out_dir) / "models" /
                    ("scale_" + std::to_string(rep.features.scales[idx].scale) + ".json"))
                       .string());
    nlohmann::json sidecar;
    sidecar["config"] = cfg.to_json();
    sidecar["scale_layout"] = layout_json(rep.features);
    sidecar["K"] = rep.features.patterns_per_scale;
    sidecar["n_rows"] = rep.features.n_rows;
    sidecar["warnings"] = rep.warnings;
    write_json_file(sidecar, (fs::path(cfg.out_dir) / "features.json").string());
    return sidecar;
}

nlohmann::json cmd_transform_foldin(const std::string& data_path,
                                    const std::vector<std::string>& model_paths,
                                    const std::string& out_dir) {
    Dataset d = load_ucr(data_path);
    std::vector<FactorModel> models;
    for (const std::string& p : model_paths) models.push_back(load_model(p));
    FeatureMatrix f = transform_foldin(d, models);
    check_mass_conservation(f);

    fs::create_directories(out_dir);
    std::vector<double> raw_labels;
    for (std::size_t i = 0; i < d.n_series; ++i)
        raw_labels.push_back(d.original_labels[static_cast<std::size_t>(d.labels[i])]);
    save_features_csv(f, raw_labels, (fs::path(out_dir) / "features.csv").string());
    nlohmann::json sidecar;
    sidecar["scale_layout"] = layout_json(f);
    sidecar["K"] = f.patterns_per_scale;
    sidecar["n_rows"] = f.n_rows;
    sidecar["models"] = model_paths;
    write_json_file(sidecar, (fs::path(out_dir) / "features.json").string());
    return sidecar;
}

nlohmann::json cmd_train_svm(const std::string& features_path, int degree, double c,
                             bool scale_features, const std::string& out_path) {
    LoadedFeatures lf = load_features_csv(features_path);
    auto [ids, originals] = remap_labels(lf.labels);
    std::vector<double> rows = lf.values;
    if (scale_features) {
        for (std::size_t col = 0; col < lf.n_cols; ++col) {
            double max_abs = 0.0;
            for (std::size_t i = 0; i < lf.n_rows; ++i)
                max_abs = std::max(max_abs, std::fabs(rows[i * lf.n_cols + col]));
            if (max_abs > 0.0)
                for (std::size_t i = 0; i < lf.n_rows; ++i) rows[i * lf.n_cols + col] /= max_abs;
        }
    }
    SvmParams params;
    params.degree = degree;
    params.c = c;
    SvmModel m = svm_train(rows, lf.n_rows, lf.n_cols, ids, static_cast<int>(originals.size()),
                           params);
    save_svm(m, out_path);
    nlohmann::json j;
    j["path"] = out_path;
    j["classes"] = originals.size();
    j["pairs"] = m.pairs.size();
    std::size_t sv = 0;
    for (const auto& p : m.pairs) sv += p.support_indices.size();
    j["support_vectors"] = sv;
    return j;
}

} // namespace infa
