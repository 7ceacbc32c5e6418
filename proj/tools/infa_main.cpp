#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "infa/cli.hpp"
#include "infa/errors.hpp"

namespace {

// Exit codes: 0 success, 2 config/usage error, 3 data error, 4 compute error.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitCompute = 4;

std::uint64_t default_seed() {
    // --seed flag wins; INFA_SEED is the fallback; 0 otherwise.
    if (const char* env = std::getenv("INFA_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return static_cast<std::uint64_t>(v);
    }
    return 0;
}

struct CommonFlags {
    std::optional<std::size_t> window_length, pattern_count, offset, iterations, scale_count,
        pair_multiplier;
    std::optional<double> lambda_p;
    bool large = false;
    std::uint64_t seed = default_seed();
    int threads = 1;
    bool znormalize = false;
};

void add_hyper_flags(CLI::App* app, CommonFlags& flags) {
    app->add_option("--L", flags.window_length, "Base window length (default 20% of Q)");
    app->add_option("--K", flags.pattern_count, "Latent pattern count (default 50% of Q)");
    app->add_option("--delta", flags.offset,
                    "Absolute window offset at every scale (default 5% of each window)");
    app->add_option("--lambda-p", flags.lambda_p, "Pattern regularization weight (default 1)");
    app->add_option("--iters", flags.iterations, "Coordinate-descent iterations (default 15)");
    app->add_option("--scales", flags.scale_count, "Number of window scales (default 4)");
    app->add_option("--pair-mult", flags.pair_multiplier,
                    "Membership pair draws per segment = K * this (default 1)");
    app->add_flag("--large", flags.large, "Large-dataset preset: K=10% of Q, delta=20% of L");
    app->add_option("--seed", flags.seed, "Random seed (fallback: INFA_SEED, then 0)");
    app->add_option("--threads", flags.threads, "Scale-level parallelism (default 1)")
        ->check(CLI::Range(1, 1 << 16));
    app->add_flag("--znorm", flags.znormalize, "Whole-series z-normalization before segmenting");
}

infa::Overrides to_overrides(const CommonFlags& flags) {
    infa::Overrides ov;
    ov.window_length = flags.window_length;
    ov.pattern_count = flags.pattern_count;
    ov.offset = flags.offset;
    ov.lambda_p = flags.lambda_p;
    ov.iterations = flags.iterations;
    ov.scale_count = flags.scale_count;
    ov.pair_multiplier = flags.pair_multiplier;
    ov.large_preset = flags.large;
    return ov;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shift- and scale-invariant latent pattern factorization for time series"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string train_path, test_path, data_path, out_path, features_path;
    std::string mode = "joint";
    std::vector<std::string> model_paths;
    int seed_count = 1;
    int svm_degree = 3;
    double svm_c = 1.0;
    bool scale_features = false;

    CLI::App* synth = app.add_subcommand("synth", "Write the synthetic four-series dataset");
    synth->add_option("--out", out_path, "Output dataset file")->required();
    synth->add_option("--seed", flags.seed, "Noise seed");

    CLI::App* segment = app.add_subcommand("segment", "Extract normalized sliding-window segments");
    segment->add_option("--train", data_path, "Input dataset")->required();
    segment->add_option("--out", out_path, "Output segments JSON")->required();
    segment->add_option("--L", flags.window_length, "Window length")->required();
    segment->add_option("--delta", flags.offset, "Window offset")->required();
    segment->add_flag("--znorm", flags.znormalize, "Whole-series z-normalization first");

    CLI::App* factorize = app.add_subcommand("factorize", "Fit one factorization at a fixed scale");
    factorize->add_option("--train", data_path, "Input dataset")->required();
    factorize->add_option("--out", out_path, "Output model JSON")->required();
    add_hyper_flags(factorize, flags);

    CLI::App* transform = app.add_subcommand(
        "transform", "Build bag-of-patterns features (multi-scale fit, or fold-in with --models)");
    transform->add_option("--train", data_path, "Input dataset")->required();
    transform->add_option("--out", out_path, "Output directory")->required();
    transform->add_option("--models", model_paths,
                          "Existing per-scale model files: fold-in instead of fitting");
    add_hyper_flags(transform, flags);

    CLI::App* train_svm = app.add_subcommand("train-svm", "Train the polynomial-kernel SVM");
    train_svm->add_option("--features", features_path, "features.csv produced by transform")
        ->required();
    train_svm->add_option("--out", out_path, "Output svm JSON")->required();
    train_svm->add_option("--degree", svm_degree, "Polynomial degree (default 3)");
    train_svm->add_option("--C", svm_c, "Complexity parameter (default 1)");
    train_svm->add_flag("--scale", scale_features, "Per-column max-abs scaling before training");

    CLI::App* evaluate = app.add_subcommand("evaluate", "Full pipeline with an error-rate report");
    evaluate->add_option("--train", train_path, "Training dataset")->required();
    evaluate->add_option("--test", test_path, "Test dataset")->required();
    evaluate->add_option("--out", out_path, "Output directory")->required();
    evaluate->add_option("--mode", mode, "joint (transductive, default) or foldin (inductive)")
        ->check(CLI::IsMember({"joint", "foldin"}));
    evaluate->add_option("--seeds", seed_count, "Repeat with consecutive seeds, report mean error")
        ->check(CLI::Range(1, 1 << 16));
    evaluate->add_option("--degree", svm_degree, "SVM polynomial degree (default 3)");
    evaluate->add_option("--C", svm_c, "SVM complexity parameter (default 1)");
    evaluate->add_flag("--scale", scale_features, "Per-column max-abs feature scaling");
    add_hyper_flags(evaluate, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        nlohmann::json summary;
        if (synth->parsed()) {
            summary = infa::cmd_synth(flags.seed, out_path);
        } else if (segment->parsed()) {
            summary = infa::cmd_segment(data_path, *flags.window_length, *flags.offset,
                                        flags.znormalize, out_path);
        } else if (factorize->parsed()) {
            infa::Dataset probe = infa::load_ucr(data_path);
            infa::RunConfig cfg = infa::resolve_defaults(probe.length, to_overrides(flags));
            infa::Hyperparams h;
            h.pattern_count = cfg.pattern_count;
            h.window_length = cfg.window_length;
            h.offset = cfg.offset;
            h.lambda_p = cfg.lambda_p;
            h.iterations = cfg.iterations;
            h.seed = flags.seed;
            h.pair_multiplier = cfg.pair_multiplier;
            summary = infa::cmd_factorize(data_path, h, flags.znormalize, out_path);
        } else if (transform->parsed()) {
            if (!model_paths.empty()) {
                summary = infa::cmd_transform_foldin(data_path, model_paths, out_path);
            } else {
                infa::Dataset probe = infa::load_ucr(data_path);
                infa::RunConfig cfg = infa::resolve_defaults(probe.length, to_overrides(flags));
                cfg.train_path = data_path;
                cfg.out_dir = out_path;
                cfg.seed = flags.seed;
                cfg.threads = flags.threads;
                cfg.znormalize = flags.znormalize;
                summary = infa::cmd_transform_joint(data_path, cfg);
            }
        } else if (train_svm->parsed()) {
            summary = infa::cmd_train_svm(features_path, svm_degree, svm_c, scale_features,
                                          out_path);
        } else if (evaluate->parsed()) {
            infa::Dataset probe = infa::load_ucr(train_path);
            infa::RunConfig cfg = infa::resolve_defaults(probe.length, to_overrides(flags));
            cfg.train_path = train_path;
            cfg.test_path = test_path;
            cfg.out_dir = out_path;
            cfg.mode = mode;
            cfg.seed = flags.seed;
            cfg.seed_count = seed_count;
            cfg.threads = flags.threads;
            cfg.znormalize = flags.znormalize;
            cfg.scale_features = scale_features;
            cfg.svm_degree = svm_degree;
            cfg.svm_c = svm_c;
            summary = infa::cmd_evaluate(cfg);
        }
        std::cout << summary.dump(1) << std::endl;
        return 0;
    } catch (const infa::config_error& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kExitConfig;
    } catch (const infa::data_error& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kExitData;
    } catch (const infa::compute_error& e) {
        std::cerr << "compute error: " << e.what() << std::endl;
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitCompute;
    }
}
