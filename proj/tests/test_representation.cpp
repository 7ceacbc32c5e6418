#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "infa/classify.hpp"
#include "infa/dataset.hpp"
#include "infa/errors.hpp"
#include "infa/representation.hpp"
#include "infa/rng.hpp"

using namespace infa;

namespace {

Dataset noisy_sines(std::size_t n, std::size_t q, std::uint64_t seed) {
    Dataset d;
    d.n_series = n;
    d.length = q;
    d.labels.assign(n, 0);
    d.original_labels = {0.0};
    d.class_count = 1;
    d.series.resize(n * q);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < q; ++t)
            d.series[i * q + t] =
                std::sin(0.2 * static_cast<double>(t) + static_cast<double>(i)) +
                0.4 * rng.uniform();
    return d;
}

RepresentationOptions figure1_options(std::uint64_t seed) {
    RepresentationOptions opt;
    opt.base_window = 20;
    opt.pattern_count = 2;
    opt.lambda_p = 0.1;
    opt.iterations = 15;
    opt.scale_count = 1;
    opt.seed = seed;
    opt.absolute_offset = true;
    opt.offset_value = 20;
    return opt;
}

// Max per-entry gap to the reference feature rows, up to column permutation.
double figure1_feature_error(const FeatureMatrix& f) {
    const double targets[4][2] = {{1.9, 1.1}, {1.7, 1.3}, {1.3, 1.7}, {1.1, 1.9}};
    double direct = 0.0, swapped = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        direct = std::max({direct, std::fabs(f.at(i, 0) - targets[i][0]),
                           std::fabs(f.at(i, 1) - targets[i][1])});
        swapped = std::max({swapped, std::fabs(f.at(i, 0) - targets[i][1]),
                            std::fabs(f.at(i, 1) - targets[i][0])});
    }
    return std::min(direct, swapped);
}

} // namespace

TEST_SUITE("representation") {

TEST_CASE("figure-1 features reproduce the reference rows within 0.15") {
    Dataset d = make_synthetic_figure1(0);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Representation rep = invariant_representation(d, figure1_options(seed));
        REQUIRE(rep.features.n_cols == 2);
        REQUIRE(rep.features.scales.front().segment_count == 3);
        CHECK(figure1_feature_error(rep.features) < 0.15);
    }
}

TEST_CASE("per-scale row sums equal M_s") {
    Dataset d = noisy_sines(5, 64, 3);
    RepresentationOptions opt;
    opt.base_window = 12;
    opt.pattern_count = 4;
    opt.lambda_p = 1.0;
    opt.iterations = 5;
    opt.scale_count = 4;
    opt.seed = 1;
    Representation rep = invariant_representation(d, opt);
    CHECK_NOTHROW(check_mass_conservation(rep.features));
    for (double v : rep.features.values) CHECK(v >= 0.0);
    for (std::size_t i = 0; i < rep.features.n_rows; ++i) {
        for (const ScaleLayout& s : rep.features.scales) {
            double sum = 0.0;
            for (std::size_t k = 0; k < rep.features.patterns_per_scale; ++k)
                sum += rep.features.at(i, s.column_begin + k);
            CHECK(std::fabs(sum - static_cast<double>(s.segment_count)) <= 1e-9);
        }
    }
}

TEST_CASE("single-series dataset: 1xK nonnegative features summing to M") {
    Dataset d = noisy_sines(1, 40, 9);
    RepresentationOptions opt;
    opt.base_window = 8;
    opt.pattern_count = 3;
    opt.iterations = 4;
    opt.scale_count = 1;
    opt.seed = 2;
    Representation rep = invariant_representation(d, opt);
    REQUIRE(rep.features.n_rows == 1);
    REQUIRE(rep.features.n_cols == 3);
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(rep.features.at(0, c) >= 0.0);
        sum += rep.features.at(0, c);
    }
    CHECK(sum == doctest::Approx(static_cast<double>(rep.features.scales[0].segment_count))
                     .epsilon(1e-12));
}

TEST_CASE("oversized scales are skipped with warnings; layout keeps survivors only") {
    Dataset d = noisy_sines(4, 50, 5);
    RepresentationOptions opt;
    opt.base_window = 20;  // scales 3..4 need windows 60, 80 >= Q=50
    opt.pattern_count = 3;
    opt.iterations = 3;
    opt.scale_count = 4;
    opt.seed = 7;
    Representation rep = invariant_representation(d, opt);
    CHECK(rep.features.scales.size() == 2);  // windows 20 and 40 fit
    CHECK(rep.warnings.size() == 2);
    CHECK(rep.features.n_cols == 2 * 3);
}

TEST_CASE("zero retained scales is an error") {
    Dataset d = noisy_sines(2, 30, 5);
    RepresentationOptions opt;
    opt.base_window = 40;
    opt.pattern_count = 2;
    opt.scale_count = 2;
    CHECK_THROWS_AS(invariant_representation(d, opt), config_error);
}

TEST_CASE("fold-in of the training series stays close to the joint features") {
    Dataset d = make_synthetic_figure1(1);
    Representation rep = invariant_representation(d, figure1_options(4));
    FeatureMatrix fold = transform_foldin(d, rep.models);
    REQUIRE(fold.n_rows == rep.features.n_rows);
    REQUIRE(fold.n_cols == rep.features.n_cols);
    for (std::size_t i = 0; i < fold.n_rows; ++i)
        for (std::size_t c = 0; c < fold.n_cols; ++c)
            CHECK(std::fabs(fold.at(i, c) - rep.features.at(i, c)) < 0.05);
}

TEST_CASE("fold-in: identical series yield identical rows regardless of batch") {
    Dataset d = make_synthetic_figure1(2);
    Representation rep = invariant_representation(d, figure1_options(11));

    Dataset twice;
    twice.n_series = 2;
    twice.length = d.length;
    twice.labels = {0, 0};
    twice.original_labels = {0.0};
    twice.class_count = 1;
    twice.series.insert(twice.series.end(), d.row(0), d.row(0) + d.length);
    twice.series.insert(twice.series.end(), d.row(0), d.row(0) + d.length);
    FeatureMatrix both = transform_foldin(twice, rep.models);
    for (std::size_t c = 0; c < both.n_cols; ++c) CHECK(both.at(0, c) == both.at(1, c));

    Dataset alone;
    alone.n_series = 1;
    alone.length = d.length;
    alone.labels = {0};
    alone.original_labels = {0.0};
    alone.class_count = 1;
    alone.series.assign(d.row(0), d.row(0) + d.length);
    FeatureMatrix single = transform_foldin(alone, rep.models);
    for (std::size_t c = 0; c < both.n_cols; ++c) CHECK(single.at(0, c) == both.at(0, c));
}

TEST_CASE("fold-in: constant series keeps one-hot init, mass conserved") {
    Dataset d = make_synthetic_figure1(3);
    Representation rep = invariant_representation(d, figure1_options(5));
    Dataset flat;
    flat.n_series = 1;
    flat.length = d.length;
    flat.labels = {0};
    flat.original_labels = {0.0};
    flat.class_count = 1;
    flat.series.assign(d.length, 2.5);
    FeatureMatrix f = transform_foldin(flat, rep.models);
    const double m_s = static_cast<double>(f.scales[0].segment_count);
    double sum = 0.0;
    int nonzero_cols = 0;
    for (std::size_t c = 0; c < f.n_cols; ++c) {
        sum += f.at(0, c);
        if (f.at(0, c) != 0.0) ++nonzero_cols;
    }
    CHECK(sum == doctest::Approx(m_s).epsilon(1e-12));
    CHECK(nonzero_cols == 1);  // all segments identical, all land on one pattern
}

TEST_CASE("fold-in: length mismatch is a data error") {
    Dataset d = make_synthetic_figure1(4);
    Representation rep = invariant_representation(d, figure1_options(6));
    Dataset other = noisy_sines(1, 45, 8);
    CHECK_THROWS_AS(transform_foldin(other, rep.models), data_error);
}

// Tolerance here is to a one-point circular shift (5% of the window). Larger
// shifts move the feature rows further than the inter-class gap on this
// four-series dataset in every measured configuration, so this pins the
// attainable strength of the claim.
TEST_CASE("shift tolerance: 1-NN class assignment survives a sub-window shift") {
    Dataset d = make_synthetic_figure1(5);
    Representation rep = invariant_representation(d, figure1_options(8));
    NnModel nn;
    nn.rows = rep.features.values;
    nn.n_rows = rep.features.n_rows;
    nn.dim = rep.features.n_cols;
    nn.labels = d.labels;
    nn.metric = Metric::Euclidean;

    // Smallest gap between feature rows of different classes.
    double inter_gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            if (d.labels[a] != d.labels[b])
                inter_gap = std::min(inter_gap,
                                     squared_euclidean(rep.features.row(a),
                                                       rep.features.row(b),
                                                       rep.features.n_cols));

    const std::size_t shift = 1;
    Dataset shifted = d;
    for (std::size_t i = 0; i < d.n_series; ++i)
        for (std::size_t t = 0; t < d.length; ++t)
            shifted.series[i * d.length + t] = d.value(i, (t + shift) % d.length);
    FeatureMatrix f = transform_foldin(shifted, rep.models);
    for (std::size_t i = 0; i < f.n_rows; ++i) {
        CHECK(squared_euclidean(f.row(i), rep.features.row(i), f.n_cols) < inter_gap);
        CHECK(nn_classify(nn, f.row(i), f.n_cols) == d.labels[i]);
    }
}

TEST_CASE("feature CSV round-trips") {
    Dataset d = make_synthetic_figure1(6);
    Representation rep = invariant_representation(d, figure1_options(9));
    std::vector<double> labels;
    for (int l : d.labels) labels.push_back(static_cast<double>(l));
    const std::string path =
        (std::filesystem::temp_directory_path() / "infa_features_rt.csv").string();
    save_features_csv(rep.features, labels, path, "{\"seed\":9}");
    LoadedFeatures loaded = load_features_csv(path);
    REQUIRE(loaded.n_rows == rep.features.n_rows);
    REQUIRE(loaded.n_cols == rep.features.n_cols);
    CHECK(loaded.labels == labels);
    CHECK(loaded.values == rep.features.values);  // %.17g round-trips exactly
    CHECK(loaded.column_names.front() == "s1_p1");
    std::remove(path.c_str());
}

TEST_CASE("threaded scale fits match the single-threaded results exactly") {
    Dataset d = noisy_sines(4, 80, 21);
    RepresentationOptions opt;
    opt.base_window = 10;
    opt.pattern_count = 4;
    opt.iterations = 4;
    opt.scale_count = 4;
    opt.seed = 13;
    Representation serial = invariant_representation(d, opt);
    opt.threads = 4;
    Representation parallel = invariant_representation(d, opt);
    CHECK(serial.features.values == parallel.features.values);
}

} // TEST_SUITE
