#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "infa/classify.hpp"
#include "infa/cli.hpp"
#include "infa/dataset.hpp"
#include "infa/errors.hpp"
#include "infa/factorization.hpp"
#include "infa/representation.hpp"
#include "infa/segmentation.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> matrix_copy(const std::vector<double>& flat, std::size_t rows,
                                std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(flat.begin(), flat.end(), out.mutable_data());
    return out;
}

py::array_t<double> tensor_copy(const std::vector<double>& flat, std::size_t a, std::size_t b,
                                std::size_t c) {
    py::array_t<double> out({a, b, c});
    std::copy(flat.begin(), flat.end(), out.mutable_data());
    return out;
}

std::vector<double> flat_rows(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                              std::size_t& n, std::size_t& dim) {
    if (x.ndim() != 2) throw infa::config_error("expected a 2-D array");
    n = static_cast<std::size_t>(x.shape(0));
    dim = static_cast<std::size_t>(x.shape(1));
    return std::vector<double>(x.data(), x.data() + n * dim);
}

infa::Dataset dataset_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& series,
    const std::vector<double>& labels, const std::string& name) {
    infa::Dataset d;
    std::size_t n = 0, q = 0;
    d.series = flat_rows(series, n, q);
    if (labels.size() != n) throw infa::config_error("labels length must match series rows");
    d.n_series = n;
    d.length = q;
    auto [ids, originals] = infa::remap_labels(labels);
    d.labels = std::move(ids);
    d.original_labels = std::move(originals);
    d.class_count = static_cast<int>(d.original_labels.size());
    d.name = name;
    return d;
}

} // namespace

PYBIND11_MODULE(infa, m) {
    m.doc() = "Invariant factorization of time series: latent patterns, "
              "bag-of-patterns features and classifiers";

    py::register_exception<infa::config_error>(m, "ConfigError");
    py::register_exception<infa::data_error>(m, "DataError");
    py::register_exception<infa::compute_error>(m, "ComputeError");

    py::class_<infa::Dataset>(m, "Dataset")
        .def_property_readonly("series",
                               [](const infa::Dataset& d) {
                                   return matrix_copy(d.series, d.n_series, d.length);
                               })
        .def_readonly("labels", &infa::Dataset::labels)
        .def_readonly("original_labels", &infa::Dataset::original_labels)
        .def_readonly("n_series", &infa::Dataset::n_series)
        .def_readonly("length", &infa::Dataset::length)
        .def_readonly("class_count", &infa::Dataset::class_count)
        .def_readonly("name", &infa::Dataset::name)
        .def("__repr__", [](const infa::Dataset& d) {
            return "<Dataset " + d.name + ": N=" + std::to_string(d.n_series) +
                   " Q=" + std::to_string(d.length) +
                   " classes=" + std::to_string(d.class_count) + ">";
        });

    py::enum_<infa::Delimiter>(m, "Delimiter")
        .value("AUTO", infa::Delimiter::Auto)
        .value("COMMA", infa::Delimiter::Comma)
        .value("WHITESPACE", infa::Delimiter::Whitespace);
    m.def("load_ucr", &infa::load_ucr, py::arg("path"),
          py::arg("delimiter") = infa::Delimiter::Auto);
    m.def("save_ucr", &infa::save_ucr, py::arg("dataset"), py::arg("path"));
    m.def("znormalize_series", &infa::znormalize_series, py::arg("dataset"));
    m.def("make_synthetic_figure1", &infa::make_synthetic_figure1, py::arg("seed") = 0);
    m.def("dataset_from_arrays", &dataset_from_array, py::arg("series"), py::arg("labels"),
          py::arg("name") = "memory");

    py::class_<infa::SegmentTensor>(m, "SegmentTensor")
        .def_property_readonly("values",
                               [](const infa::SegmentTensor& s) {
                                   return tensor_copy(s.values, s.n_series,
                                                      s.segments_per_series, s.window_length);
                               })
        .def_readonly("n_series", &infa::SegmentTensor::n_series)
        .def_readonly("segments_per_series", &infa::SegmentTensor::segments_per_series)
        .def_readonly("window_length", &infa::SegmentTensor::window_length)
        .def_readonly("offset", &infa::SegmentTensor::offset);

    m.def("segment_count", &infa::segment_count, py::arg("q"), py::arg("window_length"),
          py::arg("offset"));
    m.def("segment_series", &infa::segment_series, py::arg("dataset"), py::arg("window_length"),
          py::arg("offset"));

    py::class_<infa::Hyperparams>(m, "Hyperparams")
        .def(py::init([](std::size_t k, std::size_t l, std::size_t delta, double lambda_p,
                         std::size_t iterations, std::uint64_t seed, std::size_t pair_multiplier) {
                 infa::Hyperparams h;
                 h.pattern_count = k;
                 h.window_length = l;
                 h.offset = delta;
                 h.lambda_p = lambda_p;
                 h.iterations = iterations;
                 h.seed = seed;
                 h.pair_multiplier = pair_multiplier;
                 return h;
             }),
             py::arg("K"), py::arg("L"), py::arg("delta"), py::arg("lambda_p") = 1.0,
             py::arg("iterations") = 15, py::arg("seed") = 0, py::arg("pair_multiplier") = 1)
        .def_readwrite("K", &infa::Hyperparams::pattern_count)
        .def_readwrite("L", &infa::Hyperparams::window_length)
        .def_readwrite("delta", &infa::Hyperparams::offset)
        .def_readwrite("lambda_p", &infa::Hyperparams::lambda_p)
        .def_readwrite("iterations", &infa::Hyperparams::iterations)
        .def_readwrite("seed", &infa::Hyperparams::seed)
        .def_readwrite("pair_multiplier", &infa::Hyperparams::pair_multiplier);

    py::class_<infa::FactorModel>(m, "FactorModel")
        .def_property_readonly("patterns",
                               [](const infa::FactorModel& f) {
                                   return matrix_copy(f.patterns, f.hyper.pattern_count,
                                                      f.hyper.window_length);
                               })
        .def_property_readonly("memberships",
                               [](const infa::FactorModel& f) {
                                   return tensor_copy(f.memberships, f.n_series,
                                                      f.segments_per_series,
                                                      f.hyper.pattern_count);
                               })
        .def_readonly("objective_trace", &infa::FactorModel::objective_trace)
        .def_readonly("hyper", &infa::FactorModel::hyper)
        .def_readonly("n_series", &infa::FactorModel::n_series)
        .def_readonly("segments_per_series", &infa::FactorModel::segments_per_series);

    m.def("objective", &infa::objective, py::arg("segments"), py::arg("model"));
    m.def("initialize",
          py::overload_cast<const infa::SegmentTensor&, std::size_t, std::uint64_t>(
              &infa::initialize),
          py::arg("segments"), py::arg("pattern_count"), py::arg("seed"));
    m.def("fit", &infa::fit, py::arg("segments"), py::arg("hyper"),
          py::call_guard<py::gil_scoped_release>());
    m.def("rebuild_residuals", &infa::rebuild_residuals, py::arg("segments"), py::arg("model"));
    m.def("save_model", &infa::save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &infa::load_model, py::arg("path"));

    py::class_<infa::ScaleLayout>(m, "ScaleLayout")
        .def_readonly("scale", &infa::ScaleLayout::scale)
        .def_readonly("window_length", &infa::ScaleLayout::window_length)
        .def_readonly("offset", &infa::ScaleLayout::offset)
        .def_readonly("segment_count", &infa::ScaleLayout::segment_count)
        .def_readonly("column_begin", &infa::ScaleLayout::column_begin);

    py::class_<infa::FeatureMatrix>(m, "FeatureMatrix")
        .def_property_readonly("values",
                               [](const infa::FeatureMatrix& f) {
                                   return matrix_copy(f.values, f.n_rows, f.n_cols);
                               })
        .def_readonly("n_rows", &infa::FeatureMatrix::n_rows)
        .def_readonly("n_cols", &infa::FeatureMatrix::n_cols)
        .def_readonly("patterns_per_scale", &infa::FeatureMatrix::patterns_per_scale)
        .def_readonly("scales", &infa::FeatureMatrix::scales);

    py::class_<infa::Representation>(m, "Representation")
        .def_readonly("features", &infa::Representation::features)
        .def_readonly("models", &infa::Representation::models)
        .def_readonly("warnings", &infa::Representation::warnings);

    m.def(
        "invariant_representation",
        [](const infa::Dataset& d, std::size_t base_window, std::size_t pattern_count,
           double lambda_p, std::size_t iterations, std::size_t scales, std::uint64_t seed,
           double offset_fraction, std::optional<std::size_t> absolute_offset, int threads) {
            infa::RepresentationOptions opt;
            opt.base_window = base_window;
            opt.pattern_count = pattern_count;
            opt.lambda_p = lambda_p;
            opt.iterations = iterations;
            opt.scale_count = scales;
            opt.seed = seed;
            opt.offset_fraction = offset_fraction;
            if (absolute_offset) {
                opt.absolute_offset = true;
                opt.offset_value = *absolute_offset;
            }
            opt.threads = threads;
            return infa::invariant_representation(d, opt);
        },
        py::arg("dataset"), py::arg("base_window"), py::arg("pattern_count"),
        py::arg("lambda_p") = 1.0, py::arg("iterations") = 15, py::arg("scales") = 4,
        py::arg("seed") = 0, py::arg("offset_fraction") = 0.05,
        py::arg("absolute_offset") = std::nullopt, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def("transform_foldin", &infa::transform_foldin, py::arg("dataset"), py::arg("models"),
          py::call_guard<py::gil_scoped_release>());
    m.def("check_mass_conservation", &infa::check_mass_conservation, py::arg("features"),
          py::arg("tolerance") = 1e-9);

    py::class_<infa::SvmModel>(m, "SvmModel")
        .def_readonly("class_count", &infa::SvmModel::class_count)
        .def_readonly("dim", &infa::SvmModel::dim)
        .def_property_readonly("pair_count",
                               [](const infa::SvmModel& s) { return s.pairs.size(); });

    m.def(
        "svm_train",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& rows,
           const std::vector<int>& labels, int degree, double c) {
            std::size_t n = 0, dim = 0;
            std::vector<double> flat = flat_rows(rows, n, dim);
            int class_count = 0;
            for (int l : labels) class_count = std::max(class_count, l + 1);
            infa::SvmParams params;
            params.degree = degree;
            params.c = c;
            return infa::svm_train(flat, n, dim, labels, class_count, params);
        },
        py::arg("rows"), py::arg("labels"), py::arg("degree") = 3, py::arg("C") = 1.0);
    m.def(
        "svm_predict",
        [](const infa::SvmModel& model,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& rows) {
            std::size_t n = 0, dim = 0;
            std::vector<double> flat = flat_rows(rows, n, dim);
            return infa::svm_predict(model, flat, n, dim);
        },
        py::arg("model"), py::arg("rows"));

    py::enum_<infa::Metric>(m, "Metric")
        .value("EUCLIDEAN", infa::Metric::Euclidean)
        .value("DTW", infa::Metric::Dtw);

    m.def(
        "nn_classify",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& rows,
           const std::vector<int>& labels,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& queries,
           infa::Metric metric) {
            infa::NnModel nn;
            std::size_t n = 0, dim = 0;
            nn.rows = flat_rows(rows, n, dim);
            nn.n_rows = n;
            nn.dim = dim;
            nn.labels = labels;
            nn.metric = metric;
            std::size_t nq = 0, qdim = 0;
            std::vector<double> q = flat_rows(queries, nq, qdim);
            std::vector<int> out;
            for (std::size_t i = 0; i < nq; ++i)
                out.push_back(infa::nn_classify(nn, q.data() + i * qdim, qdim));
            return out;
        },
        py::arg("rows"), py::arg("labels"), py::arg("queries"),
        py::arg("metric") = infa::Metric::Euclidean);
    m.def(
        "nn_loo_error",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& rows,
           const std::vector<int>& labels, infa::Metric metric) {
            infa::NnModel nn;
            std::size_t n = 0, dim = 0;
            nn.rows = flat_rows(rows, n, dim);
            nn.n_rows = n;
            nn.dim = dim;
            nn.labels = labels;
            nn.metric = metric;
            return infa::nn_loo_error(nn);
        },
        py::arg("rows"), py::arg("labels"), py::arg("metric") = infa::Metric::Euclidean);
    m.def(
        "dtw_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
            if (a.ndim() != 1 || b.ndim() != 1)
                throw infa::config_error("dtw_distance expects 1-D arrays");
            return infa::dtw_distance(a.data(), static_cast<std::size_t>(a.shape(0)), b.data(),
                                      static_cast<std::size_t>(b.shape(0)));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "resolve_defaults",
        [](std::size_t q, std::optional<std::size_t> L, std::optional<std::size_t> K,
           std::optional<std::size_t> delta, std::optional<double> lambda_p,
           std::optional<std::size_t> iterations, std::optional<std::size_t> scales, bool large) {
            infa::Overrides ov;
            ov.window_length = L;
            ov.pattern_count = K;
            ov.offset = delta;
            ov.lambda_p = lambda_p;
            ov.iterations = iterations;
            ov.scale_count = scales;
            ov.large_preset = large;
            const infa::RunConfig cfg = infa::resolve_defaults(q, ov);
            py::dict out;
            out["Q"] = cfg.series_length;
            out["L"] = cfg.window_length;
            out["K"] = cfg.pattern_count;
            out["delta"] = cfg.offset;
            out["delta_fraction"] = cfg.offset_fraction;
            out["absolute_delta"] = cfg.absolute_offset;
            out["lambda_p"] = cfg.lambda_p;
            out["iterations"] = cfg.iterations;
            out["scales"] = cfg.scale_count;
            out["large"] = cfg.large_preset;
            return out;
        },
        py::arg("q"), py::arg("L") = std::nullopt, py::arg("K") = std::nullopt,
        py::arg("delta") = std::nullopt, py::arg("lambda_p") = std::nullopt,
        py::arg("iterations") = std::nullopt, py::arg("scales") = std::nullopt,
        py::arg("large") = false);

    m.def(
        "evaluate",
        [](const std::string& train, const std::string& test, const std::string& out_dir,
           const std::string& mode, std::uint64_t seed, int seeds,
           std::optional<std::size_t> L, std::optional<std::size_t> K,
           std::optional<std::size_t> delta, std::optional<double> lambda_p,
           std::optional<std::size_t> iterations, std::optional<std::size_t> scales, bool large,
           int threads) {
            infa::Dataset probe = infa::load_ucr(train);
            infa::Overrides ov;
            ov.window_length = L;
            ov.pattern_count = K;
            ov.offset = delta;
            ov.lambda_p = lambda_p;
            ov.iterations = iterations;
            ov.scale_count = scales;
            ov.large_preset = large;
            infa::RunConfig cfg = infa::resolve_defaults(probe.length, ov);
            cfg.train_path = train;
            cfg.test_path = test;
            cfg.out_dir = out_dir;
            cfg.mode = mode;
            cfg.seed = seed;
            cfg.seed_count = seeds;
            cfg.threads = threads;
            const nlohmann::json report = infa::cmd_evaluate(cfg);
            py::module_ json = py::module_::import("json");
            return json.attr("loads")(report.dump());
        },
        py::arg("train"), py::arg("test"), py::arg("out_dir"), py::arg("mode") = "joint",
        py::arg("seed") = 0, py::arg("seeds") = 1, py::arg("L") = std::nullopt,
        py::arg("K") = std::nullopt, py::arg("delta") = std::nullopt,
        py::arg("lambda_p") = std::nullopt, py::arg("iterations") = std::nullopt,
        py::arg("scales") = std::nullopt, py::arg("large") = false, py::arg("threads") = 1);
}
