#include "infa/representation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "infa/errors.hpp"
#include "infa/segmentation.hpp"

namespace infa {

namespace {

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

std::size_t scale_offset(const RepresentationOptions& opt, std::size_t window_length) {
    if (opt.absolute_offset) return opt.offset_value;
    return std::max<std::size_t>(1, round_half_up(opt.offset_fraction *
                                                  static_cast<double>(window_length)));
}

// Sums membership degrees of every segment into the scale's column block.
void accumulate_scale_features(const FactorModel& m, FeatureMatrix& f, std::size_t column_begin) {
    const std::size_t big_k = m.hyper.pattern_count;
    for (std::size_t i = 0; i < m.n_series; ++i) {
        double* dst = f.values.data() + i * f.n_cols + column_begin;
        for (std::size_t j = 0; j < m.segments_per_series; ++j) {
            const double* d_row = m.memberships.data() + (i * m.segments_per_series + j) * big_k;
            for (std::size_t k = 0; k < big_k; ++k) dst[k] += d_row[k];
        }
    }
}

} // namespace

Representation invariant_representation(const Dataset& d, const RepresentationOptions& opt) {
    if (opt.base_window < 1) throw config_error("base window length must be >= 1");
    if (opt.scale_count < 1) throw config_error("scale count must be >= 1");

    struct ScalePlan {
        std::size_t scale, window_length, offset, segments;
    };
    std::vector<ScalePlan> plans;
    std::vector<std::string> warnings;
    for (std::size_t s = 1; s <= opt.scale_count; ++s) {
        const std::size_t window = opt.base_window * s;
        if (window >= d.length) {
            warnings.push_back("scale " + std::to_string(s) + " skipped: window " +
                               std::to_string(window) + " >= series length " +
                               std::to_string(d.length));
            continue;
        }
        const std::size_t offset = scale_offset(opt, window);
        if (offset > window) {
            warnings.push_back("scale " + std::to_string(s) + " skipped: offset " +
                               std::to_string(offset) + " > window " + std::to_string(window));
            continue;
        }
        const std::size_t m = segment_count(d.length, window, offset);
        if (m < 1) {
            warnings.push_back("scale " + std::to_string(s) + " skipped: no segment fits");
            continue;
        }
        if (opt.pattern_count > d.n_series * m) {
            warnings.push_back("scale " + std::to_string(s) + " skipped: K=" +
                               std::to_string(opt.pattern_count) + " exceeds " +
                               std::to_string(d.n_series * m) + " segments");
            continue;
        }
        plans.push_back({s, window, offset, m});
    }
    if (plans.empty())
        throw config_error("representation infeasible: every scale was skipped");

    std::vector<FactorModel> models(plans.size());
    std::vector<std::string> scale_errors(plans.size());
    auto fit_scale = [&](std::size_t idx) {
        const ScalePlan& plan = plans[idx];
        try {
            SegmentTensor seg = segment_series(d, plan.window_length, plan.offset);
            Hyperparams h;
            h.pattern_count = opt.pattern_count;
            h.window_length = plan.window_length;
            h.offset = plan.offset;
            h.lambda_p = opt.lambda_p;
            h.iterations = opt.iterations;
            h.seed = opt.seed + plan.scale;
            h.pair_multiplier = opt.pair_multiplier;
            models[idx] = fit(seg, h);
        } catch (const config_error& e) {
            scale_errors[idx] = e.what();
        }
    };

    const std::size_t worker_count =
        std::min<std::size_t>(std::max(1, opt.threads), plans.size());
    if (worker_count <= 1) {
        for (std::size_t idx = 0; idx < plans.size(); ++idx) fit_scale(idx);
    } else {
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < worker_count; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t idx = w; idx < plans.size(); idx += worker_count)
                    fit_scale(idx);
            });
        for (auto& t : workers) t.join();
    }

    Representation result;
    std::vector<std::size_t> retained;
    for (std::size_t idx = 0; idx < plans.size(); ++idx) {
        if (scale_errors[idx].empty()) {
            retained.push_back(idx);
        } else {
            warnings.push_back("scale " + std::to_string(plans[idx].scale) +
                               " skipped: " + scale_errors[idx]);
        }
    }
    if (retained.empty())
        throw config_error("representation infeasible: every scale was skipped");

    FeatureMatrix& f = result.features;
    f.n_rows = d.n_series;
    f.patterns_per_scale = opt.pattern_count;
    f.n_cols = retained.size() * opt.pattern_count;
    f.values.assign(f.n_rows * f.n_cols, 0.0);
    std::size_t column = 0;
    for (std::size_t idx : retained) {
        const ScalePlan& plan = plans[idx];
        f.scales.push_back({plan.scale, plan.window_length, plan.offset, plan.segments, column});
        accumulate_scale_features(models[idx], f, column);
        result.models.push_back(std::move(models[idx]));
        column += opt.pattern_count;
    }
    result.warnings = std::move(warnings);
    return result;
}

FeatureMatrix transform_foldin(const Dataset& d_new, const std::vector<FactorModel>& models) {
    if (models.empty()) throw config_error("fold-in requires at least one trained model");
    for (const FactorModel& m : models)
        if (m.hyper.pattern_count != models.front().hyper.pattern_count)
            throw config_error("fold-in models disagree on the pattern count");

    FeatureMatrix f;
    f.n_rows = d_new.n_series;
    f.patterns_per_scale = models.front().hyper.pattern_count;
    f.n_cols = models.size() * f.patterns_per_scale;
    f.values.assign(f.n_rows * f.n_cols, 0.0);

    std::size_t column = 0;
    for (std::size_t scale_idx = 0; scale_idx < models.size(); ++scale_idx) {
        const FactorModel& trained = models[scale_idx];
        const std::size_t big_k = trained.hyper.pattern_count;
        const std::size_t big_l = trained.hyper.window_length;
        if (big_l >= d_new.length)
            throw data_error("fold-in length mismatch: window " + std::to_string(big_l) +
                             " does not fit series of length " + std::to_string(d_new.length));
        SegmentTensor seg = segment_series(d_new, big_l, trained.hyper.offset);
        if (seg.segments_per_series != trained.segments_per_series)
            throw data_error("fold-in length mismatch: got " +
                             std::to_string(seg.segments_per_series) +
                             " segments per series, model was trained with " +
                             std::to_string(trained.segments_per_series));

        const std::size_t m_s = seg.segments_per_series;
        FactorModel local;
        local.hyper = trained.hyper;
        local.n_series = d_new.n_series;
        local.segments_per_series = m_s;
        local.patterns = trained.patterns;
        local.memberships.assign(d_new.n_series * m_s * big_k, 0.0);
        local.residuals.assign(seg.values.size(), 0.0);

        std::vector<char> degenerate(d_new.n_series * m_s, 0);
        for (std::size_t s = 0; s < d_new.n_series * m_s; ++s) {
            const double* src = seg.values.data() + s * big_l;
            bool all_zero = true;
            for (std::size_t l = 0; l < big_l; ++l)
                if (src[l] != 0.0) { all_zero = false; break; }
            if (all_zero) degenerate[s] = 1;

            std::size_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < big_k; ++k) {
                const double* p = local.patterns.data() + k * big_l;
                double acc = 0.0;
                for (std::size_t l = 0; l < big_l; ++l) {
                    const double diff = src[l] - p[l];
                    acc += diff * diff;
                }
                if (acc < best_d2) {
                    best_d2 = acc;
                    best = k;
                }
            }
            local.memberships[s * big_k + best] = 1.0;
            const double* p = local.patterns.data() + best * big_l;
            double* xi = local.residuals.data() + s * big_l;
            for (std::size_t l = 0; l < big_l; ++l) xi[l] = src[l] - p[l];
        }

        const std::size_t pairs_per_segment = big_k * local.hyper.pair_multiplier;
        const std::size_t max_attempts = 10 * big_k;
        for (std::size_t i = 0; i < d_new.n_series; ++i) {
            // Fresh generator per series: features must not depend on which
            // other series share the batch.
            Rng rng(trained.hyper.seed);
            std::vector<std::size_t> order(m_s);
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t iteration = 0; iteration < local.hyper.iterations; ++iteration) {
                rng.shuffle(order);
                for (std::size_t j : order) {
                    const std::size_t s = i * m_s + j;
                    if (degenerate[s]) continue;
                    const double* d_row = local.memberships.data() + s * big_k;
                    for (std::size_t t = 0; t < pairs_per_segment; ++t) {
                        for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
                            const std::size_t k = rng.index(big_k);
                            const std::size_t w = rng.index(big_k);
                            if (k == w) continue;
                            if (d_row[k] + d_row[w] == 0.0) continue;
                            update_membership_pair(local, i, j, k, w);
                            break;
                        }
                    }
                }
            }
        }

        f.scales.push_back({scale_idx + 1, big_l, trained.hyper.offset, m_s, column});
        accumulate_scale_features(local, f, column);
        column += big_k;
    }
    return f;
}

void check_mass_conservation(const FeatureMatrix& f, double tolerance) {
    for (std::size_t i = 0; i < f.n_rows; ++i) {
        for (const ScaleLayout& layout : f.scales) {
            double sum = 0.0;
            for (std::size_t k = 0; k < f.patterns_per_scale; ++k)
                sum += f.at(i, layout.column_begin + k);
            const double expected = static_cast<double>(layout.segment_count);
            if (std::fabs(sum - expected) > tolerance)
                throw compute_error("mass conservation violated: row " + std::to_string(i) +
                                    " scale " + std::to_string(layout.scale) + " sums to " +
                                    std::to_string(sum) + ", expected " +
                                    std::to_string(expected));
        }
    }
}

void save_features_csv(const FeatureMatrix& f, const std::vector<double>& row_labels,
                       const std::string& path, const std::string& config_comment) {
    if (row_labels.size() != f.n_rows)
        throw config_error("label count does not match feature rows");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write features file: " + path);
    if (!config_comment.empty()) out << "# config: " << config_comment << '\n';
    out << "label";
    for (const ScaleLayout& layout : f.scales)
        for (std::size_t k = 0; k < f.patterns_per_scale; ++k)
            out << ",s" << layout.scale << "_p" << (k + 1);
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < f.n_rows; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", row_labels[i]);
        out << buf;
        for (std::size_t c = 0; c < f.n_cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", f.at(i, c));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

LoadedFeatures load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open features file: " + path);
    LoadedFeatures out;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::stringstream ss(line);
            std::string name;
            bool first = true;
            while (std::getline(ss, name, ',')) {
                if (!first) out.column_names.push_back(name);
                first = false;
            }
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        std::size_t field = 0;
        while (std::getline(ss, tok, ',')) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str())
                throw data_error(path + ": non-numeric field at line " + std::to_string(line_no));
            if (field == 0)
                out.labels.push_back(v);
            else
                out.values.push_back(v);
            ++field;
        }
        if (field != out.column_names.size() + 1)
            throw data_error(path + ": ragged row at line " + std::to_string(line_no));
        ++out.n_rows;
    }
    if (out.n_rows == 0) throw data_error(path + ": no feature rows");
    out.n_cols = out.column_names.size();
    return out;
}

} // namespace infa
