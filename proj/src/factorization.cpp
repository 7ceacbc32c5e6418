#include "infa/factorization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <json.hpp>

#include "infa/errors.hpp"

namespace infa {

namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double diff = a[l] - b[l];
        acc += diff * diff;
    }
    return acc;
}

// Shared by the public op and fit's pattern phase (fit caches the denominator
// sum per pattern; the summation order is identical either way).
void pattern_point_update(FactorModel& m, std::size_t k, std::size_t l, double sum_d2) {
    const std::size_t n_seg = m.total_segments();
    const std::size_t big_k = m.hyper.pattern_count;
    const std::size_t big_l = m.hyper.window_length;
    const double lambda = m.hyper.lambda_p;
    if (lambda == 0.0 && sum_d2 == 0.0) return;  // pattern unused, no information

    const double old_value = m.patterns[k * big_l + l];
    double numerator = 0.0;
    const double* d_col = m.memberships.data() + k;
    const double* xi_col = m.residuals.data() + l;
    for (std::size_t s = 0; s < n_seg; ++s) {
        const double d = d_col[s * big_k];
        numerator += (xi_col[s * big_l] + d * old_value) * d;
    }
    const double new_value = numerator / (lambda + sum_d2);

    const double delta = new_value - old_value;
    double* xi = m.residuals.data() + l;
    const double* d_ptr = m.memberships.data() + k;
    for (std::size_t s = 0; s < n_seg; ++s)
        xi[s * big_l] -= delta * d_ptr[s * big_k];
    m.patterns[k * big_l + l] = new_value;
}

double membership_column_sumsq(const FactorModel& m, std::size_t k) {
    const std::size_t n_seg = m.total_segments();
    const std::size_t big_k = m.hyper.pattern_count;
    const double* d_col = m.memberships.data() + k;
    double acc = 0.0;
    for (std::size_t s = 0; s < n_seg; ++s) {
        const double d = d_col[s * big_k];
        acc += d * d;
    }
    return acc;
}

void recompute_residuals(const SegmentTensor& s, FactorModel& m) {
    const std::size_t big_k = m.hyper.pattern_count;
    const std::size_t big_l = m.hyper.window_length;
    m.residuals.assign(s.values.size(), 0.0);
    for (std::size_t seg = 0; seg < m.total_segments(); ++seg) {
        const double* src = s.values.data() + seg * big_l;
        const double* d_row = m.memberships.data() + seg * big_k;
        double* xi = m.residuals.data() + seg * big_l;
        for (std::size_t l = 0; l < big_l; ++l) xi[l] = src[l];
        for (std::size_t k = 0; k < big_k; ++k) {
            const double d = d_row[k];
            if (d == 0.0) continue;
            const double* p = m.patterns.data() + k * big_l;
            for (std::size_t l = 0; l < big_l; ++l) xi[l] -= d * p[l];
        }
    }
}

} // namespace

double objective(const SegmentTensor& s, const FactorModel& m) {
    const std::size_t big_k = m.hyper.pattern_count;
    const std::size_t big_l = m.hyper.window_length;
    double loss = 0.0;
    for (std::size_t seg = 0; seg < m.total_segments(); ++seg) {
        const double* src = s.values.data() + seg * big_l;
        const double* d_row = m.memberships.data() + seg * big_k;
        for (std::size_t l = 0; l < big_l; ++l) {
            double rec = 0.0;
            for (std::size_t k = 0; k < big_k; ++k)
                rec += d_row[k] * m.patterns[k * big_l + l];
            const double err = src[l] - rec;
            loss += err * err;
        }
    }
    double reg = 0.0;
    for (double p : m.patterns) reg += p * p;
    return loss + m.hyper.lambda_p * reg;
}

FactorModel initialize(const SegmentTensor& s, std::size_t pattern_count, Rng& rng) {
    const std::size_t n_seg = s.total_segments();
    const std::size_t big_l = s.window_length;
    if (pattern_count > n_seg)
        throw config_error("infeasible K: " + std::to_string(pattern_count) +
                           " patterns requested but only " + std::to_string(n_seg) +
                           " segments available");

    FactorModel m;
    m.hyper.pattern_count = pattern_count;
    m.hyper.window_length = big_l;
    m.hyper.offset = s.offset;
    m.n_series = s.n_series;
    m.segments_per_series = s.segments_per_series;
    m.patterns.resize(pattern_count * big_l);
    m.memberships.assign(n_seg * pattern_count, 0.0);

    // First pattern uniform; the rest weighted by squared distance to the
    // nearest chosen pattern, maintained incrementally.
    const std::size_t first = rng.index(n_seg);
    std::copy(s.values.begin() + first * big_l, s.values.begin() + (first + 1) * big_l,
              m.patterns.begin());
    std::vector<double> weight(n_seg);
    for (std::size_t seg = 0; seg < n_seg; ++seg)
        weight[seg] = squared_distance(s.values.data() + seg * big_l, m.patterns.data(), big_l);

    for (std::size_t k = 1; k < pattern_count; ++k) {
        const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
        if (total <= 0.0)
            throw config_error("fewer than " + std::to_string(pattern_count) +
                               " distinct segments; cannot seed patterns");
        const std::size_t chosen = rng.weighted_index(weight, total);
        double* dst = m.patterns.data() + k * big_l;
        std::copy(s.values.begin() + chosen * big_l, s.values.begin() + (chosen + 1) * big_l, dst);
        for (std::size_t seg = 0; seg < n_seg; ++seg) {
            const double d2 = squared_distance(s.values.data() + seg * big_l, dst, big_l);
            if (d2 < weight[seg]) weight[seg] = d2;
        }
    }

    // One-hot memberships on the closest pattern, ties to the lowest index.
    for (std::size_t seg = 0; seg < n_seg; ++seg) {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pattern_count; ++k) {
            const double d2 = squared_distance(s.values.data() + seg * big_l,
                                               m.patterns.data() + k * big_l, big_l);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = k;
            }
        }
        m.memberships[seg * pattern_count + best] = 1.0;
    }

    recompute_residuals(s, m);
    return m;
}

FactorModel initialize(const SegmentTensor& s, std::size_t pattern_count, std::uint64_t seed) {
    Rng rng(seed);
    FactorModel m = initialize(s, pattern_count, rng);
    m.hyper.seed = seed;
    return m;
}

void update_pattern_point(FactorModel& m, std::size_t k, std::size_t l) {
    pattern_point_update(m, k, l, membership_column_sumsq(m, k));
}

bool update_membership_pair(FactorModel& m, std::size_t i, std::size_t j,
                            std::size_t k, std::size_t w) {
    const std::size_t big_k = m.hyper.pattern_count;
    const std::size_t big_l = m.hyper.window_length;
    const std::size_t seg = i * m.segments_per_series + j;
    double* d_row = m.memberships.data() + seg * big_k;
    double* xi = m.residuals.data() + seg * big_l;
    const double* p_k = m.patterns.data() + k * big_l;
    const double* p_w = m.patterns.data() + w * big_l;

    const double d_k = d_row[k];
    const double d_w = d_row[w];
    const double pair_sum = d_k + d_w;

    double numerator = 0.0;
    double denominator = 0.0;
    for (std::size_t l = 0; l < big_l; ++l) {
        const double gap = p_w[l] - p_k[l];
        numerator -= (xi[l] - d_k * gap) * gap;
        denominator += gap * gap;
    }
    if (denominator < 1e-12) return false;  // identical patterns carry nothing to trade

    double optimum = numerator / denominator;
    if (optimum < 0.0) optimum = 0.0;
    if (optimum > pair_sum) optimum = pair_sum;

    // Residual refresh for both members, in the displayed order.
    const double shift_k = optimum - d_k;
    const double shift_w = pair_sum - optimum - d_w;
    for (std::size_t l = 0; l < big_l; ++l) {
        xi[l] -= shift_k * p_k[l];
        xi[l] -= shift_w * p_w[l];
    }
    d_row[k] = optimum;
    d_row[w] = pair_sum - optimum;
    return true;
}

FactorModel fit(const SegmentTensor& s, const Hyperparams& h) {
    if (h.pattern_count < 2) throw config_error("K must be >= 2");
    if (h.lambda_p < 0.0) throw config_error("lambda_p must be nonnegative");
    if (h.iterations < 1) throw config_error("iterations must be >= 1");
    if (h.pair_multiplier < 1) throw config_error("pair multiplier must be >= 1");
    if (h.window_length != s.window_length || h.offset != s.offset)
        throw config_error("hyperparameters disagree with the segment tensor (L or delta)");

    Rng rng(h.seed);
    FactorModel m = initialize(s, h.pattern_count, rng);
    m.hyper = h;
    m.objective_trace.push_back(objective(s, m));

    const std::size_t n_seg = s.total_segments();
    const std::size_t big_k = h.pattern_count;
    const std::size_t big_l = h.window_length;
    const std::size_t pairs_per_segment = big_k * h.pair_multiplier;
    const std::size_t max_attempts = 10 * big_k;

    std::vector<std::size_t> segment_order(n_seg);
    std::iota(segment_order.begin(), segment_order.end(), std::size_t{0});
    std::vector<std::size_t> coordinate_order(big_k * big_l);
    std::iota(coordinate_order.begin(), coordinate_order.end(), std::size_t{0});
    std::vector<double> sum_d2(big_k);

    for (std::size_t iteration = 0; iteration < h.iterations; ++iteration) {
        rng.shuffle(segment_order);
        for (std::size_t seg : segment_order) {
            const std::size_t i = seg / m.segments_per_series;
            const std::size_t j = seg % m.segments_per_series;
            const double* d_row = m.memberships.data() + seg * big_k;
            for (std::size_t t = 0; t < pairs_per_segment; ++t) {
                // Rejection-sample an ordered pair k != w with nonzero mass.
                for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
                    const std::size_t k = rng.index(big_k);
                    const std::size_t w = rng.index(big_k);
                    if (k == w) continue;
                    if (d_row[k] + d_row[w] == 0.0) continue;
                    update_membership_pair(m, i, j, k, w);
                    break;
                }
            }
        }

        rng.shuffle(coordinate_order);
        for (std::size_t k = 0; k < big_k; ++k) sum_d2[k] = membership_column_sumsq(m, k);
        for (std::size_t coord : coordinate_order) {
            const std::size_t k = coord / big_l;
            const std::size_t l = coord % big_l;
            pattern_point_update(m, k, l, sum_d2[k]);
        }
        m.objective_trace.push_back(objective(s, m));
    }
    return m;
}

double rebuild_residuals(const SegmentTensor& s, FactorModel& m) {
    std::vector<double> old = std::move(m.residuals);
    recompute_residuals(s, m);
    double drift = 0.0;
    if (old.size() == m.residuals.size()) {
        for (std::size_t idx = 0; idx < old.size(); ++idx)
            drift = std::max(drift, std::fabs(old[idx] - m.residuals[idx]));
    } else {
        drift = std::numeric_limits<double>::infinity();
    }
    return drift;
}

void save_model(const FactorModel& m, const std::string& path) {
    nlohmann::json doc;
    doc["K"] = m.hyper.pattern_count;
    doc["L"] = m.hyper.window_length;
    doc["delta"] = m.hyper.offset;
    doc["lambda_p"] = m.hyper.lambda_p;
    doc["iterations"] = m.hyper.iterations;
    doc["seed"] = m.hyper.seed;
    auto patterns = nlohmann::json::array();
    for (std::size_t k = 0; k < m.hyper.pattern_count; ++k) {
        auto row = nlohmann::json::array();
        for (std::size_t l = 0; l < m.hyper.window_length; ++l)
            row.push_back(m.pattern(k, l));
        patterns.push_back(std::move(row));
    }
    doc["patterns"] = std::move(patterns);
    auto memberships = nlohmann::json::array();
    for (std::size_t i = 0; i < m.n_series; ++i) {
        auto per_series = nlohmann::json::array();
        for (std::size_t j = 0; j < m.segments_per_series; ++j) {
            auto row = nlohmann::json::array();
            for (std::size_t k = 0; k < m.hyper.pattern_count; ++k)
                row.push_back(m.membership(i, j, k));
            per_series.push_back(std::move(row));
        }
        memberships.push_back(std::move(per_series));
    }
    doc["memberships"] = std::move(memberships);

    std::ofstream out(path);
    if (!out) throw data_error("cannot write model file: " + path);
    out << doc.dump(1) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

FactorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("invalid model JSON in " + path + ": " + e.what());
    }
    FactorModel m;
    try {
        m.hyper.pattern_count = doc.at("K").get<std::size_t>();
        m.hyper.window_length = doc.at("L").get<std::size_t>();
        m.hyper.offset = doc.at("delta").get<std::size_t>();
        m.hyper.lambda_p = doc.at("lambda_p").get<double>();
        m.hyper.iterations = doc.at("iterations").get<std::size_t>();
        m.hyper.seed = doc.at("seed").get<std::uint64_t>();
        const auto& patterns = doc.at("patterns");
        m.patterns.reserve(m.hyper.pattern_count * m.hyper.window_length);
        for (const auto& row : patterns)
            for (const auto& v : row) m.patterns.push_back(v.get<double>());
        const auto& memberships = doc.at("memberships");
        m.n_series = memberships.size();
        for (const auto& per_series : memberships) {
            m.segments_per_series = per_series.size();
            for (const auto& row : per_series)
                for (const auto& v : row) m.memberships.push_back(v.get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed model fields in " + path + ": " + e.what());
    }
    if (m.patterns.size() != m.hyper.pattern_count * m.hyper.window_length ||
        m.memberships.size() != m.total_segments() * m.hyper.pattern_count)
        throw data_error("model dimensions inconsistent in " + path);
    return m;
}

} // namespace infa
