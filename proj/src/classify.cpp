#include "infa/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "infa/errors.hpp"

namespace infa {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double poly_kernel(const double* a, const double* b, std::size_t n, int degree) {
    const double base = dot(a, b, n) + 1.0;
    double out = 1.0;
    for (int d = 0; d < degree; ++d) out *= base;
    return out;
}

struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    double dual_objective = 0.0;
    std::size_t iterations = 0;
};

// Two-class SMO on a precomputed kernel matrix. Minimizes
//   f(a) = 1/2 a'Qa - e'a,  Q_ij = y_i y_j K_ij,
// subject to 0 <= a <= C and y'a = 0, selecting the maximal-KKT-violating
// pair each step (first index wins ties, giving a fixed scan-order fallback).
SmoResult smo_solve(const std::vector<double>& kernel, const std::vector<int>& y,
                    std::size_t n, double c, double tol) {
    SmoResult res;
    res.alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0); // G = Qa - e, a = 0 initially

    const std::size_t max_iterations = std::max<std::size_t>(10'000'000, 100 * n);
    std::size_t it = 0;
    for (; it < max_iterations; ++it) {
        // i: argmax -y*G over I_up;  j: argmin -y*G over I_low.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up = (y[t] > 0) ? (res.alpha[t] < c) : (res.alpha[t] > 0.0);
            const bool in_low = (y[t] > 0) ? (res.alpha[t] > 0.0) : (res.alpha[t] < c);
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up && v > up_best) {
                up_best = v;
                i = t;
            }
            if (in_low && v < low_best) {
                low_best = v;
                j = t;
            }
        }
        if (i >= n || j >= n || up_best - low_best <= tol) break;

        // Optimal step along the feasible direction (+y_i, -y_j), box-clipped.
        double eta = kernel[i * n + i] + kernel[j * n + j] - 2.0 * kernel[i * n + j];
        if (eta <= 0.0) eta = 1e-12;
        double step = (up_best - low_best) / eta;

        double step_max = std::numeric_limits<double>::infinity();
        double step_min = -std::numeric_limits<double>::infinity();
        if (y[i] > 0) {
            step_max = std::min(step_max, c - res.alpha[i]);
            step_min = std::max(step_min, -res.alpha[i]);
        } else {
            step_max = std::min(step_max, res.alpha[i]);
            step_min = std::max(step_min, res.alpha[i] - c);
        }
        if (y[j] > 0) {
            step_max = std::min(step_max, res.alpha[j]);
            step_min = std::max(step_min, res.alpha[j] - c);
        } else {
            step_max = std::min(step_max, c - res.alpha[j]);
            step_min = std::max(step_min, -res.alpha[j]);
        }
        step = std::clamp(step, step_min, step_max);
        if (step == 0.0) break;

        const double delta_i = static_cast<double>(y[i]) * step;
        const double delta_j = -static_cast<double>(y[j]) * step;
        res.alpha[i] += delta_i;
        res.alpha[j] += delta_j;
        for (std::size_t t = 0; t < n; ++t) {
            const double q_ti = static_cast<double>(y[t] * y[i]) * kernel[t * n + i];
            const double q_tj = static_cast<double>(y[t] * y[j]) * kernel[t * n + j];
            grad[t] += q_ti * delta_i + q_tj * delta_j;
        }
    }
    res.iterations = it;

    // Bias: average of -y*G over free vectors, else midpoint of the bounds.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double up_best = -std::numeric_limits<double>::infinity();
    double low_best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -static_cast<double>(y[t]) * grad[t];
        const bool in_up = (y[t] > 0) ? (res.alpha[t] < c) : (res.alpha[t] > 0.0);
        const bool in_low = (y[t] > 0) ? (res.alpha[t] > 0.0) : (res.alpha[t] < c);
        if (in_up) up_best = std::max(up_best, v);
        if (in_low) low_best = std::min(low_best, v);
        if (res.alpha[t] > 0.0 && res.alpha[t] < c) {
            free_sum += v;
            ++free_count;
        }
    }
    res.bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                              : 0.5 * (up_best + low_best);

    // Dual value in max form: e'a - 1/2 a'Qa = -f(a); compute via gradient:
    // a'Qa = a'(G + e) => -f = sum(a) - (a'G + sum(a))/2.
    double a_g = 0.0, a_sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        a_g += res.alpha[t] * grad[t];
        a_sum += res.alpha[t];
    }
    res.dual_objective = a_sum - 0.5 * (a_g + a_sum);
    return res;
}

} // namespace

SvmModel svm_train(const std::vector<double>& rows, std::size_t n_rows, std::size_t dim,
                   const std::vector<int>& labels, int class_count,
                   const SvmParams& params) {
    if (n_rows == 0 || labels.size() != n_rows)
        throw config_error("svm_train: rows and labels disagree");
    if (class_count < 2) throw config_error("svm_train: need at least two classes");
    std::vector<std::size_t> per_class(static_cast<std::size_t>(class_count), 0);
    for (int l : labels) {
        if (l < 0 || l >= class_count) throw config_error("svm_train: label out of range");
        ++per_class[static_cast<std::size_t>(l)];
    }
    int present = 0;
    for (std::size_t cnt : per_class) present += cnt > 0 ? 1 : 0;
    if (present < 2)
        throw config_error("svm_train: degenerate training set, fewer than two classes present");

    SvmModel model;
    model.params = params;
    model.class_count = class_count;
    model.dim = dim;

    for (int a = 0; a < class_count; ++a) {
        if (per_class[static_cast<std::size_t>(a)] == 0) continue;
        for (int b = a + 1; b < class_count; ++b) {
            if (per_class[static_cast<std::size_t>(b)] == 0) continue;
            std::vector<std::size_t> subset;
            std::vector<int> y;
            for (std::size_t i = 0; i < n_rows; ++i) {
                if (labels[i] == a || labels[i] == b) {
                    subset.push_back(i);
                    y.push_back(labels[i] == a ? +1 : -1);
                }
            }
            const std::size_t n = subset.size();
            std::vector<double> kernel(n * n);
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t q = p; q < n; ++q) {
                    const double v = poly_kernel(rows.data() + subset[p] * dim,
                                                 rows.data() + subset[q] * dim, dim,
                                                 params.degree);
                    kernel[p * n + q] = v;
                    kernel[q * n + p] = v;
                }
            SmoResult sol = smo_solve(kernel, y, n, params.c, params.kkt_tol);

            PairwiseSvm pair;
            pair.class_pos = a;
            pair.class_neg = b;
            pair.bias = sol.bias;
            pair.dual_objective = sol.dual_objective;
            pair.smo_iterations = sol.iterations;
            for (std::size_t p = 0; p < n; ++p) {
                if (sol.alpha[p] > 0.0) {
                    pair.support_indices.push_back(subset[p]);
                    pair.coefficients.push_back(sol.alpha[p] * static_cast<double>(y[p]));
                    const double* row = rows.data() + subset[p] * dim;
                    pair.support_rows.insert(pair.support_rows.end(), row, row + dim);
                }
            }
            model.pairs.push_back(std::move(pair));
        }
    }
    return model;
}

double svm_pair_decision(const SvmModel& m, const PairwiseSvm& pair, const double* x) {
    double acc = pair.bias;
    for (std::size_t s = 0; s < pair.support_indices.size(); ++s)
        acc += pair.coefficients[s] *
               poly_kernel(pair.support_rows.data() + s * m.dim, x, m.dim, m.params.degree);
    return acc;
}

int svm_predict(const SvmModel& m, const double* x, std::size_t dim) {
    if (dim != m.dim) throw config_error("svm_predict: feature dimension mismatch");
    std::vector<int> votes(static_cast<std::size_t>(m.class_count), 0);
    for (const PairwiseSvm& pair : m.pairs) {
        const double decision = svm_pair_decision(m, pair, x);
        // On the surface the lower id wins.
        const int winner = decision >= 0.0 ? pair.class_pos : pair.class_neg;
        ++votes[static_cast<std::size_t>(winner)];
    }
    int best = 0;
    for (int cls = 1; cls < m.class_count; ++cls)
        if (votes[static_cast<std::size_t>(cls)] > votes[static_cast<std::size_t>(best)])
            best = cls;
    return best;
}

std::vector<int> svm_predict(const SvmModel& m, const std::vector<double>& rows,
                             std::size_t n_rows, std::size_t dim) {
    std::vector<int> out;
    out.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i)
        out.push_back(svm_predict(m, rows.data() + i * dim, dim));
    return out;
}

void save_svm(const SvmModel& m, const std::string& path, const std::string& config_comment) {
    nlohmann::json doc;
    doc["degree"] = m.params.degree;
    doc["C"] = m.params.c;
    doc["kkt_tol"] = m.params.kkt_tol;
    doc["class_count"] = m.class_count;
    doc["dim"] = m.dim;
    auto pairs = nlohmann::json::array();
    for (const PairwiseSvm& pair : m.pairs) {
        nlohmann::json p;
        p["class_pos"] = pair.class_pos;
        p["class_neg"] = pair.class_neg;
        p["support_indices"] = pair.support_indices;
        p["coefficients"] = pair.coefficients;
        p["bias"] = pair.bias;
        p["dual_objective"] = pair.dual_objective;
        pairs.push_back(std::move(p));
    }
    doc["pairs"] = std::move(pairs);
    if (!config_comment.empty()) doc["config"] = nlohmann::json::parse(config_comment);

    std::ofstream out(path);
    if (!out) throw data_error("cannot write svm file: " + path);
    out << doc.dump(1) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

SvmModel load_svm(const std::string& path, const std::vector<double>& train_rows,
                  std::size_t n_rows, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open svm file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("invalid svm JSON in " + path + ": " + e.what());
    }
    SvmModel m;
    try {
        m.params.degree = doc.at("degree").get<int>();
        m.params.c = doc.at("C").get<double>();
        if (doc.contains("kkt_tol")) m.params.kkt_tol = doc["kkt_tol"].get<double>();
        m.class_count = doc.at("class_count").get<int>();
        m.dim = doc.at("dim").get<std::size_t>();
        if (m.dim != dim)
            throw data_error("svm dimension " + std::to_string(m.dim) +
                             " does not match feature dimension " + std::to_string(dim));
        for (const auto& p : doc.at("pairs")) {
            PairwiseSvm pair;
            pair.class_pos = p.at("class_pos").get<int>();
            pair.class_neg = p.at("class_neg").get<int>();
            pair.support_indices = p.at("support_indices").get<std::vector<std::size_t>>();
            pair.coefficients = p.at("coefficients").get<std::vector<double>>();
            pair.bias = p.at("bias").get<double>();
            if (p.contains("dual_objective"))
                pair.dual_objective = p["dual_objective"].get<double>();
            for (std::size_t idx : pair.support_indices) {
                if (idx >= n_rows)
                    throw data_error("svm support index " + std::to_string(idx) +
                                     " out of range");
                const double* row = train_rows.data() + idx * dim;
                pair.support_rows.insert(pair.support_rows.end(), row, row + dim);
            }
            m.pairs.push_back(std::move(pair));
        }
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed svm fields in " + path + ": " + e.what());
    }
    return m;
}

double squared_euclidean(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

double dtw_distance(const double* a, std::size_t n, const double* b, std::size_t m) {
    if (n == 0 || m == 0) throw config_error("dtw: empty series");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), curr(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        curr[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double diff = a[i - 1] - b[j - 1];
            const double cost = diff * diff;
            curr[j] = cost + std::min({prev[j], curr[j - 1], prev[j - 1]});
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

namespace {

double nn_distance(const NnModel& m, const double* x, std::size_t dim, std::size_t row) {
    const double* r = m.rows.data() + row * m.dim;
    return m.metric == Metric::Euclidean ? squared_euclidean(r, x, dim)
                                         : dtw_distance(r, m.dim, x, dim);
}

} // namespace

int nn_classify(const NnModel& m, const double* x, std::size_t dim) {
    if (m.n_rows == 0) throw config_error("nn_classify: empty training set");
    if (m.metric == Metric::Euclidean && dim != m.dim)
        throw config_error("nn_classify: dimension mismatch");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        const double d = nn_distance(m, x, dim, i);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return m.labels[best];
}

double nn_loo_error(const NnModel& m) {
    if (m.n_rows < 2) throw config_error("nn_loo_error: need at least two rows");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        std::size_t best = m.n_rows;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m.n_rows; ++j) {
            if (j == i) continue;
            const double d = nn_distance(m, m.rows.data() + i * m.dim, m.dim, j);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (m.labels[best] != m.labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(m.n_rows);
}

} // namespace infa
