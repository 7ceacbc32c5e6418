#include "infa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "infa/errors.hpp"
#include "infa/rng.hpp"

namespace infa {

namespace {

std::string basename_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    return base;
}

std::vector<double> parse_line(const std::string& line, char delim,
                               const std::string& path, std::size_t line_no) {
    std::vector<double> fields;
    std::size_t pos = 0;
    const std::size_t n = line.size();
    while (pos < n) {
        while (pos < n && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == delim))
            ++pos;
        if (pos >= n) break;
        std::size_t end = pos;
        while (end < n && line[end] != ' ' && line[end] != '\t' && line[end] != delim)
            ++end;
        const std::string tok = line.substr(pos, end - pos);
        char* parse_end = nullptr;
        const double v = std::strtod(tok.c_str(), &parse_end);
        if (parse_end == tok.c_str() || *parse_end != '\0')
            throw data_error(path + ": non-numeric field '" + tok + "' at line " +
                             std::to_string(line_no));
        if (!std::isfinite(v))
            throw data_error(path + ": non-finite value at line " + std::to_string(line_no));
        fields.push_back(v);
        pos = end;
    }
    return fields;
}

} // namespace

Dataset load_ucr(const std::string& path, Delimiter delimiter) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open dataset file: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<double> raw_labels;
    std::string line;
    std::size_t line_no = 0;
    char delim = ',';
    bool delim_resolved = (delimiter != Delimiter::Auto);
    if (delimiter == Delimiter::Whitespace) delim = ' ';

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!delim_resolved) {
            delim = (line.find(',') != std::string::npos) ? ',' : ' ';
            delim_resolved = true;
        }
        std::vector<double> fields = parse_line(line, delim, path, line_no);
        if (fields.size() < 3)
            throw data_error(path + ": line " + std::to_string(line_no) +
                             " has fewer than 3 fields (label + Q>=2 values required)");
        raw_labels.push_back(fields.front());
        rows.emplace_back(fields.begin() + 1, fields.end());
        if (rows.size() > 1 && rows.back().size() != rows.front().size())
            throw data_error(path + ": ragged row at line " + std::to_string(line_no) +
                             " (expected " + std::to_string(rows.front().size()) +
                             " values, got " + std::to_string(rows.back().size()) + ")");
    }
    if (rows.empty()) throw data_error(path + ": empty dataset");

    Dataset d;
    d.n_series = rows.size();
    d.length = rows.front().size();
    d.name = basename_stem(path);
    d.series.reserve(d.n_series * d.length);
    for (const auto& r : rows) d.series.insert(d.series.end(), r.begin(), r.end());

    // Contiguous 0-based ids in sorted order of the original label values.
    std::map<double, int> remap;
    for (double l : raw_labels) remap.emplace(l, 0);
    int next_id = 0;
    for (auto& kv : remap) kv.second = next_id++;
    d.class_count = next_id;
    d.original_labels.resize(static_cast<std::size_t>(next_id));
    for (const auto& kv : remap) d.original_labels[static_cast<std::size_t>(kv.second)] = kv.first;
    d.labels.reserve(raw_labels.size());
    for (double l : raw_labels) d.labels.push_back(remap.at(l));
    return d;
}

void save_ucr(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write dataset file: " + path);
    char buf[40];
    for (std::size_t i = 0; i < d.n_series; ++i) {
        const double original = d.original_labels.empty()
                                    ? static_cast<double>(d.labels[i])
                                    : d.original_labels[static_cast<std::size_t>(d.labels[i])];
        std::snprintf(buf, sizeof(buf), "%.17g", original);
        out << buf;
        for (std::size_t t = 0; t < d.length; ++t) {
            std::snprintf(buf, sizeof(buf), "%.17g", d.value(i, t));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

namespace {

void znormalize_span(double* x, std::size_t n) {
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) mean += x[t];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dev = x[t] - mean;
        var += dev * dev;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));  // population std
    if (sd < 1e-8) {
        for (std::size_t t = 0; t < n; ++t) x[t] = 0.0;
    } else {
        for (std::size_t t = 0; t < n; ++t) x[t] = (x[t] - mean) / sd;
    }
}

} // namespace

Dataset znormalize_series(const Dataset& d) {
    Dataset out = d;
    for (std::size_t i = 0; i < out.n_series; ++i)
        znormalize_span(out.series.data() + i * out.length, out.length);
    return out;
}

namespace {

constexpr std::size_t kSegmentLen = 60 / 3;

// Red weight per (series, segment position). Per-series sums are 1.9 / 1.7 /
// 1.3 / 1.1. Each class contributes pure-prototype anchor segments (w=1, w=0)
// so the factorization can pin both patterns, and the position order
// anti-aligns series within a class so each series' raw-space nearest
// neighbour belongs to the other class.
constexpr double kRedWeights[4][3] = {
    {1.0, 0.6, 0.3},  // A1
    {0.2, 0.5, 1.0},  // A2
    {0.7, 0.6, 0.0},  // B1
    {0.0, 0.6, 0.5},  // B2
};

std::vector<double> znormalized_bump(const std::vector<double>& shape) {
    std::vector<double> out = shape;
    znormalize_span(out.data(), out.size());
    return out;
}

} // namespace

const double (&synthetic_figure1_weights())[4][3] { return kRedWeights; }

Dataset make_synthetic_figure1(std::uint64_t seed) {
    // Single-peaked prototype: one Gaussian bump. Double-peaked: two bumps.
    // Both z-normalized on 20 points.
    // Overlapping Gaussian bumps: a single central peak (red) and two side
    // peaks (blue), correlated enough (rho ~ 0.8) that the per-segment
    // normalization arc stays flat and memberships track the mixing weights.
    std::vector<double> red(kSegmentLen), blue(kSegmentLen);
    for (std::size_t t = 0; t < kSegmentLen; ++t) {
        const double x = static_cast<double>(t);
        red[t] = std::exp(-(x - 9.5) * (x - 9.5) / (2.0 * 3.5 * 3.5));
        blue[t] = std::exp(-(x - 6.0) * (x - 6.0) / (2.0 * 2.5 * 2.5)) +
                  std::exp(-(x - 13.0) * (x - 13.0) / (2.0 * 2.5 * 2.5));
    }
    red = znormalized_bump(red);
    blue = znormalized_bump(blue);

    Dataset d;
    d.n_series = 4;
    d.length = 3 * kSegmentLen;
    d.class_count = 2;
    d.labels = {0, 0, 1, 1};
    d.original_labels = {0.0, 1.0};
    d.name = "figure1_synthetic";
    d.series.resize(d.n_series * d.length);

    Rng rng(seed);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t seg = 0; seg < 3; ++seg) {
            const double w = kRedWeights[i][seg];
            double* dst = d.series.data() + i * d.length + seg * kSegmentLen;
            for (std::size_t t = 0; t < kSegmentLen; ++t)
                dst[t] = w * red[t] + (1.0 - w) * blue[t];
        }
        for (std::size_t t = 0; t < d.length; ++t)
            d.series[i * d.length + t] += 0.01 * (2.0 * rng.uniform() - 1.0);
    }
    return d;
}

} // namespace infa
