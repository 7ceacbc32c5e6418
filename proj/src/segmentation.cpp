#include "infa/segmentation.hpp"

#include <cmath>
#include <string>

#include "infa/errors.hpp"

namespace infa {

std::size_t segment_count(std::size_t q, std::size_t window_length, std::size_t offset) {
    if (window_length >= q || offset == 0) return 0;
    const std::size_t span = q - window_length;
    std::size_t m = span / offset;
    if (span % offset == 0) ++m;
    return m;
}

SegmentTensor segment_series(const Dataset& d, std::size_t window_length, std::size_t offset) {
    const std::size_t q = d.length;
    if (window_length < 1 || window_length >= q)
        throw config_error("window length L=" + std::to_string(window_length) +
                           " must satisfy 1 <= L < Q=" + std::to_string(q));
    if (offset < 1 || offset > window_length)
        throw config_error("offset delta=" + std::to_string(offset) +
                           " must satisfy 1 <= delta <= L=" + std::to_string(window_length));
    const std::size_t m = segment_count(q, window_length, offset);
    if (m < 1)
        throw config_error("no segments fit: Q=" + std::to_string(q) +
                           " L=" + std::to_string(window_length) +
                           " delta=" + std::to_string(offset));

    SegmentTensor s;
    s.n_series = d.n_series;
    s.segments_per_series = m;
    s.window_length = window_length;
    s.offset = offset;
    s.values.resize(d.n_series * m * window_length);

    const double inv_len = 1.0 / static_cast<double>(window_length);
    for (std::size_t i = 0; i < d.n_series; ++i) {
        const double* ts = d.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            double* seg = s.segment(i, j);
            const double* src = ts + offset * j;
            double mean = 0.0;
            for (std::size_t l = 0; l < window_length; ++l) mean += src[l];
            mean *= inv_len;
            double var = 0.0;
            for (std::size_t l = 0; l < window_length; ++l) {
                const double dev = src[l] - mean;
                var += dev * dev;
            }
            const double sd = std::sqrt(var * inv_len);
            if (sd < 1e-8) {
                for (std::size_t l = 0; l < window_length; ++l) seg[l] = 0.0;
            } else {
                const double inv_sd = 1.0 / sd;
                for (std::size_t l = 0; l < window_length; ++l)
                    seg[l] = (src[l] - mean) * inv_sd;
            }
        }
    }
    return s;
}

} // namespace infa
