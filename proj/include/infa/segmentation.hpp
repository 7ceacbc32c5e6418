#ifndef INFA_SEGMENTATION_HPP
#define INFA_SEGMENTATION_HPP

#include <cstddef>
#include <vector>

#include "infa/dataset.hpp"

namespace infa {

// Sliding-window segments of a dataset, z-normalized per segment.
// values is N x M x L row-major; segment (i, j) starts at time offset * j
// (0-based) of series i.
struct SegmentTensor {
    std::vector<double> values;
    std::size_t n_series = 0;            // N
    std::size_t segments_per_series = 0; // M
    std::size_t window_length = 0;       // L
    std::size_t offset = 0;              // delta

    const double* segment(std::size_t i, std::size_t j) const {
        return values.data() + (i * segments_per_series + j) * window_length;
    }
    double* segment(std::size_t i, std::size_t j) {
        return values.data() + (i * segments_per_series + j) * window_length;
    }
    std::size_t total_segments() const { return n_series * segments_per_series; }
};

// Number of windows: floor((Q-L)/delta), plus the final flush window when
// delta divides (Q-L) exactly (it ends at position Q exactly; required for
// series tiled by whole segments to be fully covered).
std::size_t segment_count(std::size_t q, std::size_t window_length, std::size_t offset);

// Extracts and normalizes all windows. Each segment gets mean 0 / population
// std 1; segments with std below 1e-8 become zero vectors. Throws config_error
// when L >= Q, delta > L, or no window fits.
SegmentTensor segment_series(const Dataset& d, std::size_t window_length, std::size_t offset);

} // namespace infa

#endif
