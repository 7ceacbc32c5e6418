#ifndef INFA_DATASET_HPP
#define INFA_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace infa {

enum class Delimiter { Auto, Comma, Whitespace };

// Labeled time-series dataset: N series of equal length Q, row-major storage.
// Labels are remapped to contiguous 0-based ids at load; original_labels keeps
// the source alphabet for reporting. Immutable after construction by convention.
struct Dataset {
    std::vector<double> series;          // n_series * length, row-major
    std::vector<int> labels;             // 0-based contiguous class ids
    std::vector<double> original_labels; // original label per class id
    std::size_t n_series = 0;            // N
    std::size_t length = 0;              // Q
    int class_count = 0;
    std::string name;

    double value(std::size_t i, std::size_t t) const { return series[i * length + t]; }
    const double* row(std::size_t i) const { return series.data() + i * length; }
};

// Parses the UCR text format: one series per line, first field the class
// label, then Q values. Delimiter is auto-detected on the first line unless
// forced. Throws data_error on ragged rows, non-numeric fields or empty input.
Dataset load_ucr(const std::string& path, Delimiter delimiter = Delimiter::Auto);

// Writes the same format back (comma-delimited, %.17g), original labels first.
void save_ucr(const Dataset& d, const std::string& path);

// Whole-series z-normalization: each row to mean 0 / population std 1; rows
// with std below 1e-8 become all zeros. Idempotent.
Dataset znormalize_series(const Dataset& d);

// Four-series, two-class synthetic set (Q=60): every series concatenates three
// 20-point segments, each a convex mix w*single_peak + (1-w)*double_peak of two
// z-normalized prototypes, plus seeded noise of amplitude <= 0.01. The red
// weights per series sum to 1.9 / 1.7 / 1.3 / 1.1, and the per-position order
// is arranged so raw-space nearest neighbours cross class lines.
Dataset make_synthetic_figure1(std::uint64_t seed);

// The exact pre-noise mixing weights used by make_synthetic_figure1,
// per series and segment. Exposed for tests.
const double (&synthetic_figure1_weights())[4][3];

} // namespace infa

#endif
