#ifndef INFA_CLASSIFY_HPP
#define INFA_CLASSIFY_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace infa {

struct SvmParams {
    int degree = 3;        // inhomogeneous polynomial kernel (x.y + 1)^degree
    double c = 1.0;        // box constraint
    double kkt_tol = 1e-3; // stopping tolerance on the max KKT violation
};

// One soft-margin problem per class pair; y=+1 is the lower class id.
struct PairwiseSvm {
    int class_pos = 0; // lower id
    int class_neg = 0;
    std::vector<std::size_t> support_indices; // rows of the training feature matrix
    std::vector<double> coefficients;         // alpha_i * y_i per support vector
    std::vector<double> support_rows;         // copies, support_count x dim
    double bias = 0.0;
    double dual_objective = 0.0;              // sum(alpha) - 1/2 alpha' Q alpha
    std::size_t smo_iterations = 0;
};

struct SvmModel {
    SvmParams params;
    int class_count = 0;
    std::size_t dim = 0;
    std::vector<PairwiseSvm> pairs;
};

// Trains one-vs-one polynomial-kernel SVMs by sequential minimal optimization
// with most-violating-pair working-set selection (ties resolved by scan
// order). Deterministic given a fixed example order. Throws config_error when
// fewer than two classes are present.
SvmModel svm_train(const std::vector<double>& rows, std::size_t n_rows, std::size_t dim,
                   const std::vector<int>& labels, int class_count,
                   const SvmParams& params = {});

// Majority vote over the pairwise decisions; pairwise ties and vote ties both
// resolve to the lowest class id. Throws config_error on dimension mismatch.
int svm_predict(const SvmModel& m, const double* x, std::size_t dim);
std::vector<int> svm_predict(const SvmModel& m, const std::vector<double>& rows,
                             std::size_t n_rows, std::size_t dim);

// Signed decision value of one pairwise problem (for tests).
double svm_pair_decision(const SvmModel& m, const PairwiseSvm& pair, const double* x);

void save_svm(const SvmModel& m, const std::string& path,
              const std::string& config_comment = "");
// Support vectors are stored by index; the training feature rows must be
// supplied to rebuild them.
SvmModel load_svm(const std::string& path, const std::vector<double>& train_rows,
                  std::size_t n_rows, std::size_t dim);

enum class Metric { Euclidean, Dtw };

// 1-nearest-neighbor over stored rows. Euclidean compares squared L2; DTW is
// the classic full dynamic program with squared point costs and no warping
// window. Distance ties resolve to the lowest training index.
struct NnModel {
    std::vector<double> rows; // n x dim
    std::size_t n_rows = 0;
    std::size_t dim = 0;
    std::vector<int> labels;
    Metric metric = Metric::Euclidean;
};

double squared_euclidean(const double* a, const double* b, std::size_t n);
double dtw_distance(const double* a, std::size_t n, const double* b, std::size_t m);

int nn_classify(const NnModel& m, const double* x, std::size_t dim);

// Leave-one-out error rate of 1-NN on the stored rows (self excluded).
double nn_loo_error(const NnModel& m);

} // namespace infa

#endif
