#pragma once

// Pairwise-comparison primitives of the analytic hierarchy process.
//
// The numeric kernels are templates over Eigen dense expressions; the
// ComparisonMatrix wrapper adds element labels and the reciprocity invariant
// a_ij * a_ji = 1.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace actgraph::coa {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPowerTolerance = 1e-9;
inline constexpr int kPowerIterationCap = 10000;
inline constexpr double kConsistencyThreshold = 0.1;

template <typename Scalar>
struct Priorities {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;  // positive, sums to 1
  Scalar lambda_max = 0;
  int iterations = 0;
};

// Principal (Perron) eigenvector of a positive matrix by power iteration,
// normalized to unit sum. Stops when successive iterates differ by less than
// `tolerance` in every component.
template <typename Derived>
Priorities<typename Derived::Scalar> principal_eigenvector(const Eigen::MatrixBase<Derived>& a,
                                                           typename Derived::Scalar tolerance = kPowerTolerance,
                                                           int max_iterations = kPowerIterationCap) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) throw std::invalid_argument("principal_eigenvector needs a non-empty square matrix");

  Priorities<Scalar> out;
  Vector x = Vector::Constant(n, Scalar(1) / Scalar(n));
  for (int it = 1; it <= max_iterations; ++it) {
    Vector y = a * x;
    y /= y.sum();
    const Scalar change = (y - x).cwiseAbs().maxCoeff();
    x = std::move(y);
    if (change < tolerance) {
      out.iterations = it;
      out.weights = x;
      // x sums to one, so the components of A x sum to lambda.
      out.lambda_max = (a * x).sum();
      return out;
    }
  }
  throw NumericalError("power iteration did not converge within " + std::to_string(max_iterations) + " iterations");
}

// Saaty's random consistency index; defined for n = 1..10.
double random_index(std::size_t n);

// CI / RI(n) with CI = (lambda_max - n) / (n - 1); zero for n <= 2.
template <typename Scalar>
Scalar consistency_ratio_from(Scalar lambda_max, std::size_t n) {
  if (n <= 2) return Scalar(0);
  const Scalar ci = (lambda_max - Scalar(n)) / Scalar(n - 1);
  return std::max(Scalar(0), ci / Scalar(random_index(n)));
}

// Maps the questionnaire answer (1 = left element dominates most, 5 = equal,
// 9 = right element dominates most) to the judgment a_left,right.
double response_to_ratio(int response);

struct Triad {
  std::size_t i = 0, j = 0, k = 0;
  double deviation = 0;  // |ln(a_ij * a_jk / a_ik)|; zero when consistent
};

// Labelled reciprocal judgment matrix.
class ComparisonMatrix {
 public:
  // n x n all-ones (every pair judged equal).
  explicit ComparisonMatrix(std::vector<std::string> labels);
  // Throws std::invalid_argument unless `entries` is square, positive and
  // reciprocal to within 1e-9 relative.
  ComparisonMatrix(std::vector<std::string> labels, Eigen::MatrixXd entries);

  // a_ij = w_i / w_j.
  static ComparisonMatrix from_weights(std::vector<std::string> labels, const Eigen::VectorXd& weights);

  // Sets a_ij = value and a_ji = 1 / value.
  void set_judgment(std::size_t i, std::size_t j, double value);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd entries_;
};

Priorities<double> priority_vector(const ComparisonMatrix& m);
double consistency_ratio(const ComparisonMatrix& m);
std::optional<Triad> most_inconsistent_triad(const ComparisonMatrix& m);

}  // namespace actgraph::coa
