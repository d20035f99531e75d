#include "actgraph/coa/ahp.hpp"

#include <array>

namespace actgraph::coa {

double random_index(std::size_t n) {
  static constexpr std::array<double, 11> table{0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49};
  if (n == 0 || n >= table.size())
    throw std::invalid_argument("no random consistency index for " + std::to_string(n) + " elements (supported: 1..10)");
  return table[n];
}

double response_to_ratio(int response) {
  static constexpr std::array<double, 9> ratios{9.0, 7.0, 5.0, 3.0, 1.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 7.0, 1.0 / 9.0};
  if (response < 1 || response > 9)
    throw std::invalid_argument("questionnaire response must be in 1..9, got " + std::to_string(response));
  return ratios[static_cast<std::size_t>(response - 1)];
}

ComparisonMatrix::ComparisonMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)),
      entries_(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(labels_.size()),
                                     static_cast<Eigen::Index>(labels_.size()))) {
  if (labels_.empty()) throw std::invalid_argument("comparison matrix needs at least one element");
}

ComparisonMatrix::ComparisonMatrix(std::vector<std::string> labels, Eigen::MatrixXd entries)
    : labels_(std::move(labels)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (n == 0) throw std::invalid_argument("comparison matrix needs at least one element");
  if (entries_.rows() != n || entries_.cols() != n)
    throw std::invalid_argument("comparison matrix shape does not match its labels");
  if (!(entries_.array() > 0.0).all() || !entries_.allFinite())
    throw std::invalid_argument("comparison matrix entries must be positive and finite");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(entries_(i, j) * entries_(j, i) - 1.0) > 1e-9)
        throw std::invalid_argument("comparison matrix is not reciprocal at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
}

ComparisonMatrix ComparisonMatrix::from_weights(std::vector<std::string> labels, const Eigen::VectorXd& w) {
  if (w.size() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("weight vector length does not match labels");
  if (!(w.array() > 0.0).all()) throw std::invalid_argument("weights must be positive");
  Eigen::MatrixXd a = w * w.cwiseInverse().transpose();
  // Force exact reciprocity and a unit diagonal against rounding.
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    a(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) a(j, i) = 1.0 / a(i, j);
  }
  return ComparisonMatrix(std::move(labels), std::move(a));
}

void ComparisonMatrix::set_judgment(std::size_t i, std::size_t j, double value) {
  if (i >= size() || j >= size()) throw std::out_of_range("judgment index out of range");
  if (!(value > 0.0) || !std::isfinite(value)) throw std::invalid_argument("judgment must be positive");
  if (i == j) {
    if (value != 1.0) throw std::invalid_argument("diagonal judgment must be 1");
    return;
  }
  const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
  entries_(r, c) = value;
  entries_(c, r) = 1.0 / value;
}

Priorities<double> priority_vector(const ComparisonMatrix& m) { return principal_eigenvector(m.entries()); }

double consistency_ratio(const ComparisonMatrix& m) {
  if (m.size() <= 2) return 0.0;
  return consistency_ratio_from(priority_vector(m).lambda_max, m.size());
}

std::optional<Triad> most_inconsistent_triad(const ComparisonMatrix& m) {
  const std::size_t n = m.size();
  std::optional<Triad> worst;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        double dev = std::abs(std::log(m(i, j) * m(j, k) / m(i, k)));
        if (!worst || dev > worst->deviation) worst = Triad{i, j, k, dev};
      }
  return worst;
}

}  // namespace actgraph::coa
