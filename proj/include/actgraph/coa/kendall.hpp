#pragma once

#include <map>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace actgraph::coa {

inline constexpr double kStrongAgreement = 0.6;

enum class Verdict { Weak, Strong };

struct AgreementReport {
  double kendall_w = 0;
  std::size_t annotators = 0;
  std::size_t items = 0;
  Verdict verdict = Verdict::Weak;
};

// Average ranks (1-based, ascending) of one row; ties share the mean rank.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& scores);

// Kendall's coefficient of concordance with the tie correction
//   W = 12 S / (m^2 (n^3 - n) - m sum_j T_j),  T_j = sum over tie groups (t^3 - t)
// over an m x n matrix of scores (one row per annotator). Throws
// std::invalid_argument for m < 2 or n < 2.
AgreementReport kendall_w(const Eigen::Ref<const Eigen::MatrixXd>& scores);

// Same, keyed by item name; every annotator must score the same item set.
AgreementReport kendall_w(std::span<const std::map<std::string, double>> annotator_scores);

}  // namespace actgraph::coa
