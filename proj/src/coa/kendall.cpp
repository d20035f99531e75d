#include "actgraph/coa/kendall.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace actgraph::coa {

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  const Eigen::Index n = scores.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores(a) < scores(b); });

  Eigen::VectorXd ranks(n);
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && scores(order[static_cast<std::size_t>(end)]) == scores(order[static_cast<std::size_t>(start)]))
      ++end;
    // Positions start..end-1 hold ranks start+1..end.
    const double mean = 0.5 * static_cast<double>(start + 1 + end);
    for (Eigen::Index k = start; k < end; ++k) ranks(order[static_cast<std::size_t>(k)]) = mean;
    start = end;
  }
  return ranks;
}

namespace {

double tie_term(const Eigen::VectorXd& ranks) {
  std::vector<double> sorted(ranks.data(), ranks.data() + ranks.size());
  std::sort(sorted.begin(), sorted.end());
  double total = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}

}  // namespace

AgreementReport kendall_w(const Eigen::Ref<const Eigen::MatrixXd>& scores) {
  const Eigen::Index m = scores.rows();
  const Eigen::Index n = scores.cols();
  if (m < 2 || n < 2) throw std::invalid_argument("Kendall's W needs at least 2 annotators and 2 items");

  Eigen::MatrixXd ranks(m, n);
  double ties = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    ranks.row(i) = average_ranks(scores.row(i).transpose()).transpose();
    ties += tie_term(ranks.row(i).transpose());
  }

  AgreementReport report;
  report.annotators = static_cast<std::size_t>(m);
  report.items = static_cast<std::size_t>(n);

  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  const Eigen::VectorXd rank_sums = ranks.colwise().sum().transpose();
  const double s = (rank_sums.array() - rank_sums.mean()).square().sum();
  const double denom = md * md * (nd * nd * nd - nd) - md * ties;
  if (denom <= 0) {
    // Every annotator tied every item: the rankings coincide.
    report.kendall_w = 1.0;
  } else {
    report.kendall_w = std::clamp(12.0 * s / denom, 0.0, 1.0);
  }
  report.verdict = report.kendall_w > kStrongAgreement ? Verdict::Strong : Verdict::Weak;
  return report;
}

AgreementReport kendall_w(std::span<const std::map<std::string, double>> annotator_scores) {
  if (annotator_scores.size() < 2) throw std::invalid_argument("Kendall's W needs at least 2 annotators");
  const auto& first = annotator_scores.front();
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(annotator_scores.size()), static_cast<Eigen::Index>(first.size()));
  for (std::size_t a = 0; a < annotator_scores.size(); ++a) {
    const auto& row = annotator_scores[a];
    if (row.size() != first.size() ||
        !std::equal(row.begin(), row.end(), first.begin(), [](const auto& x, const auto& y) { return x.first == y.first; }))
      throw std::invalid_argument("annotator " + std::to_string(a) + " scored a different item set");
    Eigen::Index j = 0;
    for (const auto& [item, score] : row) scores(static_cast<Eigen::Index>(a), j++) = score;
  }
  return kendall_w(scores);
}

}  // namespace actgraph::coa
