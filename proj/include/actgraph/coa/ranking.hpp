#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actgraph/coa/ahp.hpp"
#include "actgraph/coa/hierarchy.hpp"
#include "actgraph/coa/kendall.hpp"

namespace actgraph::coa {

class RankingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CiaContext { Confidentiality, Integrity, Availability };
std::string_view to_string(CiaContext context);
std::optional<CiaContext> cia_context_from_string(std::string_view text);

struct Question {
  std::string id;
  SiblingSet set;
  std::size_t left_index = 0;
  std::size_t right_index = 0;
  std::string left;
  std::string right;
};

// One question per sibling pair (i < j) at every level, in sibling_sets order.
std::vector<Question> questionnaire(const Hierarchy& h);
std::string questionnaire_document(const Hierarchy& h, CiaContext context);

struct ResponseSet {
  std::string annotator;
  CiaContext context = CiaContext::Confidentiality;
  std::map<std::string, int> answers;  // question id -> 1..9

  static ResponseSet parse(std::string_view json_text);
  std::string dump() const;
};

using WeightTable = std::map<SiblingSet, Eigen::VectorXd>;

struct ResourceScore {
  NodeKey key;
  std::string process;
  double score = 0;
};

// final(r) = w(process) * w(group | process) * w(r | group). Throws
// RankingError naming the sibling set when a vector is missing, has the
// wrong length, or does not sum to one.
std::vector<ResourceScore> propagate(const Hierarchy& h, const WeightTable& weights);

struct MatrixCheck {
  SiblingSet set;
  double cr = 0;
  bool consistent = true;
  std::optional<Triad> worst_triad;
  std::vector<std::string> labels;
};

struct RankingResult {
  CiaContext context = CiaContext::Confidentiality;
  std::string annotator;
  WeightTable weights;
  std::vector<MatrixCheck> checks;  // one per sibling set, sibling_sets order
  std::vector<ResourceScore> scores;

  bool valid() const;
  double max_cr() const;
};

// Builds the reciprocal matrices implied by the answers. Throws RankingError
// for unanswered or unknown questions.
std::map<SiblingSet, ComparisonMatrix> fill_matrices(const Hierarchy& h, const ResponseSet& responses);

RankingResult rank(const Hierarchy& h, const ResponseSet& responses);

// Mean of each sibling set's weights across annotators, renormalized, then
// propagated. Throws RankingError naming the annotator and sibling set of
// any input with CR >= 0.1, and for mixed contexts.
RankingResult aggregate(const Hierarchy& h, std::span<const RankingResult> results);

// Kendall's W over the annotators' final resource scores; nullopt for fewer
// than two annotators or fewer than two resources.
std::optional<AgreementReport> agreement(std::span<const RankingResult> results);

// Validation payload for one annotator submission.
std::string feedback_document(const RankingResult& result);

// name,class,process,context,score
void write_ranking_csv(std::ostream& out, const RankingResult& result);

}  // namespace actgraph::coa
