#include "actgraph/coa/ranking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "actgraph/csv.hpp"

namespace actgraph::coa {

using nlohmann::json;

namespace {

constexpr double kSumTolerance = 1e-6;

std::string parent_of(const SiblingSet& s, const Hierarchy& h) {
  switch (s.level) {
    case Level::Process: return h.root;
    case Level::Group: return s.process;
    case Level::Resource: return s.process + "/" + s.group;
  }
  return {};
}

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const Eigen::VectorXd& weights_for(const WeightTable& weights, const SiblingSet& set, std::size_t expected) {
  auto it = weights.find(set);
  if (it == weights.end()) throw RankingError("missing weight vector for sibling set " + to_string(set));
  if (static_cast<std::size_t>(it->second.size()) != expected)
    throw RankingError("weight vector for " + to_string(set) + " has " + std::to_string(it->second.size()) +
                       " entries, expected " + std::to_string(expected));
  if (std::abs(it->second.sum() - 1.0) > kSumTolerance)
    throw RankingError("weight vector for " + to_string(set) + " does not sum to 1");
  return it->second;
}

}  // namespace

std::string_view to_string(CiaContext context) {
  switch (context) {
    case CiaContext::Confidentiality: return "confidentiality";
    case CiaContext::Integrity: return "integrity";
    case CiaContext::Availability: return "availability";
  }
  return "?";
}

std::optional<CiaContext> cia_context_from_string(std::string_view text) {
  for (auto c : {CiaContext::Confidentiality, CiaContext::Integrity, CiaContext::Availability})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

std::vector<Question> questionnaire(const Hierarchy& h) {
  std::vector<Question> out;
  for (const auto& sg : sibling_sets(h)) {
    for (std::size_t i = 0; i < sg.labels.size(); ++i)
      for (std::size_t j = i + 1; j < sg.labels.size(); ++j) {
        char id[16];
        std::snprintf(id, sizeof id, "q%03zu", out.size() + 1);
        out.push_back({id, sg.set, i, j, sg.labels[i], sg.labels[j]});
      }
  }
  return out;
}

std::string questionnaire_document(const Hierarchy& h, CiaContext context) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["context"] = to_string(context);
  doc["scale"] = "1 = left most critical, 5 = equal, 9 = right most critical";
  doc["questions"] = nlohmann::ordered_json::array();
  for (const auto& q : questionnaire(h)) {
    doc["questions"].push_back({{"id", q.id},
                                {"level", to_string(q.set.level)},
                                {"parent", parent_of(q.set, h)},
                                {"set", to_string(q.set)},
                                {"left", q.left},
                                {"right", q.right}});
  }
  return doc.dump(2) + "\n";
}

ResponseSet ResponseSet::parse(std::string_view text) {
  ResponseSet r;
  try {
    json doc = json::parse(text);
    r.annotator = doc.at("annotator").get<std::string>();
    auto ctx = cia_context_from_string(doc.at("context").get<std::string>());
    if (!ctx) throw RankingError("unknown CIA context " + doc.at("context").get<std::string>());
    r.context = *ctx;
    r.answers = doc.at("responses").get<std::map<std::string, int>>();
  } catch (const json::exception& e) {
    throw RankingError(std::string("malformed response document: ") + e.what());
  }
  return r;
}

std::string ResponseSet::dump() const {
  nlohmann::ordered_json doc;
  doc["annotator"] = annotator;
  doc["context"] = to_string(context);
  doc["responses"] = answers;
  return doc.dump(2) + "\n";
}

std::vector<ResourceScore> propagate(const Hierarchy& h, const WeightTable& weights) {
  const auto& top = weights_for(weights, {Level::Process, {}, {}}, h.processes.size());
  std::vector<ResourceScore> out;
  for (std::size_t p = 0; p < h.processes.size(); ++p) {
    const auto& process = h.processes[p];
    const auto& group_w = weights_for(weights, {Level::Group, process.name, {}}, process.groups.size());
    for (std::size_t g = 0; g < process.groups.size(); ++g) {
      const auto& group = process.groups[g];
      const auto& res_w = weights_for(weights, {Level::Resource, process.name, group.cls}, group.members.size());
      for (std::size_t r = 0; r < group.members.size(); ++r) {
        const double score = top(static_cast<Eigen::Index>(p)) * group_w(static_cast<Eigen::Index>(g)) *
                             res_w(static_cast<Eigen::Index>(r));
        out.push_back({group.members[r], process.name, score});
      }
    }
  }
  return out;
}

bool RankingResult::valid() const {
  return std::all_of(checks.begin(), checks.end(), [](const MatrixCheck& c) { return c.consistent; });
}

double RankingResult::max_cr() const {
  double worst = 0;
  for (const auto& c : checks) worst = std::max(worst, c.cr);
  return worst;
}

std::map<SiblingSet, ComparisonMatrix> fill_matrices(const Hierarchy& h, const ResponseSet& responses) {
  std::map<SiblingSet, ComparisonMatrix> matrices;
  for (const auto& sg : sibling_sets(h)) matrices.emplace(sg.set, ComparisonMatrix(sg.labels));

  std::set<std::string> used;
  for (const auto& q : questionnaire(h)) {
    auto it = responses.answers.find(q.id);
    if (it == responses.answers.end()) throw RankingError("question " + q.id + " is unanswered");
    double ratio;
    try {
      ratio = response_to_ratio(it->second);
    } catch (const std::invalid_argument& e) {
      throw RankingError("question " + q.id + ": " + e.what());
    }
    matrices.at(q.set).set_judgment(q.left_index, q.right_index, ratio);
    used.insert(q.id);
  }
  for (const auto& [id, value] : responses.answers)
    if (!used.count(id)) throw RankingError("response to unknown question " + id);
  return matrices;
}

RankingResult rank(const Hierarchy& h, const ResponseSet& responses) {
  RankingResult result;
  result.context = responses.context;
  result.annotator = responses.annotator;
  auto matrices = fill_matrices(h, responses);
  for (const auto& sg : sibling_sets(h)) {
    const auto& m = matrices.at(sg.set);
    MatrixCheck check;
    check.set = sg.set;
    check.labels = sg.labels;
    if (m.size() == 1) {
      result.weights[sg.set] = Eigen::VectorXd::Ones(1);
    } else {
      auto pr = priority_vector(m);
      result.weights[sg.set] = pr.weights;
      try {
        check.cr = consistency_ratio_from(pr.lambda_max, m.size());
      } catch (const std::invalid_argument& e) {
        throw RankingError("sibling set " + to_string(sg.set) + ": " + e.what());
      }
      check.consistent = check.cr < kConsistencyThreshold;
      if (!check.consistent) check.worst_triad = most_inconsistent_triad(m);
    }
    result.checks.push_back(std::move(check));
  }
  result.scores = propagate(h, result.weights);
  return result;
}

RankingResult aggregate(const Hierarchy& h, std::span<const RankingResult> results) {
  if (results.empty()) throw RankingError("nothing to aggregate");
  const CiaContext context = results.front().context;
  for (const auto& r : results) {
    if (r.context != context) throw RankingError("annotator " + r.annotator + " ranked a different CIA context");
    for (const auto& c : r.checks)
      if (!c.consistent)
        throw RankingError("annotator " + r.annotator + " has CR " + shortest(c.cr) + " >= 0.1 in " + to_string(c.set));
  }

  RankingResult consensus;
  consensus.context = context;
  consensus.annotator = "consensus";
  for (const auto& sg : sibling_sets(h)) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sg.labels.size()));
    for (const auto& r : results) sum += weights_for(r.weights, sg.set, sg.labels.size());
    consensus.weights[sg.set] = sum / sum.sum();
  }
  consensus.scores = propagate(h, consensus.weights);
  return consensus;
}

std::optional<AgreementReport> agreement(std::span<const RankingResult> results) {
  if (results.size() < 2 || results.front().scores.size() < 2) return std::nullopt;
  std::vector<std::map<std::string, double>> rows;
  for (const auto& r : results) {
    auto& row = rows.emplace_back();
    for (const auto& s : r.scores) row[to_string(s.key)] = s.score;
  }
  return kendall_w(rows);
}

std::string feedback_document(const RankingResult& result) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["annotator"] = result.annotator;
  doc["context"] = to_string(result.context);
  doc["valid"] = result.valid();
  doc["max_cr"] = result.max_cr();
  doc["matrices"] = nlohmann::ordered_json::array();
  for (const auto& c : result.checks) {
    nlohmann::ordered_json m;
    m["set"] = to_string(c.set);
    m["cr"] = c.cr;
    m["consistent"] = c.consistent;
    if (c.worst_triad) {
      m["worst_triad"] = {{"elements", {c.labels[c.worst_triad->i], c.labels[c.worst_triad->j], c.labels[c.worst_triad->k]}},
                          {"deviation", c.worst_triad->deviation}};
    }
    doc["matrices"].push_back(std::move(m));
  }
  return doc.dump(2) + "\n";
}

void write_ranking_csv(std::ostream& out, const RankingResult& result) {
  csv::write_record(out, {"name", "class", "process", "context", "score"});
  for (const auto& s : result.scores)
    csv::write_record(out, {s.key.name, s.key.cls, s.process, std::string(to_string(result.context)), shortest(s.score)});
}

}  // namespace actgraph::coa
