// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "actgraph/builder.hpp"
#include "actgraph/coa/ahp.hpp"
#include "actgraph/coa/hierarchy.hpp"
#include "actgraph/coa/kendall.hpp"
#include "actgraph/coa/ranking.hpp"
#include "actgraph/graph_store.hpp"
#include "actgraph/ingest.hpp"
#include "actgraph/simulator.hpp"
#include "support.hpp"

using namespace actgraph;
using namespace actgraph::coa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double limit_ms, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_ms <= 0 || ms < limit_ms;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %-28s %s [%.0f ms", pass ? "PASS" : "FAIL", name, o.detail.c_str(), ms);
  if (limit_ms > 0) std::printf(", limit %.0f ms", limit_ms);
  std::printf("]\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

Hierarchy example_hierarchy() { return Hierarchy::parse(testing::slurp(testing::fixture("example_hierarchy.json"))); }

Outcome worked_example_ranks() {
  const WeightTable w{
      {{Level::Process, "", ""}, vec({0.7, 0.15, 0.15})},
      {{Level::Group, "B1", ""}, vec({0.6, 0.4})},
      {{Level::Group, "B2", ""}, vec({0.1, 0.9})},
      {{Level::Group, "B3", ""}, vec({0.5, 0.5})},
      {{Level::Resource, "B1", "Compute"}, vec({0.6, 0.2, 0.2})},
      {{Level::Resource, "B1", "Storage"}, vec({0.8, 0.2})},
      {{Level::Resource, "B2", "Compute"}, vec({0.4, 0.4, 0.2})},
      {{Level::Resource, "B2", "Storage"}, vec({0.7, 0.3})},
      {{Level::Resource, "B3", "Compute"}, vec({0.8, 0.2})},
      {{Level::Resource, "B3", "Storage"}, vec({0.4, 0.3, 0.3})},
  };
  const std::map<std::string, double> expect{
      {"L1", 0.252}, {"L2", 0.084}, {"L3", 0.084}, {"S1", 0.224}, {"S2", 0.056},
      {"L4", 0.006}, {"L5", 0.006}, {"L6", 0.003}, {"S3", 0.0945}, {"S4", 0.0405},
      {"L7", 0.06},  {"L8", 0.015}, {"S5", 0.03},  {"S6", 0.0225}, {"S7", 0.0225}};
  auto scores = propagate(example_hierarchy(), w);
  double worst = 0;
  std::size_t matched = 0;
  for (const auto& s : scores) {
    auto it = expect.find(s.key.name);
    if (it == expect.end()) return {false, "unexpected resource " + s.key.name};
    worst = std::max(worst, std::abs(s.score - it->second));
    ++matched;
  }
  return {matched == 15 && worst <= 1e-9, std::to_string(matched) + "/15 ranks, max |err| " + fmt("%.2e", worst) + " (tol 1e-9)"};
}

// Counts pairs directly: every resource pair for the naive scheme, every
// sibling pair at each level for the hierarchical one.
std::pair<std::size_t, std::size_t> enumerate_pairs(const Hierarchy& h) {
  std::vector<NodeKey> all;
  std::size_t ahp = 0;
  auto pairs_of = [](std::size_t n) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) ++c;
    return c;
  };
  ahp += pairs_of(h.processes.size());
  for (const auto& p : h.processes) {
    ahp += pairs_of(p.groups.size());
    for (const auto& g : p.groups) {
      ahp += pairs_of(g.members.size());
      all.insert(all.end(), g.members.begin(), g.members.end());
    }
  }
  return {pairs_of(all.size()), ahp};
}

Outcome comparison_counts() {
  auto c = comparison_count(example_hierarchy());
  if (c.naive != 105 || c.ahp != 18)
    return {false, "table hierarchy gave naive " + std::to_string(c.naive) + ", ahp " + std::to_string(c.ahp)};

  static const char* classes[] = {"Compute", "Storage", "ApplicationIntegration", "CSPService"};
  std::mt19937_64 rng(11);
  std::size_t strict_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Hierarchy h;
    h.root = "random";
    int id = 0;
    const std::size_t processes = 1 + rng() % 4;
    for (std::size_t p = 0; p < processes; ++p) {
      BusinessProcess bp{"P" + std::to_string(p), {}};
      const std::size_t groups = 1 + rng() % 4;
      for (std::size_t g = 0; g < groups; ++g) {
        ResourceGroup rg{classes[g], {}};
        const std::size_t members = 1 + rng() % 6;
        for (std::size_t m = 0; m < members; ++m) rg.members.push_back({"r" + std::to_string(id++), classes[g]});
        bp.groups.push_back(std::move(rg));
      }
      h.processes.push_back(std::move(bp));
    }
    h.validate();
    auto got = comparison_count(h);
    auto [naive, ahp] = enumerate_pairs(h);
    if (got.naive != naive || got.ahp != ahp) return {false, "count mismatch on trial " + std::to_string(trial)};
    if (got.ahp > got.naive) return {false, "c_ahp > c_naive on trial " + std::to_string(trial)};
    std::size_t sets_with_pairs = processes >= 2;
    for (const auto& p : h.processes) {
      sets_with_pairs += p.groups.size() >= 2;
      for (const auto& g : p.groups) sets_with_pairs += g.members.size() >= 2;
    }
    const bool strict = sets_with_pairs > 1;
    if (strict != (got.ahp < got.naive))
      return {false, "strictness disagrees with the sibling-set condition on trial " + std::to_string(trial)};
    strict_cases += strict;
  }
  return {true, "naive 105, ahp 18; 1000 random hierarchies (" + std::to_string(strict_cases) + " strict)"};
}

Outcome cr_gate() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 10);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = u(rng);
    auto m = ComparisonMatrix::from_weights(labels(static_cast<std::size_t>(n)), w / w.sum());
    worst = std::max(worst, consistency_ratio(m));
  }
  ComparisonMatrix cyclic(labels(3));
  cyclic.set_judgment(0, 1, 9);
  cyclic.set_judgment(1, 2, 9);
  cyclic.set_judgment(2, 0, 9);
  const double cr = consistency_ratio(cyclic);
  return {worst < 1e-6 && cr > 0.1,
          "max consistent CR " + fmt("%.2e", worst) + " (< 1e-6), cyclic CR " + fmt("%.3f", cr) + " (> 0.1)"};
}

Outcome priority_recovery() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 10);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = u(rng);
    w /= w.sum();
    auto p = priority_vector(ComparisonMatrix::from_weights(labels(static_cast<std::size_t>(n)), w));
    worst = std::max(worst, (p.weights - w).cwiseAbs().maxCoeff());
  }
  double worst2 = 0;
  for (double a : {1.0, 2.0, 3.0, 5.0, 7.0, 9.0, 1.0 / 3, 1.0 / 9, 4.5}) {
    ComparisonMatrix m(labels(2));
    m.set_judgment(0, 1, a);
    auto p = priority_vector(m);
    worst2 = std::max({worst2, std::abs(p.weights(0) - a / (1 + a)), std::abs(p.weights(1) - 1 / (1 + a))});
  }
  return {worst <= 1e-9 && worst2 <= 1e-15,
          "max weight error " + fmt("%.2e", worst) + " (tol 1e-9), 2x2 error " + fmt("%.1e", worst2) + " (tol 1e-15)"};
}

// Rank-sum definition evaluated by counting, independent of the library.
double brute_force_w(const std::vector<std::vector<double>>& rows) {
  const std::size_t m = rows.size(), n = rows[0].size();
  std::vector<double> sums(n, 0.0);
  double ties = 0;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < n; ++i) {
      double below = 0, same = 0;
      for (std::size_t j = 0; j < n; ++j) {
        below += row[j] < row[i];
        same += row[j] == row[i];
      }
      sums[i] += below + (same + 1) / 2;
    }
    std::map<double, double> groups;
    for (double x : row) ++groups[x];
    for (const auto& [_, t] : groups) ties += t * t * t - t;
  }
  double mean = 0;
  for (double s : sums) mean += s / static_cast<double>(n);
  double s = 0;
  for (double r : sums) s += (r - mean) * (r - mean);
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  return 12 * s / (md * md * (nd * nd * nd - nd) - md * ties);
}

Outcome kendall() {
  Eigen::MatrixXd same(3, 4);
  same << 1, 2, 3, 4, 1, 2, 3, 4, 0.1, 0.2, 0.3, 0.4;
  Eigen::MatrixXd reversed(2, 5);
  reversed << 1, 2, 3, 4, 5, 5, 4, 3, 2, 1;
  const double w_same = kendall_w(same).kendall_w;
  const double w_rev = kendall_w(reversed).kendall_w;
  std::mt19937_64 rng(19);
  double worst = 0;
  int fixtures = 0;
  while (fixtures < 200) {
    const std::size_t m = 2 + rng() % 6, n = 2 + rng() % 12;
    std::vector<std::vector<double>> rows(m, std::vector<double>(n));
    Eigen::MatrixXd mat(m, n);
    bool varied = false;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        rows[i][j] = mat(i, j) = static_cast<double>(rng() % (fixtures % 2 ? 1000 : 4));
        varied |= rows[i][j] != rows[i][0];
      }
    if (!varied) continue;
    worst = std::max(worst, std::abs(kendall_w(mat).kendall_w - brute_force_w(rows)));
    ++fixtures;
  }
  const bool pass = std::abs(w_same - 1) <= 1e-12 && std::abs(w_rev) <= 1e-12 && worst <= 1e-9;
  return {pass, "identical W " + fmt("%.6f", w_same) + ", reversed W " + fmt("%.6f", w_rev) +
                    ", 200 fixtures max |diff| " + fmt("%.2e", worst) + " (tol 1e-9)"};
}

Outcome mapping_golden() {
  auto g = testing::booking_pair_graph();
  auto v = g.snapshot();
  std::set<std::string> nodes;
  for (const auto& n : v.nodes) nodes.insert(n.key.name);
  std::multiset<std::string> implicit;
  for (const auto& e : v.edges)
    if (!e.is_explicit()) implicit.insert(std::string(to_string(e.relation.kind)));
  const std::set<std::string> want_nodes{"Airline-Booking-flow", "ConfirmBooking", "ReserveBooking", "ConfirmBookingRole",
                                         "BookingTable"};
  const std::multiset<std::string> want_implicit{"has_invoke", "has_assumed", "has_policy", "has_write"};
  const bool pass = nodes == want_nodes && v.explicit_count() == 2 && implicit == want_implicit;
  return {pass, std::to_string(nodes.size()) + " nodes, " + std::to_string(v.explicit_count()) + " explicit, " +
                    std::to_string(implicit.size()) + " implicit edges"};
}

Outcome conservation() {
  sim::ScenarioConfig cfg;
  cfg.seed = 42;
  cfg.max_events = 10000;
  cfg.duration = std::chrono::hours{24 * 30};
  auto run = sim::simulate(cfg);
  if (run.events.size() != 10000) return {false, "simulator emitted " + std::to_string(run.events.size())};
  std::istringstream in(run.events_document);
  auto loaded = load_stream(in, InputFormat::JsonLines);
  if (loaded.report.parsed != 10000 || loaded.report.skipped != 0)
    return {false, "parsed " + std::to_string(loaded.report.parsed) + " of 10000"};
  ActivityGraph g;
  build_graph(correlate_invocations(std::move(loaded.events)), Catalog::builtin(), g);
  if (g.explicit_edge_count() != 10000) return {false, "explicit edges " + std::to_string(g.explicit_edge_count())};

  auto all = g.snapshot();
  const Timestamp t0 = all.edges.front().timestamp.value();
  std::mt19937_64 rng(23);
  std::size_t checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<NodeKey> sel;
    for (const auto& n : all.nodes)
      if (rng() % 5 == 0) sel.push_back(n.key);
    if (sel.empty()) sel.push_back(all.nodes[rng() % all.nodes.size()].key);
    const TimeWindow w{t0 + std::chrono::minutes{rng() % 600}, t0 + std::chrono::minutes{600 + rng() % 2000}};
    const std::set<NodeKey> chosen(sel.begin(), sel.end());
    std::size_t touching = 0;
    for (const auto& e : all.edges)
      if (e.is_explicit() && w.contains(*e.timestamp) && (chosen.count(e.source) || chosen.count(e.target))) ++touching;
    auto d = g.event_distribution(sel, w);
    std::size_t summed = 0;
    for (const auto& [_, c] : d.counts) summed += c;
    if (summed != d.edge_count || d.edge_count != touching)
      return {false, "distribution sum " + std::to_string(summed) + " vs selection edges " + std::to_string(touching)};
    ++checks;
  }
  return {true, "10000 emitted, 10000 parsed, 10000 explicit edges; " + std::to_string(checks) + " selections conserved"};
}

std::size_t weight_between(const ActivityGraph& g, const char* a, const char* b, TimeWindow w) {
  return g.edge_weight({a, "Compute"}, {b, "Storage"}, w);
}

Outcome dow_signal() {
  sim::ScenarioConfig cfg;
  cfg.attack = sim::AttackKind::DoW;
  auto run = sim::simulate(cfg);
  ActivityGraph g;
  build_graph(run.events, Catalog::builtin(), g);

  std::string flow;
  Timestamp first{}, last{};
  std::vector<TimeWindow> attacked;
  std::map<std::string, std::pair<Timestamp, Timestamp>> attacked_flows;
  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    if (!run.labels[i].attack) continue;
    auto [it, fresh] = attacked_flows.try_emplace(run.labels[i].flow_instance, run.events[i].timestamp,
                                                  run.events[i].timestamp);
    if (!fresh) it->second.second = run.events[i].timestamp;
  }
  if (attacked_flows.empty()) return {false, "no attacked run with default parameters"};
  for (const auto& [id, span] : attacked_flows) {
    if (flow.empty() || span.first < first) {
      flow = id;
      first = span.first;
      last = span.second;
    }
  }
  const TimeWindow burst{first, last + std::chrono::milliseconds{1}};
  const std::size_t burst_weight = weight_between(g, sim::names::kReserveBooking, sim::names::kBookingTable, burst);

  // Tile the day with windows of the burst's length; skip any that overlaps an attacked run.
  const auto length = burst.to - burst.from;
  std::size_t benign_max = 0, benign_windows = 0;
  for (Timestamp t = cfg.start; t + length <= cfg.start + cfg.duration; t += length) {
    const TimeWindow w{t, t + length};
    bool overlaps = false;
    for (const auto& [_, span] : attacked_flows)
      overlaps |= span.first < w.to && w.from <= span.second;
    if (overlaps) continue;
    benign_max = std::max(benign_max, weight_between(g, sim::names::kReserveBooking, sim::names::kBookingTable, w));
    ++benign_windows;
  }
  const double ratio = static_cast<double>(burst_weight) / static_cast<double>(std::max<std::size_t>(benign_max, 1));
  return {burst_weight >= 10 * std::max<std::size_t>(benign_max, 1),
          "burst weight " + std::to_string(burst_weight) + " vs benign max " + std::to_string(benign_max) + " over " +
              std::to_string(benign_windows) + " windows (ratio " + fmt("%.0f", ratio) + ", need >= 10)"};
}

Outcome leakage_signal() {
  sim::ScenarioConfig cfg;
  cfg.attack = sim::AttackKind::Leakage;
  auto run = sim::simulate(cfg);
  ActivityGraph g;
  build_graph(run.events, Catalog::builtin(), g);
  // Benign prefix [start, s) against the equally long window opened by the
  // first leaked upload s.
  std::optional<Timestamp> s;
  for (std::size_t i = 0; i < run.labels.size() && !s; ++i)
    if (run.labels[i].attack) s = run.events[i].timestamp;
  if (!s) return {false, "no leakage event with default parameters"};
  const auto span = *s - cfg.start;
  const NodeKey fn{sim::names::kConfirmBooking, "Compute"};
  auto before = g.neighbors(fn, {*s - span, *s});
  auto during = g.neighbors(fn, {*s, *s + span});
  std::vector<NodeKey> added, removed;
  std::set_difference(during.begin(), during.end(), before.begin(), before.end(), std::back_inserter(added));
  std::set_difference(before.begin(), before.end(), during.begin(), during.end(), std::back_inserter(removed));
  const NodeKey bucket{sim::names::kPublicBucket, "Storage"};
  const bool pass = removed.empty() && added == std::vector<NodeKey>{bucket};
  std::string diff;
  for (const auto& k : added) diff += " +" + to_string(k);
  for (const auto& k : removed) diff += " -" + to_string(k);
  const auto minutes = std::chrono::duration_cast<std::chrono::minutes>(span).count();
  return {pass, std::to_string(minutes) + " min windows, neighbors " + std::to_string(before.size()) + " -> " +
                    std::to_string(during.size()) + ", diff:" + diff};
}

Outcome determinism() {
  sim::ScenarioConfig cfg;
  cfg.attack = sim::AttackKind::DoW;
  cfg.duration = std::chrono::hours{6};
  auto a = sim::simulate(cfg), b = sim::simulate(cfg);
  if (a.events_document != b.events_document || a.labels_document != b.labels_document)
    return {false, "same seed gave different bytes"};

  ActivityGraph g;
  build_graph(a.events, Catalog::builtin(), g, BuildOptions{.account_owner = "123456789012"});
  const auto doc = g.export_document(ExportFormat::EdgeList);
  auto back = ActivityGraph::import_document(doc);
  const auto v1 = g.snapshot(), v2 = back.snapshot();
  if (v1.nodes != v2.nodes || v1.edges != v2.edges) return {false, "export/import changed the graph"};
  if (back.export_document(ExportFormat::EdgeList) != doc) return {false, "re-export differs"};

  cfg.format = InputFormat::Csv;
  auto c = sim::simulate(cfg);
  std::istringstream in(c.events_document);
  auto parsed = load_stream(in, InputFormat::Csv);
  std::ostringstream again;
  write_csv(again, parsed.events);
  if (parsed.events != c.events || again.str() != c.events_document) return {false, "CSV round trip differs"};
  return {true, std::to_string(a.events.size()) + " events identical; graph of " + std::to_string(v1.nodes.size()) +
                    " nodes/" + std::to_string(v1.edges.size()) + " edges isomorphic; CSV identity holds"};
}

}  // namespace

int main() {
  criterion("worked-example-ranks", 1000, worked_example_ranks);
  criterion("comparison-count", 5000, comparison_counts);
  criterion("cr-gate", 10000, cr_gate);
  criterion("priority-vector-recovery", 0, priority_recovery);
  criterion("kendall-w", 0, kendall);
  criterion("mapping-golden", 0, mapping_golden);
  criterion("end-to-end-conservation", 30000, conservation);
  criterion("dow-signal", 0, dow_signal);
  criterion("leakage-signal", 0, leakage_signal);
  criterion("determinism-round-trips", 0, determinism);
  std::printf("%d failure(s)\n", failures);
  return failures;
}
