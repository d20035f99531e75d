// actgraph: ingest audit logs, build and query the activity graph, simulate
// the Airline Booking workload, run the criticality ranking, serve HTTP.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "actgraph/builder.hpp"
#include "actgraph/coa/hierarchy.hpp"
#include "actgraph/coa/ranking.hpp"
#include "actgraph/graph_store.hpp"
#include "actgraph/ingest.hpp"
#include "actgraph/payload.hpp"
#include "actgraph/service.hpp"
#include "actgraph/simulator.hpp"

namespace fs = std::filesystem;
using namespace actgraph;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

InputFormat format_for(const std::string& name, const fs::path& file) {
  if (!name.empty()) {
    auto f = input_format_from_string(name);
    if (!f) throw UsageError("unknown format '" + name + "' (json-lines, csv)");
    return *f;
  }
  return file.extension() == ".csv" ? InputFormat::Csv : InputFormat::JsonLines;
}

std::optional<Timestamp> time_option(const std::string& text, const char* flag) {
  if (text.empty()) return std::nullopt;
  auto ts = parse_iso8601(text);
  if (!ts) throw UsageError(std::string(flag) + " is not an ISO-8601 date-time: " + text);
  return ts;
}

Catalog catalog_from(const std::string& path) { return path.empty() ? Catalog::builtin() : Catalog::load(path); }

struct Common {
  std::string graph;
  std::string catalog;
  std::string from;
  std::string to;
  std::string format;
  std::string out;
  std::vector<std::string> nodes;
};

// Runs a read endpoint in-process so CLI output equals the HTTP payload.
int run_endpoint(const Common& c, const std::string& route, std::multimap<std::string, std::string> params) {
  if (c.graph.empty()) throw UsageError("--graph is required");
  Service service(ServiceConfig{}, ActivityGraph::load(c.graph), catalog_from(c.catalog));
  if (!c.from.empty()) params.emplace("from", c.from);
  if (!c.to.empty()) params.emplace("to", c.to);
  for (const auto& n : c.nodes) params.emplace("node", n);
  auto res = service.handle({"GET", "/api/v1/" + route, std::move(params), {}});
  if (res.status != 200) {
    std::cerr << "error: " << nlohmann::json::parse(res.body).value("error", res.body) << "\n";
    return res.status == 400 ? 1 : 2;
  }
  emit(res.body, c.out);
  return 0;
}

coa::Hierarchy hierarchy_from(const std::string& hierarchy, const std::string& assignment, const Common& c) {
  if (!hierarchy.empty()) return coa::Hierarchy::parse(read_file(hierarchy));
  if (assignment.empty() || c.graph.empty())
    throw UsageError("give --hierarchy, or --assignment together with --graph");
  return coa::build_hierarchy(ActivityGraph::load(c.graph), catalog_from(c.catalog),
                              coa::ProcessAssignment::parse(read_file(assignment)));
}

std::atomic<bool> g_stop{false};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activity knowledge graphs from serverless audit logs"};
  app.require_subcommand(1);
  Common c;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse a log file and report what was accepted");
  std::string input, out_format;
  ingest->add_option("input", input, "Log file")->required();
  ingest->add_option("--format", c.format, "Input format: json-lines or csv (default by extension)");
  ingest->add_option("--out", c.out, "Write normalized events here");
  ingest->add_option("--out-format", out_format, "Format of --out (default json-lines)");

  // build
  auto* build = app.add_subcommand("build", "Add log files to a graph file (created if missing)");
  std::vector<std::string> inputs;
  std::string owner;
  build->add_option("input", inputs, "Log files")->required();
  build->add_option("--graph", c.graph, "Graph file")->required();
  build->add_option("--catalog", c.catalog, "Ontology catalog JSON (builtin when omitted)");
  build->add_option("--format", c.format, "Input format: json-lines or csv (default by extension)");
  build->add_option("--owner", owner, "Account owner; adds has_owner context edges");

  // query
  auto* query = app.add_subcommand("query", "Query a graph file; prints the endpoint payload");
  std::string kind, id, source, target, export_format;
  std::vector<std::string> classes;
  std::size_t offset = 0, limit = 500;
  query->add_option("kind", kind, "graph, node, request, distribution, edge-weight, neighbors, events, status, export")
      ->required()
      ->check(CLI::IsMember({"graph", "node", "request", "distribution", "edge-weight", "neighbors", "events",
                             "status", "export"}));
  query->add_option("--graph", c.graph, "Graph file")->required();
  query->add_option("--catalog", c.catalog, "Ontology catalog JSON");
  query->add_option("--from", c.from, "Window start, ISO-8601 (inclusive)");
  query->add_option("--to", c.to, "Window end, ISO-8601 (exclusive)");
  query->add_option("--node", c.nodes, "Node as Class:name or unique name (repeatable)");
  query->add_option("--class", classes, "Class filter for 'graph' (repeatable)");
  query->add_option("--id", id, "Request id for 'request'");
  query->add_option("--source", source, "Source node for 'edge-weight'");
  query->add_option("--target", target, "Target node for 'edge-weight'");
  query->add_option("--offset", offset, "First event for 'events'");
  query->add_option("--limit", limit, "Page size for 'events'");
  query->add_option("--format", export_format, "Export format: edge-list or graph-script");
  query->add_option("--out", c.out, "Output file (stdout when omitted)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate labeled Airline Booking activity");
  sim::ScenarioConfig scenario;
  std::string attack = "none", labels_out, start;
  double hours = 24;
  std::size_t max_events = 0;
  simulate->add_option("--seed", scenario.seed, "Generator seed");
  simulate->add_option("--attack", attack, "none, dow or leakage")->check(CLI::IsMember({"none", "dow", "leakage"}));
  simulate->add_option("--events", max_events, "Stop after this many events");
  simulate->add_option("--hours", hours, "Simulated duration in hours");
  simulate->add_option("--start", start, "First run start, ISO-8601");
  simulate->add_option("--anomaly-rate", scenario.anomaly_rate, "Share of runs turned into attacks");
  simulate->add_option("--burst", scenario.dow_burst_size, "Calls per DoW burst");
  simulate->add_option("--format", c.format, "Output format: json-lines or csv");
  simulate->add_option("--out", c.out, "Event log file (stdout when omitted)");
  simulate->add_option("--labels", labels_out, "Ground-truth labels CSV");

  // coa
  auto* coa_cmd = app.add_subcommand("coa", "Criticality-of-asset ranking");
  coa_cmd->require_subcommand(1);
  std::string hierarchy_path, assignment_path, context = "confidentiality";
  std::vector<std::string> responses;
  bool as_json = false;
  auto hierarchy_opts = [&](CLI::App* sub) {
    sub->add_option("--hierarchy", hierarchy_path, "Hierarchy JSON");
    sub->add_option("--assignment", assignment_path, "Process assignment JSON (with --graph)");
    sub->add_option("--graph", c.graph, "Graph file");
    sub->add_option("--catalog", c.catalog, "Ontology catalog JSON");
    sub->add_option("--out", c.out, "Output file (stdout when omitted)");
  };
  auto* coa_q = coa_cmd->add_subcommand("questionnaire", "Print the pairwise comparison questionnaire");
  hierarchy_opts(coa_q);
  coa_q->add_option("--context", context, "confidentiality, integrity or availability");
  auto* coa_submit = coa_cmd->add_subcommand("submit", "Check one annotator's answers (exit 2 when CR >= 0.1)");
  hierarchy_opts(coa_submit);
  coa_submit->add_option("responses", responses, "Response JSON")->required()->expected(1);
  auto* coa_rank = coa_cmd->add_subcommand("rank", "Aggregate annotators into a consensus ranking");
  hierarchy_opts(coa_rank);
  coa_rank->add_option("responses", responses, "Response JSON files")->required();
  coa_rank->add_flag("--json", as_json, "Print the ranking payload instead of CSV");
  std::string overlay_graph;
  coa_rank->add_option("--write-overlay", overlay_graph, "Store scores as criticality on this graph file");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  ServiceConfig service_config;
  std::string graph_opt, catalog_opt, hier_opt, assign_opt;
  serve->add_option("--graph", graph_opt, "Graph file, loaded at startup and saved on shutdown");
  serve->add_option("--catalog", catalog_opt, "Ontology catalog JSON");
  serve->add_option("--hierarchy", hier_opt, "Hierarchy JSON for the CoA endpoints");
  serve->add_option("--assignment", assign_opt, "Process assignment JSON for the CoA endpoints");
  serve->add_option("--host", service_config.host, "Bind address");
  serve->add_option("--port", service_config.port, "Port (0 for any)");
  serve->add_option("--owner", owner, "Account owner for ingested events");

  auto* catalog_cmd = app.add_subcommand("catalog", "Print the ontology catalog (builtin unless --catalog)");
  catalog_cmd->add_option("--catalog", c.catalog, "Catalog JSON to validate and print");
  catalog_cmd->add_option("--out", c.out, "Output file (stdout when omitted)");

  // report
  auto* report = app.add_subcommand("report", "Investigation report for a selection and window");
  report->add_option("--graph", c.graph, "Graph file")->required();
  report->add_option("--catalog", c.catalog, "Ontology catalog JSON");
  report->add_option("--from", c.from, "Window start, ISO-8601 (inclusive)");
  report->add_option("--to", c.to, "Window end, ISO-8601 (exclusive)");
  report->add_option("--node", c.nodes, "Selected node (repeatable; all nodes when omitted)");
  report->add_option("--out", c.out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*ingest) {
      auto result = load_file(input, format_for(c.format, input));
      auto events = correlate_invocations(std::move(result.events));
      if (!c.out.empty()) {
        std::ostringstream doc;
        auto of = format_for(out_format, c.out);
        if (of == InputFormat::Csv) write_csv(doc, events);
        else write_json_lines(doc, events);
        emit(doc.str(), c.out);
      }
      std::cout << payload::ingest(result.report, BuildStats{}).dump(2) << "\n";
      return 0;
    }

    if (*build) {
      const auto catalog = catalog_from(c.catalog);
      ActivityGraph graph = fs::exists(c.graph) ? ActivityGraph::load(c.graph) : ActivityGraph{};
      BuildOptions options;
      if (!owner.empty()) options.account_owner = owner;
      auto summary = payload::Json::array();
      for (const auto& file : inputs) {
        auto result = load_file(file, format_for(c.format, file));
        auto events = correlate_invocations(std::move(result.events));
        auto stats = build_graph(events, catalog, graph, options);
        auto j = payload::ingest(result.report, stats);
        j["file"] = file;
        summary.push_back(std::move(j));
      }
      graph.save(c.graph);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*query) {
      std::multimap<std::string, std::string> params;
      if (kind == "export") {
        auto f = export_format_from_string(export_format.empty() ? "edge-list" : export_format);
        if (!f) throw UsageError("unknown export format '" + export_format + "'");
        emit(ActivityGraph::load(c.graph).export_document(*f), c.out);
        return 0;
      }
      if (kind == "request") {
        if (id.empty()) throw UsageError("'request' needs --id");
        params.emplace("id", id);
      }
      if (kind == "edge-weight") {
        if (source.empty() || target.empty()) throw UsageError("'edge-weight' needs --source and --target");
        params.emplace("source", source);
        params.emplace("target", target);
      }
      if (kind == "node") {
        if (c.nodes.size() != 1) throw UsageError("'node' needs exactly one --node");
        params.emplace("key", c.nodes.front());
        Common one = c;
        one.nodes.clear();
        return run_endpoint(one, kind, std::move(params));
      }
      if (kind == "neighbors" && c.nodes.size() != 1) throw UsageError("'neighbors' needs exactly one --node");
      if (kind == "events") {
        params.emplace("offset", std::to_string(offset));
        params.emplace("limit", std::to_string(limit));
      }
      for (const auto& cls : classes) params.emplace("class", cls);
      return run_endpoint(c, kind, std::move(params));
    }

    if (*simulate) {
      auto a = sim::attack_from_string(attack);
      scenario.attack = *a;
      if (max_events) scenario.max_events = max_events;
      if (auto ts = time_option(start, "--start")) scenario.start = *ts;
      if (!(hours > 0)) throw UsageError("--hours must be positive");
      scenario.duration = std::chrono::seconds{static_cast<long long>(hours * 3600)};
      scenario.format = format_for(c.format, c.out);
      try {
        scenario.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      auto run = sim::simulate(scenario);
      emit(run.events_document, c.out);
      if (!labels_out.empty()) emit(run.labels_document, labels_out);
      std::cerr << run.events.size() << " events, " << run.flows.size() << " runs\n";
      return 0;
    }

    if (*coa_q) {
      auto ctx = coa::cia_context_from_string(context);
      if (!ctx) throw UsageError("unknown context '" + context + "'");
      emit(coa::questionnaire_document(hierarchy_from(hierarchy_path, assignment_path, c), *ctx), c.out);
      return 0;
    }

    if (*coa_submit) {
      const auto h = hierarchy_from(hierarchy_path, assignment_path, c);
      auto result = coa::rank(h, coa::ResponseSet::parse(read_file(responses.front())));
      emit(coa::feedback_document(result), c.out);
      return result.valid() ? 0 : 2;
    }

    if (*coa_rank) {
      const auto h = hierarchy_from(hierarchy_path, assignment_path, c);
      std::vector<coa::RankingResult> results;
      std::vector<std::string> annotators;
      for (const auto& file : responses) {
        results.push_back(coa::rank(h, coa::ResponseSet::parse(read_file(file))));
        annotators.push_back(results.back().annotator);
      }
      auto consensus = coa::aggregate(h, results);
      if (as_json) {
        emit(payload::ranking(consensus, annotators, coa::agreement(results)).dump(2) + "\n", c.out);
      } else {
        std::ostringstream doc;
        coa::write_ranking_csv(doc, consensus);
        emit(doc.str(), c.out);
        if (auto w = coa::agreement(results))
          std::cerr << "Kendall's W " << w->kendall_w << " ("
                    << (w->verdict == coa::Verdict::Strong ? "strong" : "weak") << " agreement)\n";
      }
      if (!overlay_graph.empty()) {
        auto graph = ActivityGraph::load(overlay_graph);
        for (const auto& s : consensus.scores)
          if (graph.node(s.key)) graph.set_criticality(s.key, std::string(coa::to_string(consensus.context)), s.score);
        graph.save(overlay_graph);
      }
      return 0;
    }

    if (*serve) {
      if (!graph_opt.empty()) service_config.graph_path = graph_opt;
      if (!catalog_opt.empty()) service_config.catalog_path = catalog_opt;
      if (!hier_opt.empty()) service_config.hierarchy_path = hier_opt;
      if (!assign_opt.empty()) service_config.assignment_path = assign_opt;
      if (!owner.empty()) service_config.build.account_owner = owner;
      Service service(service_config);
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      const int port = service.start();
      std::cerr << "listening on " << service_config.host << ":" << port << "\n";
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      service.stop();
      return 0;
    }

    if (*report) return run_endpoint(c, "report", {});

    if (*catalog_cmd) {
      emit(catalog_from(c.catalog).dump(), c.out);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
