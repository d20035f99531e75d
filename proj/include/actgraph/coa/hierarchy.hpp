#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "actgraph/graph_types.hpp"
#include "actgraph/ontology.hpp"

namespace actgraph {
class ActivityGraph;
}

namespace actgraph::coa {

class HierarchyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResourceGroup {
  std::string cls;  // ontology class shared by every member
  std::vector<NodeKey> members;
};

struct BusinessProcess {
  std::string name;
  std::vector<ResourceGroup> groups;
};

// Application -> business process -> ontology-typed group -> resource.
struct Hierarchy {
  std::string root;
  std::vector<BusinessProcess> processes;

  std::size_t resource_count() const;
  // Disjoint cover, distinct group classes per process, no empty levels.
  void validate() const;

  static Hierarchy parse(std::string_view json_text);
  std::string dump() const;
};

enum class Level { Process, Group, Resource };
std::string_view to_string(Level level);

// Identifies one set of siblings compared against each other.
struct SiblingSet {
  Level level = Level::Process;
  std::string process;  // empty at the process level
  std::string group;    // group class; set only at the resource level

  friend auto operator<=>(const SiblingSet&, const SiblingSet&) = default;
  friend bool operator==(const SiblingSet&, const SiblingSet&) = default;
};

// "processes", "groups/<process>", "resources/<process>/<class>".
std::string to_string(const SiblingSet& set);
SiblingSet parse_sibling_set(std::string_view text);

struct SiblingGroup {
  SiblingSet set;
  std::vector<std::string> labels;
};

// Every sibling set in questionnaire order: processes, then each process's
// groups, then each group's resources.
std::vector<SiblingGroup> sibling_sets(const Hierarchy& h);

// Business-process assignment of resource nodes. Entries name nodes by
// plain name or, when a name is ambiguous, "Class:name".
struct ProcessAssignment {
  std::vector<std::pair<std::string, std::vector<std::string>>> processes;
  std::set<std::string> ignore;  // left out of the ranking; may name absent resources

  static ProcessAssignment parse(std::string_view json_text);
};

// Groups by ontology class inside each assigned process; groups are ordered
// by first appearance. Throws HierarchyError listing every Resource-kind node
// without a process, and for assignment entries that match no node.
Hierarchy build_hierarchy(const ActivityGraph& graph, const Catalog& catalog, const ProcessAssignment& assignment,
                          std::string root = "application");

struct ComparisonCount {
  std::size_t ahp = 0;    // sum over sibling sets of s(s-1)/2
  std::size_t naive = 0;  // n(n-1)/2 over all resources
};

ComparisonCount comparison_count(const Hierarchy& h);

}  // namespace actgraph::coa
