// Interdependent multilayer network model: nodes, intra-layer arcs,
// inter-layer dependency links and geographical spaces.
//
// A NetworkSpec is plain data as read from disk. A Network is the validated,
// indexed, immutable view every other module works on. Element vectors
// (functionality states, damage scenarios, plans) use the canonical order:
// nodes grouped by layer in declared layer order, then arcs in declared order.

#ifndef RESTORO_NETWORK_H_
#define RESTORO_NETWORK_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace restoro {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeRef {
  std::string layer;
  std::string index;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

std::string to_string(const NodeRef& ref);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct NodeSpec {
  NodeRef ref;
  double balance = 0.0;  // > 0 supply, < 0 demand
  double repair_cost = 0.0;
  double surplus_penalty = 0.0;
  double deficit_penalty = 0.0;
  std::string space;
  bool demand_completion = false;
  Point position;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct ArcSpec {
  NodeRef tail;
  NodeRef head;
  double capacity = 0.0;
  double flow_cost = 0.0;
  double repair_cost = 0.0;
  std::string space;

  friend bool operator==(const ArcSpec&, const ArcSpec&) = default;
};

struct InterdependencyLink {
  NodeRef parent;
  NodeRef child;

  friend bool operator==(const InterdependencyLink&,
                         const InterdependencyLink&) = default;
};

struct SpaceSpec {
  std::string id;
  double prep_cost = 0.0;

  friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

struct NetworkSpec {
  std::vector<std::string> layers;
  std::vector<NodeSpec> nodes;
  std::vector<ArcSpec> arcs;
  std::vector<InterdependencyLink> links;
  std::vector<SpaceSpec> spaces;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Returns one message per broken invariant; empty iff the spec is well formed.
std::vector<std::string> validate(const NetworkSpec& spec);

// Text format with [layers] [nodes] [arcs] [links] [spaces] sections.
// Throws ParseError (with line number), ValidationError or IoError.
NetworkSpec parse_network(std::istream& in);
NetworkSpec load_network(const std::filesystem::path& path);
void write_network(const NetworkSpec& spec, std::ostream& out);
void save_network(const NetworkSpec& spec, const std::filesystem::path& path);

// Validated, indexed view of a NetworkSpec. Immutable after construction and
// safe to share across threads.
class Network {
 public:
  // Throws ValidationError if validate(spec) is nonempty.
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }

  int layer_count() const { return static_cast<int>(spec_.layers.size()); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int arc_count() const { return static_cast<int>(spec_.arcs.size()); }
  int element_count() const { return node_count() + arc_count(); }
  bool is_node_element(int element) const { return element < node_count(); }

  // Node data in canonical order.
  const NodeSpec& node(int node) const { return spec_.nodes[nodes_[node]]; }
  const ArcSpec& arc(int arc) const { return spec_.arcs[arc]; }
  int node_layer(int node) const { return node_layer_[node]; }
  int arc_layer(int arc) const { return node_layer_[arc_tail_[arc]]; }
  int arc_tail(int arc) const { return arc_tail_[arc]; }
  int arc_head(int arc) const { return arc_head_[arc]; }

  // Canonical node indices of a layer, ascending.
  const std::vector<int>& layer_nodes(int layer) const {
    return layer_nodes_[layer];
  }
  const std::vector<int>& layer_arcs(int layer) const {
    return layer_arcs_[layer];
  }
  const std::vector<int>& parents(int node) const { return parents_[node]; }
  int element_layer(int element) const;
  int element_space(int element) const { return element_space_[element]; }
  double element_repair_cost(int element) const;
  double space_prep_cost(int space) const {
    return spec_.spaces[space].prep_cost;
  }
  int space_count() const { return static_cast<int>(spec_.spaces.size()); }
  bool has_demand_completion() const { return has_demand_completion_; }

  // Canonical index of a node, or of the arc at the given declared position.
  // Throws std::out_of_range for unknown elements.
  int canonical_index(const NodeRef& ref) const;
  int canonical_arc_index(std::size_t arc_ordinal) const;

  // Node counts per layer, in declared layer order.
  std::vector<int> layer_sizes() const;

 private:
  NetworkSpec spec_;
  std::vector<int> nodes_;  // canonical -> declared position
  std::map<NodeRef, int> node_lookup_;
  std::vector<int> node_layer_;
  std::vector<int> arc_tail_;
  std::vector<int> arc_head_;
  std::vector<std::vector<int>> layer_nodes_;
  std::vector<std::vector<int>> layer_arcs_;
  std::vector<std::vector<int>> parents_;
  std::vector<int> element_space_;
  bool has_demand_completion_ = false;
};

}  // namespace restoro

#endif  // RESTORO_NETWORK_H_
