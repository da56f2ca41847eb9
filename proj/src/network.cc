#include "restoro/network.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "restoro/text_util.h"

namespace restoro {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = "invalid network:";
  for (const auto& v : violations) out += "\n  " + v;
  return out;
}

bool nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

enum class Section { kNone, kLayers, kNodes, kArcs, kLinks, kSpaces };

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

std::string to_string(const NodeRef& ref) {
  return ref.layer + ":" + ref.index;
}

std::vector<std::string> validate(const NetworkSpec& spec) {
  std::vector<std::string> out;
  std::set<std::string> layers;
  for (const auto& layer : spec.layers) {
    if (!layers.insert(layer).second) out.push_back("duplicate layer " + layer);
  }
  std::set<std::string> spaces;
  for (const auto& space : spec.spaces) {
    if (!spaces.insert(space.id).second) {
      out.push_back("duplicate space " + space.id);
    }
    if (!nonnegative(space.prep_cost)) {
      out.push_back("space " + space.id + ": negative prep cost");
    }
  }
  std::set<NodeRef> nodes;
  for (const auto& node : spec.nodes) {
    const std::string name = "node " + to_string(node.ref);
    if (!nodes.insert(node.ref).second) out.push_back("duplicate " + name);
    if (!layers.contains(node.ref.layer)) {
      out.push_back(name + ": unknown layer");
    }
    if (!std::isfinite(node.balance)) out.push_back(name + ": non-finite balance");
    if (!nonnegative(node.repair_cost)) {
      out.push_back(name + ": negative repair cost");
    }
    if (!nonnegative(node.surplus_penalty)) {
      out.push_back(name + ": negative surplus penalty");
    }
    if (!nonnegative(node.deficit_penalty)) {
      out.push_back(name + ": negative deficit penalty");
    }
    if (!spaces.contains(node.space)) {
      out.push_back(name + ": unknown space " + node.space);
    }
  }
  for (std::size_t i = 0; i < spec.arcs.size(); ++i) {
    const auto& arc = spec.arcs[i];
    const std::string name = "arc #" + std::to_string(i) + " (" +
                             to_string(arc.tail) + " -> " +
                             to_string(arc.head) + ")";
    if (!nodes.contains(arc.tail)) out.push_back(name + ": unknown tail");
    if (!nodes.contains(arc.head)) out.push_back(name + ": unknown head");
    if (arc.tail.layer != arc.head.layer) {
      out.push_back(name + ": cross-layer arc");
    } else if (arc.tail == arc.head) {
      out.push_back(name + ": self-loop");
    }
    if (!nonnegative(arc.capacity)) out.push_back(name + ": negative capacity");
    if (!nonnegative(arc.flow_cost)) out.push_back(name + ": negative flow cost");
    if (!nonnegative(arc.repair_cost)) {
      out.push_back(name + ": negative repair cost");
    }
    if (!spaces.contains(arc.space)) {
      out.push_back(name + ": unknown space " + arc.space);
    }
  }
  std::set<std::pair<NodeRef, NodeRef>> links;
  for (const auto& link : spec.links) {
    const std::string name =
        "link " + to_string(link.parent) + " -> " + to_string(link.child);
    if (!nodes.contains(link.parent)) out.push_back(name + ": unknown parent");
    if (!nodes.contains(link.child)) out.push_back(name + ": unknown child");
    if (link.parent == link.child) {
      out.push_back(name + ": self-loop");
    } else if (link.parent.layer == link.child.layer) {
      out.push_back(name + ": intra-layer interdependency");
    }
    if (!links.emplace(link.parent, link.child).second) {
      out.push_back(name + ": duplicate link");
    }
  }
  return out;
}

NetworkSpec parse_network(std::istream& in) {
  NetworkSpec spec;
  std::set<std::string> layers;
  std::set<NodeRef> nodes;
  std::set<std::string> spaces;
  Section section = Section::kNone;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[layers]") section = Section::kLayers;
      else if (line == "[nodes]") section = Section::kNodes;
      else if (line == "[arcs]") section = Section::kArcs;
      else if (line == "[links]") section = Section::kLinks;
      else if (line == "[spaces]") section = Section::kSpaces;
      else throw ParseError(line_no, "unknown section " + line);
      continue;
    }
    const std::vector<std::string> f = split_fields(line);
    auto expect = [&](std::size_t n) {
      if (f.size() != n) {
        throw ParseError(line_no, "expected " + std::to_string(n) +
                                      " fields, got " +
                                      std::to_string(f.size()));
      }
    };
    auto num = [&](const std::string& s) {
      double v = 0.0;
      if (!parse_double(s, v)) throw ParseError(line_no, "bad number '" + s + "'");
      return v;
    };
    auto ident = [&](const std::string& s) {
      if (!is_identifier(s)) {
        throw ParseError(line_no, "bad identifier '" + s + "'");
      }
      return s;
    };
    switch (section) {
      case Section::kNone:
        throw ParseError(line_no, "record outside of any section");
      case Section::kLayers: {
        expect(1);
        if (!layers.insert(f[0]).second) {
          throw ParseError(line_no, "duplicate layer id " + f[0]);
        }
        spec.layers.push_back(ident(f[0]));
        break;
      }
      case Section::kNodes: {
        expect(10);
        NodeSpec node;
        node.ref = {ident(f[0]), ident(f[1])};
        if (!nodes.insert(node.ref).second) {
          throw ParseError(line_no, "duplicate node id " + to_string(node.ref));
        }
        node.balance = num(f[2]);
        node.repair_cost = num(f[3]);
        node.surplus_penalty = num(f[4]);
        node.deficit_penalty = num(f[5]);
        node.space = ident(f[6]);
        if (f[7] == "1" || f[7] == "true") {
          node.demand_completion = true;
        } else if (f[7] != "0" && f[7] != "false") {
          throw ParseError(line_no, "bad flag '" + f[7] + "'");
        }
        node.position = {num(f[8]), num(f[9])};
        spec.nodes.push_back(std::move(node));
        break;
      }
      case Section::kArcs: {
        expect(8);
        ArcSpec arc;
        arc.tail = {ident(f[0]), ident(f[1])};
        arc.head = {ident(f[2]), ident(f[3])};
        arc.capacity = num(f[4]);
        arc.flow_cost = num(f[5]);
        arc.repair_cost = num(f[6]);
        arc.space = ident(f[7]);
        spec.arcs.push_back(std::move(arc));
        break;
      }
      case Section::kLinks: {
        expect(4);
        spec.links.push_back(
            {{ident(f[0]), ident(f[1])}, {ident(f[2]), ident(f[3])}});
        break;
      }
      case Section::kSpaces: {
        expect(2);
        if (!spaces.insert(f[0]).second) {
          throw ParseError(line_no, "duplicate space id " + f[0]);
        }
        spec.spaces.push_back({ident(f[0]), num(f[1])});
        break;
      }
    }
  }
  auto violations = validate(spec);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return spec;
}

NetworkSpec load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file " + path.string());
  return parse_network(in);
}

void write_network(const NetworkSpec& spec, std::ostream& out) {
  out << "# restoro network v1\n[layers]\n";
  for (const auto& layer : spec.layers) out << layer << "\n";
  out << "[nodes]\n"
      << "# layer,index,balance,repair_cost,surplus_penalty,deficit_penalty,"
         "space,demand_completion,x,y\n";
  for (const auto& n : spec.nodes) {
    out << n.ref.layer << ',' << n.ref.index << ',' << format_double(n.balance)
        << ',' << format_double(n.repair_cost) << ','
        << format_double(n.surplus_penalty) << ','
        << format_double(n.deficit_penalty) << ',' << n.space << ','
        << (n.demand_completion ? 1 : 0) << ',' << format_double(n.position.x)
        << ',' << format_double(n.position.y) << "\n";
  }
  out << "[arcs]\n"
      << "# tail_layer,tail_index,head_layer,head_index,capacity,flow_cost,"
         "repair_cost,space\n";
  for (const auto& a : spec.arcs) {
    out << a.tail.layer << ',' << a.tail.index << ',' << a.head.layer << ','
        << a.head.index << ',' << format_double(a.capacity) << ','
        << format_double(a.flow_cost) << ',' << format_double(a.repair_cost)
        << ',' << a.space << "\n";
  }
  out << "[links]\n# parent_layer,parent_index,child_layer,child_index\n";
  for (const auto& l : spec.links) {
    out << l.parent.layer << ',' << l.parent.index << ',' << l.child.layer
        << ',' << l.child.index << "\n";
  }
  out << "[spaces]\n# id,prep_cost\n";
  for (const auto& s : spec.spaces) {
    out << s.id << ',' << format_double(s.prep_cost) << "\n";
  }
}

void save_network(const NetworkSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write network file " + path.string());
  write_network(spec, out);
  if (!out) throw IoError("write failed for " + path.string());
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  auto violations = validate(spec_);
  if (!violations.empty()) throw ValidationError(std::move(violations));

  const int n_layers = layer_count();
  std::map<std::string, int> layer_pos;
  for (int k = 0; k < n_layers; ++k) layer_pos[spec_.layers[k]] = k;
  std::map<std::string, int> space_pos;
  for (int s = 0; s < space_count(); ++s) space_pos[spec_.spaces[s].id] = s;

  layer_nodes_.resize(n_layers);
  layer_arcs_.resize(n_layers);
  for (int k = 0; k < n_layers; ++k) {
    for (int i = 0; i < static_cast<int>(spec_.nodes.size()); ++i) {
      if (layer_pos[spec_.nodes[i].ref.layer] != k) continue;
      const int canonical = static_cast<int>(nodes_.size());
      nodes_.push_back(i);
      node_layer_.push_back(k);
      layer_nodes_[k].push_back(canonical);
      node_lookup_[spec_.nodes[i].ref] = canonical;
      element_space_.push_back(space_pos[spec_.nodes[i].space]);
      has_demand_completion_ |= spec_.nodes[i].demand_completion;
    }
  }
  for (int a = 0; a < arc_count(); ++a) {
    const auto& arc = spec_.arcs[a];
    arc_tail_.push_back(node_lookup_.at(arc.tail));
    arc_head_.push_back(node_lookup_.at(arc.head));
    layer_arcs_[node_layer_[arc_tail_.back()]].push_back(a);
    element_space_.push_back(space_pos[arc.space]);
  }
  parents_.resize(nodes_.size());
  for (const auto& link : spec_.links) {
    parents_[node_lookup_.at(link.child)].push_back(
        node_lookup_.at(link.parent));
  }
  for (auto& p : parents_) std::sort(p.begin(), p.end());
}

int Network::element_layer(int element) const {
  return is_node_element(element) ? node_layer(element)
                                  : arc_layer(element - node_count());
}

double Network::element_repair_cost(int element) const {
  return is_node_element(element) ? node(element).repair_cost
                                  : arc(element - node_count()).repair_cost;
}

int Network::canonical_index(const NodeRef& ref) const {
  auto it = node_lookup_.find(ref);
  if (it == node_lookup_.end()) {
    throw std::out_of_range("unknown node " + to_string(ref));
  }
  return it->second;
}

int Network::canonical_arc_index(std::size_t arc_ordinal) const {
  if (arc_ordinal >= spec_.arcs.size()) {
    throw std::out_of_range("unknown arc #" + std::to_string(arc_ordinal));
  }
  return node_count() + static_cast<int>(arc_ordinal);
}

std::vector<int> Network::layer_sizes() const {
  std::vector<int> sizes;
  for (const auto& nodes : layer_nodes_) {
    sizes.push_back(static_cast<int>(nodes.size()));
  }
  return sizes;
}

}  // namespace restoro
