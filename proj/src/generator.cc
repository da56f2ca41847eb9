#include "restoro/generator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "restoro/random.h"

namespace restoro {
namespace {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::string space_of(const Point& p, int grid) {
  const int cx = std::clamp(static_cast<int>(p.x * grid), 0, grid - 1);
  const int cy = std::clamp(static_cast<int>(p.y * grid), 0, grid - 1);
  return "s" + std::to_string(cx) + "_" + std::to_string(cy);
}

Point midpoint(const Point& a, const Point& b) {
  return {(a.x + b.x) / 2, (a.y + b.y) / 2};
}

}  // namespace

GeneratorOptions generic_options(const std::vector<int>& sizes) {
  GeneratorOptions out;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1) throw std::invalid_argument("layer sizes must be >= 1");
    LayerTemplate layer;
    layer.name = "l" + std::to_string(k);
    layer.size = sizes[k];
    out.layers.push_back(layer);
    if (k > 0) {
      out.dependencies.push_back({static_cast<int>(k) - 1,
                                  static_cast<int>(k), 0.3, false});
    }
  }
  return out;
}

GeneratorOptions shelby_like_options() {
  GeneratorOptions out;
  LayerTemplate water;
  water.name = "water";
  water.size = 49;
  water.deficit_penalty = 100;
  water.demand_completion_fraction = 0.05;
  LayerTemplate gas;
  gas.name = "gas";
  gas.size = 16;
  gas.deficit_penalty = 200;
  gas.demand_completion_fraction = 0.05;
  LayerTemplate power;
  power.name = "power";
  power.size = 60;
  power.demand_max = 10;
  power.deficit_penalty = 150;
  power.demand_completion_fraction = 0.05;
  out.layers = {water, gas, power};
  out.dependencies = {{2, 0, 0.4, false}, {1, 2, 0.5, true}};
  return out;
}

NetworkSpec generate_network(const GeneratorOptions& options,
                             std::uint64_t seed) {
  if (options.layers.empty()) throw std::invalid_argument("no layers");
  if (options.space_grid < 1) throw std::invalid_argument("space grid < 1");
  Rng rng(derive_seed(seed, "network"));
  NetworkSpec spec;

  std::set<std::string> used_spaces;
  std::vector<std::vector<int>> layer_members(options.layers.size());
  for (std::size_t k = 0; k < options.layers.size(); ++k) {
    const LayerTemplate& lt = options.layers[k];
    if (lt.size < 1) throw std::invalid_argument("layer sizes must be >= 1");
    spec.layers.push_back(lt.name);
    const int n = lt.size;
    const int first = static_cast<int>(spec.nodes.size());
    const int n_supply =
        std::clamp(static_cast<int>(std::lround(lt.supply_fraction * n)), 1, n);

    int total_demand = 0;
    int demand_nodes = 0;
    for (int i = 0; i < n; ++i) {
      NodeSpec node;
      node.ref = {lt.name, "n" + std::to_string(i)};
      node.position = {uniform01(rng), uniform01(rng)};
      node.repair_cost = uniform_int(rng, lt.repair_min, lt.repair_max);
      node.surplus_penalty = lt.surplus_penalty;
      node.deficit_penalty = lt.deficit_penalty;
      const bool is_demand = uniform01(rng) < lt.demand_probability;
      const int demand = uniform_int(rng, lt.demand_min, lt.demand_max);
      const bool completion = uniform01(rng) < lt.demand_completion_fraction;
      if (i < n_supply) {
        node.repair_cost *= 2;
      } else if (is_demand || (demand_nodes == 0 && i == n - 1)) {
        node.balance = -demand;
        node.demand_completion = completion;
        total_demand += demand;
        ++demand_nodes;
      }
      node.space = space_of(node.position, options.space_grid);
      used_spaces.insert(node.space);
      spec.nodes.push_back(std::move(node));
      layer_members[k].push_back(first + i);
    }
    const int per_supply = static_cast<int>(
        std::ceil(lt.supply_margin * total_demand / n_supply));
    for (int i = 0; i < n_supply; ++i) spec.nodes[first + i].balance = per_supply;

    // Euclidean spanning tree (Prim), then optional shortcut edges; every
    // physical edge becomes a pair of opposite arcs.
    std::vector<std::pair<int, int>> edges;
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> link(n, -1);
    best[0] = 0.0;
    for (int it = 0; it < n; ++it) {
      int u = -1;
      for (int v = 0; v < n; ++v) {
        if (!in_tree[v] && (u < 0 || best[v] < best[u])) u = v;
      }
      in_tree[u] = 1;
      if (link[u] >= 0) edges.emplace_back(link[u], u);
      for (int v = 0; v < n; ++v) {
        const double d = distance(spec.nodes[first + u].position,
                                  spec.nodes[first + v].position);
        if (!in_tree[v] && d < best[v]) {
          best[v] = d;
          link[v] = u;
        }
      }
    }
    std::set<std::pair<int, int>> present;
    for (auto [a, b] : edges) present.insert({std::min(a, b), std::max(a, b)});
    for (int u = 0; u < n; ++u) {
      if (uniform01(rng) >= options.extra_edge_probability) continue;
      int pick = -1;
      double pick_d = std::numeric_limits<double>::infinity();
      for (int v = 0; v < n; ++v) {
        if (v == u || present.contains({std::min(u, v), std::max(u, v)})) {
          continue;
        }
        const double d = distance(spec.nodes[first + u].position,
                                  spec.nodes[first + v].position);
        if (d < pick_d) {
          pick_d = d;
          pick = v;
        }
      }
      if (pick < 0) continue;
      present.insert({std::min(u, pick), std::max(u, pick)});
      edges.emplace_back(u, pick);
    }
    const int cap_hi = std::max(1, per_supply * n_supply);
    const int cap_lo = std::max(1, static_cast<int>(std::ceil(0.6 * cap_hi)));
    for (auto [a, b] : edges) {
      const NodeSpec& na = spec.nodes[first + a];
      const NodeSpec& nb = spec.nodes[first + b];
      const double d = distance(na.position, nb.position);
      const double capacity = uniform_int(rng, cap_lo, cap_hi);
      const double flow_cost = 1 + std::floor(10 * d);
      const double repair = 50 + std::floor(100 * d);
      const std::string space =
          space_of(midpoint(na.position, nb.position), options.space_grid);
      used_spaces.insert(space);
      spec.arcs.push_back({na.ref, nb.ref, capacity, flow_cost, repair, space});
      spec.arcs.push_back({nb.ref, na.ref, capacity, flow_cost, repair, space});
    }
  }

  for (const DependencyRule& rule : options.dependencies) {
    const auto& parents = layer_members.at(rule.parent_layer);
    const auto& children = layer_members.at(rule.child_layer);
    if (rule.parent_layer == rule.child_layer) {
      throw std::invalid_argument("dependency rule within one layer");
    }
    for (int c : children) {
      const NodeSpec& child = spec.nodes[c];
      if (rule.supply_only && child.balance <= 0) continue;
      if (uniform01(rng) >= rule.fraction) continue;
      int pick = parents.front();
      for (int p : parents) {
        if (distance(spec.nodes[p].position, child.position) <
            distance(spec.nodes[pick].position, child.position)) {
          pick = p;
        }
      }
      const InterdependencyLink link{spec.nodes[pick].ref, child.ref};
      if (std::find(spec.links.begin(), spec.links.end(), link) ==
          spec.links.end()) {
        spec.links.push_back(link);
      }
    }
  }

  for (const auto& id : used_spaces) {
    spec.spaces.push_back({id, static_cast<double>(uniform_int(
                                   rng, options.prep_min, options.prep_max))});
  }
  return spec;
}

}  // namespace restoro
