#include "restoro/flow.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace restoro {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Primal-dual min-cost flow: Dijkstra on reduced costs fixes the potentials,
// then a blocking flow saturates every shortest path at once (zero reduced
// cost arcs) before the next Dijkstra.
// Dijkstra stops as soon as the sink is settled.
class MinCostFlow {
 public:
  MinCostFlow(int n, int max_edges) : adj_(n) {
    edges_.reserve(2 * max_edges);
    for (auto& a : adj_) a.reserve(8);
  }

  int add_edge(int from, int to, double cap, double cost) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap, cost, cap});
    edges_.push_back({from, 0.0, -cost, 0.0});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    max_cost_ = std::max(max_cost_, std::abs(cost));
    return id;
  }

  double flow(int edge) const { return edges_[edge].initial - edges_[edge].cap; }

  // Pushes up to `limit` units from s to t along cheapest paths.
  void run(int s, int t, double limit, double eps) {
    const int n = static_cast<int>(adj_.size());
    pot_.assign(n, 0.0);
    dist_.resize(n);
    level_.resize(n);
    iter_.resize(n);
    std::vector<char> done(n);
    std::vector<std::pair<double, int>> heap;
    cost_tol_ = 1e-12 * std::max(1.0, max_cost_);
    eps_ = eps;
    double shipped = 0.0;
    while (shipped < limit - eps) {
      std::fill(dist_.begin(), dist_.end(), kInf);
      std::fill(done.begin(), done.end(), 0);
      dist_[s] = 0.0;
      heap.clear();
      heap.push_back({0.0, s});
      while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), std::greater<>());
        const auto [d, u] = heap.back();
        heap.pop_back();
        if (done[u]) continue;
        done[u] = 1;
        if (u == t) break;
        for (int id : adj_[u]) {
          const Edge& e = edges_[id];
          if (e.cap <= eps || done[e.to]) continue;
          const double reduced = std::max(0.0, e.cost + pot_[u] - pot_[e.to]);
          if (d + reduced < dist_[e.to]) {
            dist_[e.to] = d + reduced;
            heap.push_back({dist_[e.to], e.to});
            std::push_heap(heap.begin(), heap.end(), std::greater<>());
          }
        }
      }
      if (dist_[t] == kInf) break;
      // Capping at dist(t) keeps every residual reduced cost nonnegative.
      for (int v = 0; v < n; ++v) pot_[v] += std::min(dist_[v], dist_[t]);

      // Blocking flows on the admissible subgraph until t is cut off.
      while (shipped < limit - eps && build_levels(s, t)) {
        std::fill(iter_.begin(), iter_.end(), 0);
        while (shipped < limit - eps) {
          const double pushed = augment(s, t, limit - shipped);
          if (pushed <= eps) break;
          shipped += pushed;
        }
      }
    }
  }

 private:
  struct Edge {
    int to;
    double cap;
    double cost;
    double initial;
  };

  bool admissible(int from, const Edge& e) const {
    return e.cap > eps_ && e.cost + pot_[from] - pot_[e.to] <= cost_tol_;
  }

  bool build_levels(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    queue_.clear();
    queue_.push_back(s);
    auto& queue = queue_;
    level_[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (int id : adj_[u]) {
        const Edge& e = edges_[id];
        if (level_[e.to] < 0 && admissible(u, e)) {
          level_[e.to] = level_[u] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double augment(int u, int t, double want) {
    if (u == t) return want;
    for (int& i = iter_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
      const int id = adj_[u][i];
      Edge& e = edges_[id];
      if (level_[e.to] != level_[u] + 1 || !admissible(u, e)) continue;
      const double got = augment(e.to, t, std::min(want, e.cap));
      if (got > eps_) {
        e.cap -= got;
        edges_[id ^ 1].cap += got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> pot_;
  std::vector<double> dist_;
  std::vector<int> level_;
  std::vector<int> iter_;
  std::vector<int> queue_;
  double max_cost_ = 0.0;
  double cost_tol_ = 0.0;
  double eps_ = 0.0;
};

FlowSolution solve_layer(const Network& net, int layer,
                         const std::vector<std::uint8_t>& node_up,
                         const std::vector<std::uint8_t>& arc_up) {
  const auto& nodes = net.layer_nodes(layer);
  const auto& arcs = net.layer_arcs(layer);
  const int n_local = static_cast<int>(nodes.size());
  FlowSolution sol;
  sol.arc_flow.assign(arcs.size(), 0.0);
  sol.surplus.assign(n_local, 0.0);
  sol.deficit.assign(n_local, 0.0);

  // Local ids: layer nodes 0..n-1, balance hub n, source n+1, sink n+2.
  const int hub = n_local;
  const int source = n_local + 1;
  const int sink = n_local + 2;
  std::vector<int> local(net.node_count(), -1);
  double supply = 0.0;
  double hub_balance = 0.0;
  double scale = 1.0;
  for (int i = 0; i < n_local; ++i) {
    local[nodes[i]] = i;
    const NodeSpec& spec = net.node(nodes[i]);
    scale = std::max(scale, std::abs(spec.balance));
    if (node_up[nodes[i]]) {
      if (spec.balance > 0) supply += spec.balance;
      hub_balance -= spec.balance;
    } else {
      sol.surplus[i] = std::max(spec.balance, 0.0);
      sol.deficit[i] = std::max(-spec.balance, 0.0);
    }
  }
  if (hub_balance > 0) supply += hub_balance;
  const double eps = 1e-12 * scale;

  MinCostFlow mcf(n_local + 3,
                  static_cast<int>(arcs.size()) + 4 * n_local + 1);
  std::vector<int> arc_edge(arcs.size(), -1);
  for (std::size_t j = 0; j < arcs.size(); ++j) {
    const int a = arcs[j];
    if (!arc_up[a]) continue;
    const ArcSpec& spec = net.arc(a);
    if (spec.capacity <= 0.0) continue;
    arc_edge[j] = mcf.add_edge(local[net.arc_tail(a)], local[net.arc_head(a)],
                               spec.capacity, spec.flow_cost);
  }
  std::vector<int> surplus_edge(n_local, -1);
  std::vector<int> deficit_edge(n_local, -1);
  for (int i = 0; i < n_local; ++i) {
    if (!node_up[nodes[i]]) continue;
    const NodeSpec& spec = net.node(nodes[i]);
    surplus_edge[i] = mcf.add_edge(i, hub, supply, spec.surplus_penalty);
    deficit_edge[i] = mcf.add_edge(hub, i, supply, spec.deficit_penalty);
    if (spec.balance > 0) mcf.add_edge(source, i, spec.balance, 0.0);
    if (spec.balance < 0) mcf.add_edge(i, sink, -spec.balance, 0.0);
  }
  if (hub_balance > 0) mcf.add_edge(source, hub, hub_balance, 0.0);
  if (hub_balance < 0) mcf.add_edge(hub, sink, -hub_balance, 0.0);

  mcf.run(source, sink, supply, eps);

  for (std::size_t j = 0; j < arcs.size(); ++j) {
    if (arc_edge[j] < 0) continue;
    sol.arc_flow[j] = mcf.flow(arc_edge[j]);
    sol.flow_cost += net.arc(arcs[j]).flow_cost * sol.arc_flow[j];
  }
  for (int i = 0; i < n_local; ++i) {
    if (surplus_edge[i] >= 0) {
      // A node may carry both slacks only on a zero-cost cycle; net them.
      const double net_dev =
          mcf.flow(surplus_edge[i]) - mcf.flow(deficit_edge[i]);
      sol.surplus[i] = std::max(net_dev, 0.0);
      sol.deficit[i] = std::max(-net_dev, 0.0);
    }
    const NodeSpec& spec = net.node(nodes[i]);
    sol.imbalance_cost += spec.surplus_penalty * sol.surplus[i] +
                          spec.deficit_penalty * sol.deficit[i];
  }
  return sol;
}

// Interdependency closure and arc gating, with `forced_down` nodes removed.
FunctionalityState propagate(const Network& net, const FunctionalityState& raw,
                             const std::vector<std::uint8_t>& forced_down) {
  FunctionalityState s = raw;
  for (int v = 0; v < net.node_count(); ++v) {
    if (forced_down[v]) s.node_up[v] = 0;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 0; v < net.node_count(); ++v) {
      if (!s.node_up[v]) continue;
      for (int p : net.parents(v)) {
        if (!s.node_up[p]) {
          s.node_up[v] = 0;
          changed = true;
          break;
        }
      }
    }
  }
  for (int a = 0; a < net.arc_count(); ++a) {
    s.arc_up[a] = raw.arc_up[a] && s.node_up[net.arc_tail(a)] &&
                  s.node_up[net.arc_head(a)];
  }
  return s;
}

OperatingCost evaluate(const Network& net, const FunctionalityState& raw,
                       LayerFlowCache* cache) {
  raw.check_dims(net);
  std::vector<std::uint8_t> forced_down(net.node_count(), 0);
  OperatingCost out;
  // Each pass either terminates or deactivates at least one node.
  for (int pass = 0; pass <= net.node_count(); ++pass) {
    out.effective = propagate(net, raw, forced_down);
    out.layers.clear();
    for (int k = 0; k < net.layer_count(); ++k) {
      out.layers.push_back(
          cache ? cache->solve(net, k, out.effective)
                : solve_layer(net, k, out.effective.node_up,
                              out.effective.arc_up));
    }
    if (!net.has_demand_completion()) break;
    bool deactivated = false;
    for (int k = 0; k < net.layer_count(); ++k) {
      const auto& nodes = net.layer_nodes(k);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeSpec& spec = net.node(nodes[i]);
        if (!spec.demand_completion || !out.effective.node_up[nodes[i]]) {
          continue;
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(spec.balance));
        if (out.layers[k].deficit[i] > tol) {
          forced_down[nodes[i]] = 1;
          deactivated = true;
        }
      }
    }
    if (!deactivated) break;
  }
  for (const auto& layer : out.layers) {
    out.flow += layer.flow_cost;
    out.imbalance += layer.imbalance_cost;
  }
  return out;
}

}  // namespace

FunctionalityState FunctionalityState::all_up(const Network& net) {
  return {std::vector<std::uint8_t>(net.node_count(), 1),
          std::vector<std::uint8_t>(net.arc_count(), 1)};
}

FunctionalityState FunctionalityState::all_down(const Network& net) {
  return {std::vector<std::uint8_t>(net.node_count(), 0),
          std::vector<std::uint8_t>(net.arc_count(), 0)};
}

bool FunctionalityState::element_up(const Network& net, int element) const {
  return net.is_node_element(element)
             ? node_up[element] != 0
             : arc_up[element - net.node_count()] != 0;
}

void FunctionalityState::set_element(const Network& net, int element,
                                     bool up) {
  if (net.is_node_element(element)) {
    node_up[element] = up;
  } else {
    arc_up[element - net.node_count()] = up;
  }
}

std::vector<std::uint8_t> FunctionalityState::elements() const {
  std::vector<std::uint8_t> out = node_up;
  out.insert(out.end(), arc_up.begin(), arc_up.end());
  return out;
}

void FunctionalityState::check_dims(const Network& net) const {
  if (static_cast<int>(node_up.size()) != net.node_count() ||
      static_cast<int>(arc_up.size()) != net.arc_count()) {
    throw std::invalid_argument("functionality state does not match network");
  }
}

FunctionalityState effective_state(const Network& net,
                                   const FunctionalityState& raw) {
  return evaluate(net, raw, nullptr).effective;
}

FlowSolution solve_layer_flow(const Network& net, int layer,
                              const FunctionalityState& state) {
  state.check_dims(net);
  if (layer < 0 || layer >= net.layer_count()) {
    throw std::out_of_range("layer index out of range");
  }
  return solve_layer(net, layer, state.node_up, state.arc_up);
}

const FlowSolution& LayerFlowCache::solve(const Network& net, int layer,
                                          const FunctionalityState& effective) {
  if (memo_.size() != static_cast<std::size_t>(net.layer_count())) {
    memo_.assign(net.layer_count(), {});
  }
  const auto& nodes = net.layer_nodes(layer);
  const auto& arcs = net.layer_arcs(layer);
  std::string key(nodes.size() + arcs.size(), '\0');
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    key[i] = static_cast<char>(effective.node_up[nodes[i]]);
  }
  for (std::size_t j = 0; j < arcs.size(); ++j) {
    key[nodes.size() + j] = static_cast<char>(effective.arc_up[arcs[j]]);
  }
  auto& memo = memo_[layer];
  auto it = memo.find(key);
  if (it == memo.end()) {
    it = memo.emplace(std::move(key), solve_layer(net, layer, effective.node_up,
                                                  effective.arc_up))
             .first;
  }
  return it->second;
}

std::size_t LayerFlowCache::size() const {
  std::size_t n = 0;
  for (const auto& m : memo_) n += m.size();
  return n;
}

OperatingCost operating_cost(const Network& net, const FunctionalityState& raw,
                             LayerFlowCache* cache) {
  return evaluate(net, raw, cache);
}

double relaxed_healthy_cost(const Network& net) {
  const FunctionalityState up = FunctionalityState::all_up(net);
  double total = 0.0;
  for (int k = 0; k < net.layer_count(); ++k) {
    const FlowSolution sol = solve_layer(net, k, up.node_up, up.arc_up);
    total += sol.flow_cost + sol.imbalance_cost;
  }
  return total;
}

}  // namespace restoro
