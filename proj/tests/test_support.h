// Hand-built fixtures and brute-force oracles shared by the unit and
// acceptance tests. Nothing here calls the library's optimizers.

#ifndef RESTORO_TESTS_TEST_SUPPORT_H_
#define RESTORO_TESTS_TEST_SUPPORT_H_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "restoro/flow.h"
#include "restoro/generator.h"
#include "restoro/network.h"
#include "restoro/random.h"
#include "restoro/solver.h"

namespace restoro::testing {

inline NodeSpec make_node(const std::string& layer, const std::string& index,
                          double balance, double surplus_penalty,
                          double deficit_penalty, double repair_cost = 10,
                          const std::string& space = "s0") {
  NodeSpec n;
  n.ref = {layer, index};
  n.balance = balance;
  n.repair_cost = repair_cost;
  n.surplus_penalty = surplus_penalty;
  n.deficit_penalty = deficit_penalty;
  n.space = space;
  return n;
}

inline ArcSpec make_arc(const std::string& layer, const std::string& tail,
                        const std::string& head, double capacity,
                        double flow_cost, double repair_cost = 10,
                        const std::string& space = "s0") {
  ArcSpec a;
  a.tail = {layer, tail};
  a.head = {layer, head};
  a.capacity = capacity;
  a.flow_cost = flow_cost;
  a.repair_cost = repair_cost;
  a.space = space;
  return a;
}

// One layer "w": supply node "s" (b=+5) and demand node "d" (b=-5) joined by
// an arc of capacity 10 and unit cost; M+ = 1, M- = 10.
inline NetworkSpec two_node_spec() {
  NetworkSpec spec;
  spec.layers = {"w"};
  spec.nodes = {make_node("w", "s", 5, 1, 10), make_node("w", "d", -5, 1, 10)};
  spec.arcs = {make_arc("w", "s", "d", 10, 1)};
  spec.spaces = {{"s0", 7}};
  return spec;
}

// Solution of the layer LP
//   min sum c_a x_a + sum (M+_v d+_v + M-_v d-_v)
//   s.t. out(v) - in(v) + d+_v - d-_v = b_v  (up nodes), 0 <= x <= u, d >= 0
// by enumerating every basis and every bound assignment of the nonbasic
// arcs. Down nodes add their full |b| at the matching penalty.
struct LpOracleResult {
  double objective = std::numeric_limits<double>::infinity();
  double flow_cost = 0.0;
  double imbalance_cost = 0.0;
};

inline LpOracleResult lp_layer_oracle(const Network& net, int layer,
                                      const FunctionalityState& state) {
  const auto& nodes = net.layer_nodes(layer);
  std::vector<int> up_nodes;
  double fixed = 0.0;
  for (int v : nodes) {
    const NodeSpec& s = net.node(v);
    if (state.node_up[v]) {
      up_nodes.push_back(v);
    } else {
      fixed += s.surplus_penalty * std::max(s.balance, 0.0) +
               s.deficit_penalty * std::max(-s.balance, 0.0);
    }
  }
  std::vector<int> up_arcs;
  for (int a : net.layer_arcs(layer)) {
    if (state.arc_up[a] && net.arc(a).capacity > 0) up_arcs.push_back(a);
  }
  const int m = static_cast<int>(up_nodes.size());
  LpOracleResult best;
  if (m == 0) {
    best.objective = fixed;
    best.imbalance_cost = fixed;
    return best;
  }
  std::map<int, int> row;
  for (int i = 0; i < m; ++i) row[up_nodes[i]] = i;
  const int n_arc = static_cast<int>(up_arcs.size());
  const int n = n_arc + 2 * m;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd cost(n), upper(n), b(m);
  for (int j = 0; j < n_arc; ++j) {
    const ArcSpec& arc = net.arc(up_arcs[j]);
    A(row[net.arc_tail(up_arcs[j])], j) += 1.0;
    A(row[net.arc_head(up_arcs[j])], j) -= 1.0;
    cost(j) = arc.flow_cost;
    upper(j) = arc.capacity;
  }
  for (int i = 0; i < m; ++i) {
    const NodeSpec& s = net.node(up_nodes[i]);
    A(i, n_arc + 2 * i) = 1.0;
    A(i, n_arc + 2 * i + 1) = -1.0;
    cost(n_arc + 2 * i) = s.surplus_penalty;
    cost(n_arc + 2 * i + 1) = s.deficit_penalty;
    upper(n_arc + 2 * i) = upper(n_arc + 2 * i + 1) =
        std::numeric_limits<double>::infinity();
    b(i) = s.balance;
  }

  std::vector<int> basis;
  std::function<void(int)> choose = [&](int start) {
    if (static_cast<int>(basis.size()) == m) {
      Eigen::MatrixXd B(m, m);
      for (int k = 0; k < m; ++k) B.col(k) = A.col(basis[k]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
      if (lu.rank() < m) return;
      std::vector<int> nonbasic_arcs;
      for (int j = 0; j < n_arc; ++j) {
        if (std::find(basis.begin(), basis.end(), j) == basis.end()) {
          nonbasic_arcs.push_back(j);
        }
      }
      const int nb = static_cast<int>(nonbasic_arcs.size());
      for (long bits = 0; bits < (1L << nb); ++bits) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < nb; ++k) {
          if ((bits >> k) & 1L) x(nonbasic_arcs[k]) = upper(nonbasic_arcs[k]);
        }
        const Eigen::VectorXd xb = lu.solve(b - A * x);
        bool feasible = true;
        for (int k = 0; k < m && feasible; ++k) {
          const double tol = 1e-9 * std::max(1.0, std::abs(xb(k)));
          if (xb(k) < -tol || xb(k) > upper(basis[k]) + tol) feasible = false;
          x(basis[k]) = xb(k);
        }
        if (!feasible) continue;
        const double obj = cost.dot(x) + fixed;
        if (obj < best.objective) {
          best.objective = obj;
          best.flow_cost = cost.head(n_arc).dot(x.head(n_arc));
          best.imbalance_cost = obj - best.flow_cost;
        }
      }
      return;
    }
    for (int j = start; j < n; ++j) {
      basis.push_back(j);
      choose(j + 1);
      basis.pop_back();
    }
  };
  choose(0);
  return best;
}

// Random single-layer instance small enough for the LP oracle.
inline NetworkSpec random_layer(std::uint64_t seed) {
  Rng rng(seed);
  NetworkSpec spec;
  spec.layers = {"x"};
  spec.spaces = {{"s0", 0}};
  const int n = uniform_int(rng, 2, 5);
  for (int i = 0; i < n; ++i) {
    spec.nodes.push_back(make_node("x", std::to_string(i),
                                   uniform_int(rng, -6, 6),
                                   uniform_int(rng, 0, 4),
                                   uniform_int(rng, 1, 30)));
  }
  const int m = uniform_int(rng, 1, 6);
  for (int j = 0; j < m; ++j) {
    const int t = uniform_int(rng, 0, n - 1);
    int h = uniform_int(rng, 0, n - 2);
    if (h >= t) ++h;
    spec.arcs.push_back(make_arc("x", std::to_string(t), std::to_string(h),
                                 uniform_int(rng, 0, 8), uniform_int(rng, 0, 9)));
  }
  return spec;
}

// Max over nodes of |out - in + surplus - deficit - b| for up nodes, and of
// the deviation from the full balance for down nodes.
inline double conservation_residual(const Network& net, int layer,
                             const FunctionalityState& s,
                             const FlowSolution& sol) {
  const auto& nodes = net.layer_nodes(layer);
  const auto& arcs = net.layer_arcs(layer);
  std::vector<double> net_out(net.node_count(), 0.0);
  for (std::size_t j = 0; j < arcs.size(); ++j) {
    net_out[net.arc_tail(arcs[j])] += sol.arc_flow[j];
    net_out[net.arc_head(arcs[j])] -= sol.arc_flow[j];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double b = net.node(nodes[i]).balance;
    double r;
    if (s.node_up[nodes[i]]) {
      r = net_out[nodes[i]] + sol.surplus[i] - sol.deficit[i] - b;
    } else {
      r = std::abs(net_out[nodes[i]]) +
          std::abs(sol.surplus[i] - std::max(b, 0.0)) +
          std::abs(sol.deficit[i] - std::max(-b, 0.0));
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

// Exhaustive schedule search: every damaged element gets a step in
// 1..horizon or kNever, subject to the cap. The cost of each schedule is
// assembled here from operating_cost plus hand-counted repair and first-use
// space costs.
struct BruteForceResult {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> repair_time;
  long schedules = 0;
};

inline BruteForceResult brute_force_schedule(const Network& net,
                                             const DamageScenario& scenario,
                                             int resource_cap, int horizon) {
  std::vector<int> damaged;
  for (int e = 0; e < net.element_count(); ++e) {
    if (!scenario.initial.element_up(net, e)) damaged.push_back(e);
  }
  const int d = static_cast<int>(damaged.size());
  std::map<std::vector<std::uint8_t>, double> op_memo;
  auto operating = [&](const FunctionalityState& s) {
    const auto key = s.elements();
    auto it = op_memo.find(key);
    if (it != op_memo.end()) return it->second;
    const double v = operating_cost(net, s).total();
    op_memo.emplace(key, v);
    return v;
  };

  BruteForceResult best;
  std::vector<int> choice(d, 0);  // 0..horizon-1 -> step, horizon -> never
  while (true) {
    std::vector<int> per_step(horizon + 1, 0);
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) {
      if (choice[i] < horizon && ++per_step[choice[i] + 1] > resource_cap) {
        ok = false;
      }
    }
    if (ok) {
      ++best.schedules;
      double total = 0.0;
      std::vector<int> first_use(net.space_count(), horizon + 1);
      for (int i = 0; i < d; ++i) {
        if (choice[i] == horizon) continue;
        const int t = choice[i] + 1;
        total += net.element_repair_cost(damaged[i]);
        int& f = first_use[net.element_space(damaged[i])];
        f = std::min(f, t);
      }
      for (int s = 0; s < net.space_count(); ++s) {
        if (first_use[s] <= horizon) total += net.space_prep_cost(s);
      }
      for (int t = 0; t <= horizon; ++t) {
        FunctionalityState state = scenario.initial;
        for (int i = 0; i < d; ++i) {
          if (choice[i] < horizon && choice[i] + 1 <= t) {
            state.set_element(net, damaged[i], true);
          }
        }
        total += operating(state);
      }
      if (total < best.cost) {
        best.cost = total;
        best.repair_time.assign(net.element_count(), kUnassigned);
        for (int i = 0; i < d; ++i) {
          best.repair_time[damaged[i]] =
              choice[i] == horizon ? kNever : choice[i] + 1;
        }
      }
    }
    int i = 0;
    while (i < d && choice[i] == horizon) choice[i++] = 0;
    if (i == d) break;
    ++choice[i];
  }
  return best;
}

// Small random two-layer instance with integral data and a random damaged
// set of at most `max_damaged` elements (nodes and arcs).
struct SmallInstance {
  Network net;
  DamageScenario scenario;
};

inline SmallInstance small_instance(std::uint64_t seed, int max_damaged = 6) {
  Rng rng(seed);
  const int a = uniform_int(rng, 2, 6);
  const int b = uniform_int(rng, 2, 6);
  GeneratorOptions options = generic_options({a, b});
  options.space_grid = 2;
  Network net(generate_network(options, derive_seed(seed, "net")));
  const int k = uniform_int(rng, 1, std::min(max_damaged, net.element_count()));
  std::vector<int> elements(net.element_count());
  for (int e = 0; e < net.element_count(); ++e) elements[e] = e;
  for (int i = 0; i < k; ++i) {
    std::swap(elements[i], elements[uniform_int(rng, i, net.element_count() - 1)]);
  }
  DamageScenario scenario;
  scenario.initial = FunctionalityState::all_up(net);
  for (int i = 0; i < k; ++i) scenario.initial.set_element(net, elements[i], false);
  return {std::move(net), std::move(scenario)};
}

}  // namespace restoro::testing

#endif  // RESTORO_TESTS_TEST_SUPPORT_H_
