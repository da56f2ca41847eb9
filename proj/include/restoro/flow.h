// Operating cost of a (partially) functional network: per-layer min-cost
// flow with penalized surplus/deficit slacks, after propagating
// interdependency and demand-completion effects.

#ifndef RESTORO_FLOW_H_
#define RESTORO_FLOW_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "restoro/network.h"

namespace restoro {

struct FunctionalityState {
  std::vector<std::uint8_t> node_up;
  std::vector<std::uint8_t> arc_up;

  static FunctionalityState all_up(const Network& net);
  static FunctionalityState all_down(const Network& net);

  bool element_up(const Network& net, int element) const;
  void set_element(const Network& net, int element, bool up);
  // Element-wise bits in canonical order (nodes, then arcs).
  std::vector<std::uint8_t> elements() const;
  void check_dims(const Network& net) const;

  friend bool operator==(const FunctionalityState&,
                         const FunctionalityState&) = default;
};

struct FlowSolution {
  std::vector<double> arc_flow;  // indexed like Network::layer_arcs(layer)
  std::vector<double> surplus;   // indexed like Network::layer_nodes(layer)
  std::vector<double> deficit;
  double flow_cost = 0.0;
  double imbalance_cost = 0.0;
};

struct OperatingCost {
  double flow = 0.0;       // C_f
  double imbalance = 0.0;  // C_u
  std::vector<FlowSolution> layers;
  FunctionalityState effective;

  double total() const { return flow + imbalance; }
};

// Greatest fixed point of: node up only if raw-up and all parents up; arc up
// only if raw-up and both endpoints up; demand-completion node up only if it
// has zero deficit in the resulting flow solution.
FunctionalityState effective_state(const Network& net,
                                   const FunctionalityState& raw);

// Min-cost flow with slacks on one layer. `state` must already be effective.
// Down nodes take their whole balance as deviation; down arcs carry nothing.
FlowSolution solve_layer_flow(const Network& net, int layer,
                              const FunctionalityState& state);

// Memo of layer solutions keyed by the layer's effective node and arc bits.
// Not thread-safe; give each worker its own.
class LayerFlowCache {
 public:
  const FlowSolution& solve(const Network& net, int layer,
                            const FunctionalityState& effective);
  std::size_t size() const;

 private:
  std::vector<std::unordered_map<std::string, FlowSolution>> memo_;
};

// Applies effective_state, then sums the layer solutions.
OperatingCost operating_cost(const Network& net, const FunctionalityState& raw,
                             LayerFlowCache* cache = nullptr);

// Flow plus imbalance cost with every element functional and demand
// completion ignored. No state of the network costs less than this, which
// makes it a valid per-step lower bound for the restoration search.
double relaxed_healthy_cost(const Network& net);

}  // namespace restoro

#endif  // RESTORO_FLOW_H_
