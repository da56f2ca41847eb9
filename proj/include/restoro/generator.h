// Synthetic interdependent networks with integral parameters, including a
// 49/16/60-node water/gas/power testbed.

#ifndef RESTORO_GENERATOR_H_
#define RESTORO_GENERATOR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "restoro/network.h"

namespace restoro {

struct LayerTemplate {
  std::string name;
  int size = 0;
  double supply_fraction = 0.12;
  double demand_probability = 0.7;
  int demand_min = 1;
  int demand_max = 8;
  double supply_margin = 1.25;  // total supply / total demand
  double surplus_penalty = 1;
  double deficit_penalty = 100;
  int repair_min = 100;
  int repair_max = 300;
  double demand_completion_fraction = 0.0;
};

struct DependencyRule {
  int parent_layer = 0;
  int child_layer = 1;
  double fraction = 0.3;
  bool supply_only = false;  // only supply nodes of the child layer depend
};

struct GeneratorOptions {
  std::vector<LayerTemplate> layers;
  std::vector<DependencyRule> dependencies;
  int space_grid = 3;               // spaces form a grid x grid partition
  double extra_edge_probability = 0.3;
  int prep_min = 100;
  int prep_max = 300;
};

// Layers l0, l1, ... of the given sizes; layer k depends on layer k-1.
GeneratorOptions generic_options(const std::vector<int>& sizes);
// water 49, gas 16, power 60; water depends on power, gas-fired power
// supply depends on gas, gas is independent.
GeneratorOptions shelby_like_options();

// Always returns a spec that passes validate().
NetworkSpec generate_network(const GeneratorOptions& options,
                             std::uint64_t seed);

}  // namespace restoro

#endif  // RESTORO_GENERATOR_H_
