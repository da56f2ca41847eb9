// Resource trade-off curves and weight-based interpretability of trained
// surrogates.

#ifndef RESTORO_ANALYSIS_H_
#define RESTORO_ANALYSIS_H_

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "restoro/scenario.h"
#include "restoro/surrogate.h"

namespace restoro {

struct TradeoffPoint {
  int resource_cap = 0;
  int solver_time = 0;
  int surrogate_time = 0;
  double solver_cost = 0.0;
};

struct TradeoffCurve {
  std::vector<TradeoffPoint> points;
  std::string scenario;
};

// One point per R_c (sorted ascending, duplicates rejected). Throws
// std::invalid_argument when `models` lacks an entry for some R_c.
TradeoffCurve tradeoff(const Network& net, const DamageScenario& scenario,
                       std::vector<int> resource_caps,
                       const std::map<int, SurrogateModel>& models,
                       SolverMode mode, int horizon = kDefaultHorizon,
                       int jobs = 1);

// Max predicted step over damaged nodes; 0 when nothing is damaged.
int surrogate_recovery_time(const std::vector<int>& predicted_steps);

// Rc,solver_time,nn_time,solver_cost
void write_tradeoff_csv(const TradeoffCurve& curve,
                        const std::filesystem::path& path);

// Contiguous node categories in canonical order, e.g. water/gas/power.
struct CategoryPartition {
  std::vector<std::string> names;
  std::vector<int> sizes;

  static CategoryPartition from_network(const Network& net);
  int total() const;
  // Cumulative boundaries: 49/16/60 -> {49, 65}.
  std::vector<int> boundaries() const;
};

struct BlockAggregate {
  // [neuron][category]
  std::vector<std::vector<double>> input_mass;
  std::vector<std::vector<double>> output_mass;
  std::vector<std::string> categories;
};

// Per hidden neuron j: input mass of category C = sum_{i in C} |W1(j,i)|,
// output mass = sum_{k in C} |W2(k,j)| (signed sums when `signed_sums`).
// Throws std::invalid_argument unless the model has exactly one hidden layer.
BlockAggregate block_aggregate(const SurrogateModel& model,
                               const CategoryPartition& partition,
                               bool signed_sums = false);

// neuron,side,category,mass
void write_aggregate_csv(const BlockAggregate& aggregate,
                         const std::filesystem::path& path);

// Product W_{L+1} ... W_1, ignoring biases and activations.
Eigen::MatrixXd recovery_operator(const SurrogateModel& model);

// R^2 of operator * x against the full model output over the given inputs
// (columns), pooled over all output coordinates.
double operator_fidelity(const SurrogateModel& model,
                         const Eigen::MatrixXd& op,
                         const Eigen::MatrixXd& inputs);

// Row-major CSV of the operator with category boundaries in header comments.
void write_operator_csv(const Eigen::MatrixXd& op,
                        const CategoryPartition& partition,
                        const std::filesystem::path& path);

}  // namespace restoro

#endif  // RESTORO_ANALYSIS_H_
