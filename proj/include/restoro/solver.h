// Time-phased restoration planning under a per-step resource cap.
//
// Cost of a plan over t = 0..T_max:
//   sum_t  C_f^t + C_u^t   (operating cost of the state after repairs through t)
//        + C_r^t           (repair cost of elements restored at t)
//        + C_g^t           (prep cost of spaces whose first repair is at t)
// Each repair uses one unit of the shared resource cap R_c.

#ifndef RESTORO_SOLVER_H_
#define RESTORO_SOLVER_H_

#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "restoro/flow.h"
#include "restoro/network.h"

namespace restoro {

// Repair step of an element that stays damaged for the whole horizon.
inline constexpr int kNever = -1;
// repair_time entry for an undamaged element.
inline constexpr int kUnassigned = 0;
inline constexpr int kDefaultHorizon = 20;

class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DamageScenario {
  FunctionalityState initial;
  std::optional<int> magnitude;
  std::string metadata;

  std::vector<int> damaged_elements(const Network& net) const;
};

struct StepCost {
  double flow = 0.0;
  double repair = 0.0;
  double imbalance = 0.0;
  double preparation = 0.0;

  double total() const { return flow + repair + imbalance + preparation; }
};

struct CostBreakdown {
  std::vector<StepCost> steps;  // t = 0..T_max
  double total = 0.0;
};

struct RestorationPlan {
  // Per element in canonical order: kUnassigned for undamaged elements,
  // otherwise a step in 1..T_max or kNever.
  std::vector<int> repair_time;
  // Physical repair status per t = 0..T_max.
  std::vector<FunctionalityState> states;
  // Interdependency-consistent state per t.
  std::vector<FunctionalityState> effective_states;
  CostBreakdown costs;
  int horizon = 0;
};

struct SolverLimits {
  int max_damaged = 12;
  int max_horizon = 6;
};

// Throws std::invalid_argument on cap violations, repairs of undamaged
// elements or steps outside 1..T_max.
CostBreakdown plan_cost(const Network& net, const DamageScenario& scenario,
                        const std::vector<int>& repair_time, int resource_cap,
                        int horizon);

// Builds the full plan (states and costs) from a repair assignment.
RestorationPlan make_plan(const Network& net, const DamageScenario& scenario,
                          std::vector<int> repair_time, int resource_cap,
                          int horizon);

// Globally optimal plan by depth-first branch-and-bound. Among equal-cost
// optima the plan whose repair-time vector (canonical order, kNever last) is
// lexicographically smallest wins. Throws CapabilityError above `limits`.
RestorationPlan solve_exact(const Network& net, const DamageScenario& scenario,
                            int resource_cap, int horizon,
                            const SolverLimits& limits = {});

// Rolling-horizon plan: each step restores min(R_c, remaining) elements
// chosen to minimize that step's cost, by exact subset enumeration when at
// most `exact_subset_limit` elements remain, greedy plus pairwise swaps
// otherwise.
RestorationPlan solve_iterative(const Network& net,
                                const DamageScenario& scenario,
                                int resource_cap, int horizon,
                                int exact_subset_limit = 12);

// Last repair step; 0 for empty plans and kNever if anything is never fixed.
int recovery_time(const RestorationPlan& plan);

// element_id,layer,repair_step  (damaged elements only)
void write_plan_csv(const Network& net, const RestorationPlan& plan,
                    const std::filesystem::path& path);
// t,Cf,Cr,Cu,Cg
void write_cost_csv(const CostBreakdown& costs,
                    const std::filesystem::path& path);

}  // namespace restoro

#endif  // RESTORO_SOLVER_H_
