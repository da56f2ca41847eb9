#include "restoro/solver.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include "restoro/text_util.h"

namespace restoro {
namespace {

double tie_eps(double value) { return 1e-9 * std::max(1.0, std::abs(value)); }

void check_problem(const Network& net, const DamageScenario& scenario,
                   int resource_cap, int horizon) {
  scenario.initial.check_dims(net);
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (resource_cap < 0) throw std::invalid_argument("resource cap must be >= 0");
}

// Step-cost bookkeeping over the damaged elements of one scenario. Subsets
// are tracked as flags indexed by position in `damaged`.
class StepEvaluator {
 public:
  StepEvaluator(const Network& net, const DamageScenario& scenario)
      : net_(net),
        scenario_(scenario),
        damaged_(scenario.damaged_elements(net)) {}

  const std::vector<int>& damaged() const { return damaged_; }
  int size() const { return static_cast<int>(damaged_.size()); }

  FunctionalityState state(const std::vector<std::uint8_t>& repaired) const {
    FunctionalityState s = scenario_.initial;
    for (int i = 0; i < size(); ++i) {
      if (repaired[i]) s.set_element(net_, damaged_[i], true);
    }
    return s;
  }

  double operating(const std::vector<std::uint8_t>& repaired) const {
    return operating_cost(net_, state(repaired), &cache_).total();
  }

  // Repair plus first-time prep cost of `subset` given the spaces already
  // prepared in `prepared`.
  double works(const std::vector<int>& subset,
               const std::vector<std::uint8_t>& prepared) const {
    double cost = 0.0;
    std::vector<int> fresh;
    for (int i : subset) {
      cost += net_.element_repair_cost(damaged_[i]);
      const int s = net_.element_space(damaged_[i]);
      if (!prepared[s] && std::find(fresh.begin(), fresh.end(), s) == fresh.end()) {
        fresh.push_back(s);
        cost += net_.space_prep_cost(s);
      }
    }
    return cost;
  }

 private:
  const Network& net_;
  const DamageScenario& scenario_;
  std::vector<int> damaged_;
  mutable LayerFlowCache cache_;
};

}  // namespace

std::vector<int> DamageScenario::damaged_elements(const Network& net) const {
  initial.check_dims(net);
  std::vector<int> out;
  for (int e = 0; e < net.element_count(); ++e) {
    if (!initial.element_up(net, e)) out.push_back(e);
  }
  return out;
}

CostBreakdown plan_cost(const Network& net, const DamageScenario& scenario,
                        const std::vector<int>& repair_time, int resource_cap,
                        int horizon) {
  return make_plan(net, scenario, repair_time, resource_cap, horizon).costs;
}

RestorationPlan make_plan(const Network& net, const DamageScenario& scenario,
                          std::vector<int> repair_time, int resource_cap,
                          int horizon) {
  check_problem(net, scenario, resource_cap, horizon);
  if (static_cast<int>(repair_time.size()) != net.element_count()) {
    throw std::invalid_argument("repair assignment does not match network");
  }
  std::vector<int> per_step(horizon + 1, 0);
  std::vector<int> first_repair(net.space_count(), kNever);
  for (int e = 0; e < net.element_count(); ++e) {
    const int t = repair_time[e];
    if (scenario.initial.element_up(net, e)) {
      if (t != kUnassigned) {
        throw std::invalid_argument("repair of undamaged element " +
                                    std::to_string(e));
      }
      continue;
    }
    if (t == kNever) continue;
    if (t < 1 || t > horizon) {
      throw std::invalid_argument("repair step " + std::to_string(t) +
                                  " of element " + std::to_string(e) +
                                  " outside 1.." + std::to_string(horizon));
    }
    if (++per_step[t] > resource_cap) {
      throw std::invalid_argument("resource cap violated at step " +
                                  std::to_string(t));
    }
    int& first = first_repair[net.element_space(e)];
    if (first == kNever || t < first) first = t;
  }

  RestorationPlan plan;
  plan.repair_time = std::move(repair_time);
  plan.horizon = horizon;
  FunctionalityState state = scenario.initial;
  for (int t = 0; t <= horizon; ++t) {
    StepCost step;
    for (int e = 0; e < net.element_count(); ++e) {
      if (plan.repair_time[e] == t && t > 0) {
        state.set_element(net, e, true);
        step.repair += net.element_repair_cost(e);
      }
    }
    for (int s = 0; s < net.space_count(); ++s) {
      if (first_repair[s] == t) step.preparation += net.space_prep_cost(s);
    }
    OperatingCost oc = operating_cost(net, state);
    step.flow = oc.flow;
    step.imbalance = oc.imbalance;
    plan.costs.steps.push_back(step);
    plan.costs.total += step.total();
    plan.states.push_back(state);
    plan.effective_states.push_back(std::move(oc.effective));
  }
  return plan;
}

RestorationPlan solve_exact(const Network& net, const DamageScenario& scenario,
                            int resource_cap, int horizon,
                            const SolverLimits& limits) {
  check_problem(net, scenario, resource_cap, horizon);
  StepEvaluator eval(net, scenario);
  const int d = eval.size();
  if (d > limits.max_damaged) {
    throw CapabilityError("exact mode supports at most " +
                          std::to_string(limits.max_damaged) +
                          " damaged elements, instance has " +
                          std::to_string(d));
  }
  if (horizon > limits.max_horizon) {
    throw CapabilityError("exact mode supports horizons up to " +
                          std::to_string(limits.max_horizon) + ", got " +
                          std::to_string(horizon));
  }

  const unsigned full = (1u << d) - 1;
  auto flags = [d](unsigned mask) {
    std::vector<std::uint8_t> f(d);
    for (int i = 0; i < d; ++i) f[i] = (mask >> i) & 1u;
    return f;
  };
  std::vector<double> op_cache(full + 1, std::numeric_limits<double>::quiet_NaN());
  auto op = [&](unsigned mask) {
    double& v = op_cache[mask];
    if (std::isnan(v)) v = eval.operating(flags(mask));
    return v;
  };
  auto works = [&](unsigned mask, unsigned subset) {
    std::vector<int> idx;
    for (int i = 0; i < d; ++i) {
      if ((subset >> i) & 1u) idx.push_back(i);
    }
    std::vector<std::uint8_t> prepared(net.space_count(), 0);
    for (int i = 0; i < d; ++i) {
      if ((mask >> i) & 1u) prepared[net.element_space(eval.damaged()[i])] = 1;
    }
    return eval.works(idx, prepared);
  };

  // Operating cost of any state is at least the relaxed healthy cost.
  const double step_bound = relaxed_healthy_cost(net);

  const RestorationPlan heuristic =
      solve_iterative(net, scenario, resource_cap, horizon);
  const double upper = heuristic.costs.total;

  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_times;
  std::vector<int> times(d, kNever);
  // kNever ranks after every step.
  auto lex_less = [horizon](const std::vector<int>& a,
                            const std::vector<int>& b) {
    auto key = [horizon](int v) { return v == kNever ? horizon + 1 : v; };
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (key(a[i]) != key(b[i])) return key(a[i]) < key(b[i]);
    }
    return false;
  };
  // Cheapest accumulated cost on reaching (t, mask) and the times of that
  // prefix. Elements outside the mask are still kNever in both, so a plain
  // lexicographic comparison ranks the prefixes.
  std::vector<std::vector<double>> seen(
      horizon + 2, std::vector<double>(full + 1,
                                       std::numeric_limits<double>::infinity()));
  std::vector<std::vector<std::vector<int>>> seen_times(
      horizon + 2, std::vector<std::vector<int>>(full + 1));

  // Ties with the incumbent survive so the lexicographic rule can see them.
  auto prune = [&](double lower) {
    return found ? lower > best + tie_eps(best) : lower > upper + tie_eps(upper);
  };
  auto offer = [&](double total) {
    const bool better = !found || total < best - tie_eps(best);
    const bool tie = found && !better && total <= best + tie_eps(best);
    if (better || (tie && lex_less(times, best_times))) {
      found = true;
      best = total;
      best_times = times;
    }
  };

  std::function<void(int, unsigned, double)> search;
  search = [&](int t, unsigned mask, double acc) {
    if (t > horizon) {
      offer(acc);
      return;
    }
    if (mask == full) {
      offer(acc + (horizon - t + 1) * op(full));
      return;
    }
    double& seen_acc = seen[t][mask];
    std::vector<int>& seen_prefix = seen_times[t][mask];
    if (seen_acc < acc - tie_eps(acc)) return;
    if (seen_acc <= acc + tie_eps(acc) && !lex_less(times, seen_prefix)) return;
    seen_acc = acc;
    seen_prefix = times;
    if (prune(acc + (horizon - t + 1) * step_bound)) return;

    std::vector<int> remaining;
    for (int i = 0; i < d; ++i) {
      if (!((mask >> i) & 1u)) remaining.push_back(i);
    }
    // Subsets in lexicographic order of the resulting repair-time vector:
    // including an element before excluding it.
    std::function<void(std::size_t, unsigned, int)> choose;
    choose = [&](std::size_t pos, unsigned subset, int used) {
      if (pos == remaining.size()) {
        const unsigned next = mask | subset;
        const double step = works(mask, subset) + op(next);
        search(t + 1, next, acc + step);
        return;
      }
      const int i = remaining[pos];
      if (used < resource_cap) {
        times[i] = t;
        choose(pos + 1, subset | (1u << i), used + 1);
        times[i] = kNever;
      }
      choose(pos + 1, subset, used);
    };
    choose(0, 0u, 0);
  };
  search(1, 0u, op(0u));

  if (!found) return heuristic;
  std::vector<int> repair_time(net.element_count(), kUnassigned);
  for (int i = 0; i < d; ++i) repair_time[eval.damaged()[i]] = best_times[i];
  return make_plan(net, scenario, std::move(repair_time), resource_cap,
                   horizon);
}

RestorationPlan solve_iterative(const Network& net,
                                const DamageScenario& scenario,
                                int resource_cap, int horizon,
                                int exact_subset_limit) {
  check_problem(net, scenario, resource_cap, horizon);
  StepEvaluator eval(net, scenario);
  const int d = eval.size();
  std::vector<std::uint8_t> repaired(d, 0);
  std::vector<std::uint8_t> prepared(net.space_count(), 0);
  std::vector<int> times(d, kNever);

  auto step_cost = [&](const std::vector<int>& subset) {
    std::vector<std::uint8_t> next = repaired;
    for (int i : subset) next[i] = 1;
    return eval.works(subset, prepared) + eval.operating(next);
  };

  for (int t = 1; t <= horizon; ++t) {
    std::vector<int> remaining;
    for (int i = 0; i < d; ++i) {
      if (!repaired[i]) remaining.push_back(i);
    }
    const int r = static_cast<int>(remaining.size());
    const int k = std::min(resource_cap, r);
    if (k == 0) break;

    std::vector<int> chosen;
    if (r <= exact_subset_limit) {
      // All k-subsets of the remaining elements in lexicographic order.
      std::vector<int> pick(k);
      for (int j = 0; j < k; ++j) pick[j] = j;
      double best = std::numeric_limits<double>::infinity();
      while (true) {
        std::vector<int> subset;
        for (int j : pick) subset.push_back(remaining[j]);
        const double c = step_cost(subset);
        if (chosen.empty() || c < best - tie_eps(best)) {
          best = c;
          chosen = std::move(subset);
        }
        int j = k - 1;
        while (j >= 0 && pick[j] == r - k + j) --j;
        if (j < 0) break;
        ++pick[j];
        for (int m = j + 1; m < k; ++m) pick[m] = pick[m - 1] + 1;
      }
    } else {
      std::vector<std::uint8_t> in(d, 0);
      double current = 0.0;
      for (int j = 0; j < k; ++j) {
        int best_i = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i : remaining) {
          if (in[i]) continue;
          chosen.push_back(i);
          const double c = step_cost(chosen);
          chosen.pop_back();
          if (best_i < 0 || c < best - tie_eps(best)) {
            best = c;
            best_i = i;
          }
        }
        chosen.push_back(best_i);
        in[best_i] = 1;
        current = best;
      }
      // Best-improvement pairwise swaps to a local optimum.
      while (true) {
        int out_pos = -1;
        int swap_in = -1;
        double best = current;
        for (int p = 0; p < k; ++p) {
          const int old = chosen[p];
          for (int i : remaining) {
            if (in[i]) continue;
            chosen[p] = i;
            const double c = step_cost(chosen);
            if (c < best - tie_eps(best)) {
              best = c;
              out_pos = p;
              swap_in = i;
            }
          }
          chosen[p] = old;
        }
        if (out_pos < 0) break;
        in[chosen[out_pos]] = 0;
        in[swap_in] = 1;
        chosen[out_pos] = swap_in;
        current = best;
      }
      std::sort(chosen.begin(), chosen.end());
    }
    for (int i : chosen) {
      repaired[i] = 1;
      times[i] = t;
      prepared[net.element_space(eval.damaged()[i])] = 1;
    }
  }

  std::vector<int> repair_time(net.element_count(), kUnassigned);
  for (int i = 0; i < d; ++i) repair_time[eval.damaged()[i]] = times[i];
  return make_plan(net, scenario, std::move(repair_time), resource_cap,
                   horizon);
}

int recovery_time(const RestorationPlan& plan) {
  int out = 0;
  for (int t : plan.repair_time) {
    if (t == kNever) return kNever;
    out = std::max(out, t);
  }
  return out;
}

void write_plan_csv(const Network& net, const RestorationPlan& plan,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write plan file " + path.string());
  out << "element_id,layer,repair_step\n";
  for (int e = 0; e < static_cast<int>(plan.repair_time.size()); ++e) {
    const int t = plan.repair_time[e];
    if (t == kUnassigned) continue;
    out << e << ',' << net.spec().layers[net.element_layer(e)] << ','
        << (t == kNever ? std::string("never") : std::to_string(t)) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_cost_csv(const CostBreakdown& costs,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cost file " + path.string());
  out << "t,Cf,Cr,Cu,Cg\n";
  for (std::size_t t = 0; t < costs.steps.size(); ++t) {
    const StepCost& s = costs.steps[t];
    out << t << ',' << format_double(s.flow) << ',' << format_double(s.repair)
        << ',' << format_double(s.imbalance) << ','
        << format_double(s.preparation) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace restoro
