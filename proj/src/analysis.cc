#include "restoro/analysis.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "restoro/text_util.h"

namespace restoro {

TradeoffCurve tradeoff(const Network& net, const DamageScenario& scenario,
                       std::vector<int> resource_caps,
                       const std::map<int, SurrogateModel>& models,
                       SolverMode mode, int horizon, int jobs) {
  std::sort(resource_caps.begin(), resource_caps.end());
  if (std::adjacent_find(resource_caps.begin(), resource_caps.end()) !=
      resource_caps.end()) {
    throw std::invalid_argument("duplicate resource cap in trade-off set");
  }
  for (int rc : resource_caps) {
    if (!models.contains(rc)) {
      throw std::invalid_argument("no surrogate model for R_c=" +
                                  std::to_string(rc));
    }
  }
  TradeoffCurve curve;
  curve.scenario = scenario.metadata;
  curve.points.resize(resource_caps.size());
  std::vector<std::exception_ptr> errors(resource_caps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < resource_caps.size(); i = next++) {
      try {
        const int rc = resource_caps[i];
        const RestorationPlan plan =
            mode == SolverMode::kExact
                ? solve_exact(net, scenario, rc, horizon)
                : solve_iterative(net, scenario, rc, horizon);
        TradeoffPoint& p = curve.points[i];
        p.resource_cap = rc;
        p.solver_time = recovery_time(plan);
        p.solver_cost = plan.costs.total;
        p.surrogate_time = surrogate_recovery_time(
            predict_plan(models.at(rc), net, scenario));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return curve;
}

int surrogate_recovery_time(const std::vector<int>& predicted_steps) {
  int out = 0;
  for (int s : predicted_steps) out = std::max(out, s);
  return out;
}

void write_tradeoff_csv(const TradeoffCurve& curve,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve file " + path.string());
  out << "Rc,solver_time,nn_time,solver_cost\n";
  for (const auto& p : curve.points) {
    out << p.resource_cap << ','
        << (p.solver_time == kNever ? std::string("never")
                                    : std::to_string(p.solver_time))
        << ',' << p.surrogate_time << ',' << format_double(p.solver_cost)
        << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

CategoryPartition CategoryPartition::from_network(const Network& net) {
  return {net.spec().layers, net.layer_sizes()};
}

int CategoryPartition::total() const {
  int n = 0;
  for (int s : sizes) n += s;
  return n;
}

std::vector<int> CategoryPartition::boundaries() const {
  std::vector<int> out;
  int acc = 0;
  for (std::size_t c = 0; c + 1 < sizes.size(); ++c) {
    acc += sizes[c];
    out.push_back(acc);
  }
  return out;
}

BlockAggregate block_aggregate(const SurrogateModel& model,
                               const CategoryPartition& partition,
                               bool signed_sums) {
  if (model.layer_count() != 2) {
    throw std::invalid_argument(
        "block aggregation needs a model with exactly one hidden layer");
  }
  const Eigen::MatrixXd& w1 = model.weights[0];  // hidden x input
  const Eigen::MatrixXd& w2 = model.weights[1];  // output x hidden
  if (partition.total() != w1.cols() || partition.total() != w2.rows()) {
    throw std::invalid_argument("partition does not cover the model's nodes");
  }
  auto mass = [signed_sums](double w) { return signed_sums ? w : std::abs(w); };
  const auto hidden = w1.rows();
  const auto n_cat = partition.sizes.size();
  BlockAggregate agg;
  agg.categories = partition.names;
  agg.input_mass.assign(hidden, std::vector<double>(n_cat, 0.0));
  agg.output_mass.assign(hidden, std::vector<double>(n_cat, 0.0));
  for (Eigen::Index j = 0; j < hidden; ++j) {
    int offset = 0;
    for (std::size_t c = 0; c < n_cat; ++c) {
      for (int i = offset; i < offset + partition.sizes[c]; ++i) {
        agg.input_mass[j][c] += mass(w1(j, i));
        agg.output_mass[j][c] += mass(w2(i, j));
      }
      offset += partition.sizes[c];
    }
  }
  return agg;
}

void write_aggregate_csv(const BlockAggregate& aggregate,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write aggregate file " + path.string());
  out << "neuron,side,category,mass\n";
  for (std::size_t j = 0; j < aggregate.input_mass.size(); ++j) {
    for (int side = 0; side < 2; ++side) {
      const auto& row = side == 0 ? aggregate.input_mass[j]
                                  : aggregate.output_mass[j];
      for (std::size_t c = 0; c < row.size(); ++c) {
        out << j << ',' << (side == 0 ? "input" : "output") << ','
            << aggregate.categories[c] << ',' << format_double(row[c]) << "\n";
      }
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Eigen::MatrixXd recovery_operator(const SurrogateModel& model) {
  Eigen::MatrixXd op = model.weights.front();
  for (int l = 1; l < model.layer_count(); ++l) {
    op = (model.weights[l] * op).eval();
  }
  return op;
}

double operator_fidelity(const SurrogateModel& model,
                         const Eigen::MatrixXd& op,
                         const Eigen::MatrixXd& inputs) {
  const Eigen::MatrixXd full = forward_batch(model, inputs);
  const Eigen::MatrixXd linear = op * inputs;
  const double mean = full.mean();
  const double ss_tot = (full.array() - mean).square().sum();
  const double ss_res = (full - linear).squaredNorm();
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

void write_operator_csv(const Eigen::MatrixXd& op,
                        const CategoryPartition& partition,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write operator file " + path.string());
  out << "# restoro recovery operator " << op.rows() << "x" << op.cols()
      << "\n# categories";
  for (std::size_t c = 0; c < partition.names.size(); ++c) {
    out << ' ' << partition.names[c] << ':' << partition.sizes[c];
  }
  out << "\n# boundaries_after_columns";
  for (int b : partition.boundaries()) out << ' ' << b;
  out << "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < op.rows(); ++r) {
    for (Eigen::Index c = 0; c < op.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", op(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace restoro
