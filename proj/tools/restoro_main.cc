// restoro: generation, solving, dataset building, surrogate training and
// analysis from one binary.
//
// Exit codes: 0 success, 1 I/O, 2 parse/validation, 3 solver capability.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "restoro/analysis.h"
#include "restoro/flow.h"
#include "restoro/generator.h"
#include "restoro/network.h"
#include "restoro/random.h"
#include "restoro/scenario.h"
#include "restoro/solver.h"
#include "restoro/surrogate.h"
#include "restoro/text_util.h"

namespace fs = std::filesystem;
using namespace restoro;

namespace {

constexpr const char* kVersionText =
    "restoro 1.0.0\n"
    "network format: restoro network v1\n"
    "scenario format: restoro scenarios v1\n"
    "dataset format: restoro dataset v1\n"
    "model format: surrogate-v1\n";

enum ExitCode { kOk = 0, kIo = 1, kInvalid = 2, kCapability = 3 };

// Thrown for bad flag combinations; reported like a validation failure.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<int> int_list(const std::string& text, const char* what) {
  std::vector<int> out = parse_int_list(text);
  if (out.empty()) {
    throw UsageError(std::string("empty ") + what + " list '" + text + "'");
  }
  return out;
}

std::pair<int, int> int_range(const std::string& text) {
  const std::vector<int> v = int_list(text, "range");
  return {v.front(), v.back()};
}

// `{rc}` in a path template is replaced by the cap. Without a placeholder the
// path is used as is for a single cap, or gets an `_rcN` suffix before the
// extension when several caps share it.
fs::path tagged_path(const std::string& pattern, int rc, bool several) {
  const std::string key = "{rc}";
  if (const auto pos = pattern.find(key); pos != std::string::npos) {
    std::string out = pattern;
    out.replace(pos, key.size(), std::to_string(rc));
    return out;
  }
  if (!several) return pattern;
  const fs::path p(pattern);
  return p.parent_path() /
         (p.stem().string() + "_rc" + std::to_string(rc) + p.extension().string());
}

Encoding encoding_flag(const std::string& s) {
  if (s == "damaged1") return Encoding::kDamagedIs1;
  if (s == "damaged0") return Encoding::kDamagedIs0;
  return parse_encoding(s);
}

const DamageScenario& pick(const std::vector<ScenarioEntry>& entries,
                           int index) {
  if (index < 0 || index >= static_cast<int>(entries.size())) {
    throw UsageError("scenario index " + std::to_string(index) +
                     " out of range (file has " +
                     std::to_string(entries.size()) + ")");
  }
  return entries[index].scenario;
}

struct Globals {
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------- gen-network

struct GenNetworkArgs {
  std::string preset;
  int layers = 0;
  std::string sizes;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void gen_network(const Globals& g, const GenNetworkArgs& a) {
  GeneratorOptions options;
  if (!a.preset.empty()) {
    if (a.preset != "shelby-like") {
      throw UsageError("unknown preset '" + a.preset + "'");
    }
    options = shelby_like_options();
  } else {
    if (a.sizes.empty()) throw UsageError("need --preset or --sizes");
    const std::vector<int> sizes = int_list(a.sizes, "size");
    if (a.layers != 0 && a.layers != static_cast<int>(sizes.size())) {
      throw ValidationError({"--layers " + std::to_string(a.layers) +
                             " does not match " +
                             std::to_string(sizes.size()) + " sizes"});
    }
    options = generic_options(sizes);
  }
  const std::uint64_t seed =
      a.seed ? *a.seed : derive_seed(g.seed, "gen-network");
  const NetworkSpec spec = generate_network(options, seed);
  validate(spec);
  save_network(spec, a.out);
  std::cout << "wrote " << a.out << " (" << spec.nodes.size() << " nodes, "
            << spec.arcs.size() << " arcs)\n";
}

// -------------------------------------------------------------- gen-scenarios

struct GenScenariosArgs {
  std::string network;
  int magnitude = 6;
  int count = 100;
  std::string augment_from;
  int copies = 1;
  std::string flips = "1..3";
  bool spatial = false;
  bool damage_arcs = false;
  std::optional<std::uint64_t> seed;
  std::string encoding = "damaged0";
  std::string out;
};

void gen_scenarios(const Globals& g, const GenScenariosArgs& a) {
  const Network net(load_network(a.network));
  const std::uint64_t seed =
      a.seed ? *a.seed : derive_seed(g.seed, "gen-scenarios");
  std::vector<DamageScenario> out;
  ScenarioFileInfo info;
  info.encoding = encoding_flag(a.encoding);
  info.seed = seed;
  if (!a.augment_from.empty()) {
    ScenarioFileInfo source_info;
    const auto source = read_scenarios(a.augment_from, net, &source_info);
    const auto flips = int_range(a.flips);
    for (std::size_t i = 0; i < source.size(); ++i) {
      for (int c = 0; c < a.copies; ++c) {
        const std::uint64_t s =
            derive_seed(derive_seed(seed, i), static_cast<std::uint64_t>(c));
        out.push_back(augment(net, source[i].scenario, flips, s));
      }
    }
    info.magnitude = source_info.magnitude;
    info.provenance = Provenance::kAugmented;
  } else {
    DamageModel model = DamageModel::defaults();
    if (a.spatial) model.spatial = SpatialKernel{};
    model.damage_arcs = a.damage_arcs;
    for (int i = 0; i < a.count; ++i) {
      out.push_back(generate_scenario(net, model, a.magnitude,
                                      derive_seed(seed, std::uint64_t(i))));
    }
    info.magnitude = a.magnitude;
  }
  write_scenarios(a.out, out, info);
  std::cout << "wrote " << out.size() << " scenarios to " << a.out << "\n";
}

// ---------------------------------------------------------------------- solve

struct SolveArgs {
  std::string network;
  std::string scenario;
  int index = 0;
  int rc = 1;
  int tmax = kDefaultHorizon;
  std::string mode = "iterative";
  int max_damaged = SolverLimits{}.max_damaged;
  int max_horizon = SolverLimits{}.max_horizon;
  std::string out;
  std::string costs;
};

void solve(const SolveArgs& a) {
  const Network net(load_network(a.network));
  const auto entries = read_scenarios(a.scenario, net);
  const DamageScenario& scenario = pick(entries, a.index);
  const RestorationPlan plan =
      parse_solver_mode(a.mode) == SolverMode::kExact
          ? solve_exact(net, scenario, a.rc, a.tmax,
                        {a.max_damaged, a.max_horizon})
          : solve_iterative(net, scenario, a.rc, a.tmax);
  write_plan_csv(net, plan, a.out);
  if (!a.costs.empty()) write_cost_csv(plan.costs, a.costs);
  const int rt = recovery_time(plan);
  std::cout << "total cost " << format_double(plan.costs.total)
            << ", recovery time "
            << (rt == kNever ? std::string("never") : std::to_string(rt))
            << "\n";
}

// -------------------------------------------------------------- build-dataset

struct BuildDatasetArgs {
  std::string network;
  std::vector<std::string> scenarios;
  std::string rc = "5";
  int tmax = kDefaultHorizon;
  std::string mode = "iterative";
  std::string encoding = "damaged1";
  int max_damaged = SolverLimits{}.max_damaged;
  int max_horizon = SolverLimits{}.max_horizon;
  int jobs = 1;
  std::string out;
};

void build_dataset_cmd(const BuildDatasetArgs& a) {
  const Network net(load_network(a.network));
  std::vector<ScenarioEntry> entries;
  for (const auto& file : a.scenarios) {
    auto more = read_scenarios(file, net);
    entries.insert(entries.end(), more.begin(), more.end());
  }
  DatasetOptions options;
  options.mode = parse_solver_mode(a.mode);
  options.horizon = a.tmax;
  options.encoding = encoding_flag(a.encoding);
  options.limits = {a.max_damaged, a.max_horizon};
  options.jobs = a.jobs;
  const std::vector<int> caps = int_list(a.rc, "R_c");
  for (int rc : caps) {
    const Dataset ds = build_dataset(net, entries, rc, options);
    const fs::path path = tagged_path(a.out, rc, caps.size() > 1);
    write_dataset(ds, path);
    std::cout << "wrote " << ds.records.size() << " records to "
              << path.string() << "\n";
  }
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  std::string dataset;
  std::string rc = "5";
  std::string hidden = "400,400,400";
  int epochs = 200;
  int batch = 32;
  double lr = 0.01;
  int patience = 10;
  double validation = 0.1;
  bool masked = false;
  int tmax = kDefaultHorizon;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void train_cmd(const Globals& g, const TrainArgs& a) {
  const std::vector<int> caps = int_list(a.rc, "R_c");
  const std::vector<int> hidden = int_list(a.hidden, "hidden width");
  const bool several = caps.size() > 1;
  const std::uint64_t root = a.seed ? *a.seed : derive_seed(g.seed, "train");
  for (int rc : caps) {
    const Dataset ds = read_dataset(tagged_path(a.dataset, rc, several));
    if (ds.records.empty()) throw UsageError("dataset is empty");
    for (const auto& r : ds.records) {
      if (r.resource_cap != rc) {
        throw ValidationError({"dataset record has R_c=" +
                               std::to_string(r.resource_cap) +
                               ", expected " + std::to_string(rc)});
      }
    }
    ModelShape shape;
    shape.dims.push_back(ds.node_count());
    shape.dims.insert(shape.dims.end(), hidden.begin(), hidden.end());
    shape.dims.push_back(ds.node_count());
    shape.encoding = ds.encoding;
    shape.resource_cap = rc;
    shape.horizon = a.tmax;
    const std::uint64_t seed = derive_seed(root, static_cast<std::uint64_t>(rc));
    SurrogateModel model = init_model(shape, derive_seed(seed, "init"));
    TrainConfig config;
    config.adam.learning_rate = a.lr;
    config.batch_size = a.batch;
    config.max_epochs = a.epochs;
    config.patience = a.patience;
    config.validation_fraction = a.validation;
    config.masked_loss = a.masked;
    config.seed = derive_seed(seed, "batches");
    const TrainingHistory h = train(model, ds, config);
    const fs::path path = tagged_path(a.out, rc, several);
    save_model(model, path);
    std::printf("R_c=%d epochs=%zu best_epoch=%d train_mse=%.6g", rc,
                h.train_mse.size(), h.best_epoch,
                h.train_mse.empty() ? 0.0 : h.train_mse.back());
    if (!h.validation_mse.empty() && h.best_epoch >= 0) {
      std::printf(" val_mse=%.6g", h.validation_mse[h.best_epoch]);
    }
    std::printf(" -> %s\n", path.string().c_str());
  }
}

// ------------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string model;
  std::string dataset;
  std::string ar = "0,1,2,3";
  std::string out;
};

void evaluate_cmd(const EvaluateArgs& a) {
  const SurrogateModel model = load_model(a.model);
  Dataset ds = read_dataset(a.dataset);
  if (ds.encoding != model.encoding) ds = flip_encoding(ds);
  std::vector<std::vector<int>> predictions;
  std::vector<std::vector<int>> truths;
  for (const auto& r : ds.records) {
    predictions.push_back(predict_plan(model, r.input));
    truths.push_back(r.target);
  }
  const std::vector<int> margins = int_list(a.ar, "AR margin");
  std::string csv = "AR,accuracy\n";
  std::printf("%-4s %s\n", "AR", "accuracy");
  for (int r : margins) {
    const double acc = ar_accuracy(predictions, truths, r);
    std::printf("%-4d %.4f\n", r, acc);
    csv += std::to_string(r) + "," + format_double(acc) + "\n";
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    f << csv;
    if (!f) throw IoError("cannot write " + a.out);
  }
}

// ------------------------------------------------------------------- tradeoff

struct TradeoffArgs {
  std::string network;
  std::string scenario;
  int index = 0;
  std::string rc = "2..8";
  std::string models;
  std::string mode = "iterative";
  int tmax = kDefaultHorizon;
  int jobs = 1;
  std::string out;
};

void tradeoff_cmd(const TradeoffArgs& a) {
  const Network net(load_network(a.network));
  const auto entries = read_scenarios(a.scenario, net);
  const DamageScenario& scenario = pick(entries, a.index);
  const std::vector<int> caps = int_list(a.rc, "R_c");
  std::map<int, SurrogateModel> models;
  for (int rc : caps) {
    models.emplace(rc, load_model(tagged_path(a.models, rc, caps.size() > 1)));
  }
  const TradeoffCurve curve = tradeoff(net, scenario, caps, models,
                                       parse_solver_mode(a.mode), a.tmax,
                                       a.jobs);
  write_tradeoff_csv(curve, a.out);
  for (const auto& p : curve.points) {
    std::cout << "R_c=" << p.resource_cap << " solver="
              << (p.solver_time == kNever ? std::string("never")
                                          : std::to_string(p.solver_time))
              << " surrogate=" << p.surrogate_time << "\n";
  }
}

// ------------------------------------------------------------------- operator

struct OperatorArgs {
  std::string model;
  std::string network;
  std::string out;
  std::string aggregate;
  bool signed_sums = false;
};

void operator_cmd(const OperatorArgs& a) {
  const SurrogateModel model = load_model(a.model);
  CategoryPartition partition;
  if (!a.network.empty()) {
    partition = CategoryPartition::from_network(Network(load_network(a.network)));
  } else {
    partition = {{"all"}, {model.dims.front()}};
  }
  const Eigen::MatrixXd op = recovery_operator(model);
  write_operator_csv(op, partition, a.out);
  std::cout << "wrote " << op.rows() << "x" << op.cols() << " operator to "
            << a.out << "\n";
  if (!a.aggregate.empty()) {
    write_aggregate_csv(block_aggregate(model, partition, a.signed_sums),
                        a.aggregate);
    std::cout << "wrote aggregates to " << a.aggregate << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interdependent network restoration planning and surrogates",
               "restoro"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value configuration file");
  // Lists such as `rc = 2..8` or `sizes = 3,3` stay single values.
  app.get_config_formatter_base()->arrayDelimiter(';');
  app.set_version_flag("--version", std::string(kVersionText));

  Globals g;
  app.add_option("--seed", g.seed, "root seed")
      ->envname("RESTORO_SEED")
      ->capture_default_str();

  GenNetworkArgs gn;
  auto* c_gn = app.add_subcommand("gen-network", "generate a synthetic network");
  c_gn->add_option("--preset", gn.preset, "shelby-like");
  c_gn->add_option("--layers", gn.layers, "layer count (checked against --sizes)");
  c_gn->add_option("--sizes", gn.sizes, "nodes per layer, e.g. 3,3");
  c_gn->add_option("--seed", gn.seed, "generator seed (default: from root)");
  c_gn->add_option("--out", gn.out)->required();
  c_gn->callback([&] { gen_network(g, gn); });

  GenScenariosArgs gs;
  auto* c_gs = app.add_subcommand("gen-scenarios", "sample or augment damage scenarios");
  c_gs->add_option("--network", gs.network)->required();
  c_gs->add_option("--magnitude", gs.magnitude, "damage setting (6..9)")->capture_default_str();
  c_gs->add_option("--count", gs.count)->capture_default_str();
  c_gs->add_option("--augment", gs.augment_from, "scenario file to augment");
  c_gs->add_option("--copies", gs.copies, "augmented copies per scenario")->capture_default_str();
  c_gs->add_option("--flips", gs.flips, "bit flips per copy, lo..hi")->capture_default_str();
  c_gs->add_flag("--spatial", gs.spatial, "spatially correlated damage");
  c_gs->add_flag("--damage-arcs", gs.damage_arcs, "damage arcs as well as nodes");
  c_gs->add_option("--seed", gs.seed);
  c_gs->add_option("--encoding", gs.encoding, "damaged0 | damaged1")->capture_default_str();
  c_gs->add_option("--out", gs.out)->required();
  c_gs->callback([&] { gen_scenarios(g, gs); });

  SolveArgs sv;
  auto* c_sv = app.add_subcommand("solve", "plan the restoration of one scenario");
  c_sv->add_option("--network", sv.network)->required();
  c_sv->add_option("--scenario", sv.scenario)->required();
  c_sv->add_option("--index", sv.index, "scenario within the file")->capture_default_str();
  c_sv->add_option("--rc", sv.rc, "repairs per step")->capture_default_str();
  c_sv->add_option("--tmax", sv.tmax)->capture_default_str();
  c_sv->add_option("--mode", sv.mode, "exact | iterative")->capture_default_str();
  c_sv->add_option("--max-damaged", sv.max_damaged)->capture_default_str();
  c_sv->add_option("--max-horizon", sv.max_horizon)->capture_default_str();
  c_sv->add_option("--out", sv.out, "plan CSV")->required();
  c_sv->add_option("--costs", sv.costs, "per-step cost CSV");
  c_sv->callback([&] { solve(sv); });

  BuildDatasetArgs bd;
  auto* c_bd = app.add_subcommand("build-dataset", "label scenarios with the solver");
  c_bd->add_option("--network", bd.network)->required();
  c_bd->add_option("--scenarios", bd.scenarios)->required();
  c_bd->add_option("--rc", bd.rc, "caps, e.g. 5 or 2..8")->capture_default_str();
  c_bd->add_option("--tmax", bd.tmax)->capture_default_str();
  c_bd->add_option("--mode", bd.mode)->capture_default_str();
  c_bd->add_option("--encoding", bd.encoding)->capture_default_str();
  c_bd->add_option("--max-damaged", bd.max_damaged)->capture_default_str();
  c_bd->add_option("--max-horizon", bd.max_horizon)->capture_default_str();
  c_bd->add_option("--jobs", bd.jobs)->capture_default_str();
  c_bd->add_option("--out", bd.out, "dataset CSV; {rc} is replaced by the cap")->required();
  c_bd->callback([&] { build_dataset_cmd(bd); });

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "fit one surrogate per R_c");
  c_tr->add_option("--dataset", tr.dataset, "dataset CSV; {rc} is replaced by the cap")->required();
  c_tr->add_option("--rc", tr.rc)->capture_default_str();
  c_tr->add_option("--hidden", tr.hidden, "hidden widths")->capture_default_str();
  c_tr->add_option("--epochs", tr.epochs)->capture_default_str();
  c_tr->add_option("--batch", tr.batch)->capture_default_str();
  c_tr->add_option("--lr", tr.lr)->capture_default_str();
  c_tr->add_option("--patience", tr.patience)->capture_default_str();
  c_tr->add_option("--validation", tr.validation, "held-out fraction")->capture_default_str();
  c_tr->add_flag("--masked", tr.masked, "loss over damaged nodes only");
  c_tr->add_option("--tmax", tr.tmax)->capture_default_str();
  c_tr->add_option("--seed", tr.seed);
  c_tr->add_option("--out", tr.out, "model file; {rc} is replaced by the cap")->required();
  c_tr->callback([&] { train_cmd(g, tr); });

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "AR accuracy of a model on a dataset");
  c_ev->add_option("--model", ev.model)->required();
  c_ev->add_option("--dataset", ev.dataset)->required();
  c_ev->add_option("--ar", ev.ar, "margins")->capture_default_str();
  c_ev->add_option("--out", ev.out, "accuracy CSV");
  c_ev->callback([&] { evaluate_cmd(ev); });

  TradeoffArgs to;
  auto* c_to = app.add_subcommand("tradeoff", "recovery time against R_c");
  c_to->add_option("--network", to.network)->required();
  c_to->add_option("--scenario", to.scenario)->required();
  c_to->add_option("--index", to.index)->capture_default_str();
  c_to->add_option("--rc", to.rc)->capture_default_str();
  c_to->add_option("--models", to.models, "model file; {rc} is replaced by the cap")->required();
  c_to->add_option("--mode", to.mode)->capture_default_str();
  c_to->add_option("--tmax", to.tmax)->capture_default_str();
  c_to->add_option("--jobs", to.jobs)->capture_default_str();
  c_to->add_option("--out", to.out)->required();
  c_to->callback([&] { tradeoff_cmd(to); });

  OperatorArgs op;
  auto* c_op = app.add_subcommand("operator", "export the linear recovery operator");
  c_op->add_option("--model", op.model)->required();
  c_op->add_option("--network", op.network, "layer partition source");
  c_op->add_option("--out", op.out)->required();
  c_op->add_option("--aggregate", op.aggregate, "per-neuron category masses CSV");
  c_op->add_flag("--signed", op.signed_sums, "signed instead of absolute masses");
  c_op->callback([&] { operator_cmd(op); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCapability;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
