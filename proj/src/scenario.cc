#include "restoro/scenario.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "restoro/random.h"
#include "restoro/text_util.h"

namespace restoro {
namespace {

Point element_position(const Network& net, int element) {
  if (net.is_node_element(element)) return net.node(element).position;
  const int a = element - net.node_count();
  const Point& p = net.node(net.arc_tail(a)).position;
  const Point& q = net.node(net.arc_head(a)).position;
  return {(p.x + q.x) / 2, (p.y + q.y) / 2};
}

std::string header_value(const std::string& line, const std::string& key) {
  const std::string prefix = key + "=";
  const std::string body = trim(std::string_view(line).substr(1));
  if (body.rfind(prefix, 0) != 0) return {};
  return trim(std::string_view(body).substr(prefix.size()));
}

}  // namespace

DamageModel DamageModel::defaults() {
  const double p6 = 11.0 / 125.0;
  const double p9 = 57.0 / 125.0;
  DamageModel model;
  for (int m = 6; m <= 9; ++m) {
    model.rate_per_magnitude[m] = p6 * std::pow(p9 / p6, (m - 6) / 3.0);
  }
  return model;
}

std::string to_string(Encoding e) {
  return e == Encoding::kDamagedIs1 ? "damaged_is_1" : "damaged_is_0";
}
std::string to_string(Provenance p) {
  return p == Provenance::kOriginal ? "original" : "augmented";
}
std::string to_string(SolverMode m) {
  return m == SolverMode::kExact ? "exact" : "iterative";
}

Encoding parse_encoding(const std::string& s) {
  if (s == "damaged_is_1") return Encoding::kDamagedIs1;
  if (s == "damaged_is_0") return Encoding::kDamagedIs0;
  throw std::invalid_argument("unknown encoding '" + s + "'");
}
Provenance parse_provenance(const std::string& s) {
  if (s == "original") return Provenance::kOriginal;
  if (s == "augmented") return Provenance::kAugmented;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}
SolverMode parse_solver_mode(const std::string& s) {
  if (s == "exact") return SolverMode::kExact;
  if (s == "iterative") return SolverMode::kIterative;
  throw std::invalid_argument("unknown solver mode '" + s + "'");
}

DamageScenario generate_scenario(const Network& net, const DamageModel& model,
                                 int magnitude, std::uint64_t seed) {
  const auto it = model.rate_per_magnitude.find(magnitude);
  if (it == model.rate_per_magnitude.end()) {
    throw std::invalid_argument("unknown magnitude " + std::to_string(magnitude));
  }
  const double rate = it->second;
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("damage rate outside [0, 1]");
  }
  Rng rng(seed);
  const int n_elements = model.damage_arcs ? net.element_count() : net.node_count();

  std::vector<double> prob(n_elements, rate);
  if (model.spatial && n_elements > 0) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (int v = 0; v < net.node_count(); ++v) {
      const Point& p = net.node(v).position;
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const Point epicenter{x0 + (x1 - x0) * uniform01(rng),
                          y0 + (y1 - y0) * uniform01(rng)};
    double mean = 0.0;
    for (int e = 0; e < n_elements; ++e) {
      const Point p = element_position(net, e);
      prob[e] = std::exp(-std::hypot(p.x - epicenter.x, p.y - epicenter.y) /
                         model.spatial->correlation_length);
      mean += prob[e] / n_elements;
    }
    for (double& p : prob) p = std::min(1.0, rate * p / mean);
  }

  DamageScenario out;
  out.initial = FunctionalityState::all_up(net);
  out.magnitude = magnitude;
  out.metadata = "seed=" + std::to_string(seed);
  for (int e = 0; e < n_elements; ++e) {
    if (uniform01(rng) < prob[e]) out.initial.set_element(net, e, false);
  }
  return out;
}

DamageScenario augment(const Network& net, const DamageScenario& scenario,
                       std::pair<int, int> flip_range, std::uint64_t seed) {
  scenario.initial.check_dims(net);
  const int n = net.node_count();
  auto [lo, hi] = flip_range;
  if (lo < 1 || hi < lo || hi > n) {
    throw std::invalid_argument("flip range must lie within [1, node count]");
  }
  Rng rng(seed);
  const int flips = uniform_int(rng, lo, hi);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < flips; ++i) {
    std::swap(order[i], order[uniform_int(rng, i, n - 1)]);
  }
  DamageScenario out = scenario;
  for (int i = 0; i < flips; ++i) {
    out.initial.node_up[order[i]] ^= 1;
  }
  out.metadata = scenario.metadata + ";augment_seed=" + std::to_string(seed);
  return out;
}

void write_scenarios(const std::filesystem::path& path,
                     const std::vector<DamageScenario>& scenarios,
                     const ScenarioFileInfo& info) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file " + path.string());
  out << "# restoro scenarios v1\n"
      << "# encoding=" << to_string(info.encoding) << "\n"
      << "# seed=" << info.seed << "\n";
  if (info.magnitude) out << "# magnitude=" << *info.magnitude << "\n";
  out << "# provenance=" << to_string(info.provenance) << "\n";
  for (const auto& s : scenarios) {
    const auto bits = s.initial.elements();
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const int up = bits[i] ? 1 : 0;
      out << (i ? "," : "")
          << (info.encoding == Encoding::kDamagedIs0 ? up : 1 - up);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ScenarioEntry> read_scenarios(const std::filesystem::path& path,
                                          const Network& net,
                                          ScenarioFileInfo* info_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  ScenarioFileInfo info;
  std::vector<ScenarioEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (auto v = header_value(t, "encoding"); !v.empty()) {
        info.encoding = parse_encoding(v);
      } else if (auto v = header_value(t, "seed"); !v.empty()) {
        info.seed = std::stoull(v);
      } else if (auto v = header_value(t, "magnitude"); !v.empty()) {
        info.magnitude = std::stoi(v);
      } else if (auto v = header_value(t, "provenance"); !v.empty()) {
        info.provenance = parse_provenance(v);
      }
      continue;
    }
    const auto fields = split_fields(t);
    if (static_cast<int>(fields.size()) != net.element_count()) {
      throw ParseError(line_no, "expected " +
                                    std::to_string(net.element_count()) +
                                    " bits, got " +
                                    std::to_string(fields.size()));
    }
    ScenarioEntry entry;
    entry.scenario.initial = FunctionalityState::all_up(net);
    entry.scenario.magnitude = info.magnitude;
    entry.scenario.metadata =
        path.filename().string() + ":" + std::to_string(line_no);
    entry.provenance = info.provenance;
    for (int e = 0; e < net.element_count(); ++e) {
      if (fields[e] != "0" && fields[e] != "1") {
        throw ParseError(line_no, "bad bit '" + fields[e] + "'");
      }
      const bool bit = fields[e] == "1";
      const bool up = info.encoding == Encoding::kDamagedIs0 ? bit : !bit;
      entry.scenario.initial.set_element(net, e, up);
    }
    out.push_back(std::move(entry));
  }
  if (info_out) *info_out = info;
  return out;
}

std::vector<std::uint8_t> encode_input(const Network& net,
                                       const DamageScenario& scenario,
                                       Encoding encoding) {
  scenario.initial.check_dims(net);
  std::vector<std::uint8_t> x(net.node_count());
  for (int v = 0; v < net.node_count(); ++v) {
    const bool up = scenario.initial.node_up[v] != 0;
    x[v] = encoding == Encoding::kDamagedIs1 ? !up : up;
  }
  return x;
}

Dataset build_dataset(const Network& net,
                      const std::vector<ScenarioEntry>& scenarios,
                      int resource_cap, const DatasetOptions& options) {
  Dataset out;
  out.encoding = options.encoding;
  out.records.resize(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  std::atomic<std::size_t> next{0};

  auto label = [&](std::size_t i) {
    const DamageScenario& s = scenarios[i].scenario;
    const RestorationPlan plan =
        options.mode == SolverMode::kExact
            ? solve_exact(net, s, resource_cap, options.horizon, options.limits)
            : solve_iterative(net, s, resource_cap, options.horizon);
    DatasetRecord& r = out.records[i];
    r.input = encode_input(net, s, options.encoding);
    r.target.assign(net.node_count(), 0);
    for (int v = 0; v < net.node_count(); ++v) {
      const int t = plan.repair_time[v];
      r.target[v] = t == kNever ? options.horizon : t;
    }
    r.resource_cap = resource_cap;
    r.magnitude = s.magnitude;
    r.provenance = scenarios[i].provenance;
  };
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        label(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Dataset flip_encoding(const Dataset& dataset) {
  Dataset out = dataset;
  out.encoding = dataset.encoding == Encoding::kDamagedIs1
                     ? Encoding::kDamagedIs0
                     : Encoding::kDamagedIs1;
  for (auto& r : out.records) {
    for (auto& x : r.input) x = 1 - x;
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file " + path.string());
  const int n = dataset.node_count();
  out << "# restoro dataset v1\n# encoding=" << to_string(dataset.encoding)
      << "\n";
  for (int i = 0; i < n; ++i) out << "input_" << i << ',';
  for (int i = 0; i < n; ++i) out << "target_" << i << ',';
  out << "Rc,m,provenance\n";
  for (const auto& r : dataset.records) {
    for (auto x : r.input) out << static_cast<int>(x) << ',';
    for (int y : r.target) out << y << ',';
    out << r.resource_cap << ','
        << (r.magnitude ? std::to_string(*r.magnitude) : std::string("NA"))
        << ',' << to_string(r.provenance) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  Dataset out;
  std::string line;
  int line_no = 0;
  int n = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (auto v = header_value(t, "encoding"); !v.empty()) {
        out.encoding = parse_encoding(v);
      }
      continue;
    }
    const auto f = split_fields(t);
    if (n < 0) {
      if (f.size() < 3 || (f.size() - 3) % 2 != 0 || f.back() != "provenance") {
        throw ParseError(line_no, "bad dataset header");
      }
      n = static_cast<int>((f.size() - 3) / 2);
      continue;
    }
    if (static_cast<int>(f.size()) != 2 * n + 3) {
      throw ParseError(line_no, "expected " + std::to_string(2 * n + 3) +
                                    " fields, got " + std::to_string(f.size()));
    }
    DatasetRecord r;
    long long v = 0;
    for (int i = 0; i < 2 * n + 1; ++i) {
      if (!parse_int(f[i], v)) throw ParseError(line_no, "bad integer '" + f[i] + "'");
      if (i < n) {
        if (v != 0 && v != 1) throw ParseError(line_no, "input is not a bit");
        r.input.push_back(static_cast<std::uint8_t>(v));
      } else if (i < 2 * n) {
        r.target.push_back(static_cast<int>(v));
      } else {
        r.resource_cap = static_cast<int>(v);
      }
    }
    if (f[2 * n + 1] != "NA") {
      if (!parse_int(f[2 * n + 1], v)) throw ParseError(line_no, "bad magnitude");
      r.magnitude = static_cast<int>(v);
    }
    r.provenance = parse_provenance(f[2 * n + 2]);
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace restoro
