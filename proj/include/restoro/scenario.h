// Synthetic seismic damage scenarios, bit-flip augmentation and
// solver-labelled datasets for surrogate training.

#ifndef RESTORO_SCENARIO_H_
#define RESTORO_SCENARIO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "restoro/network.h"
#include "restoro/solver.h"

namespace restoro {

struct SpatialKernel {
  // Damage probability decays as exp(-distance / correlation_length) from an
  // epicenter drawn uniformly over the nodes' bounding box, rescaled so the
  // mean rate is preserved.
  double correlation_length = 0.3;
};

struct DamageModel {
  std::map<int, double> rate_per_magnitude;
  std::optional<SpatialKernel> spatial;
  bool damage_arcs = false;

  // Per-node rates giving about 11 (m=6) and 57 (m=9) damaged nodes out of
  // 125, log-linearly interpolated for m=7 and m=8.
  static DamageModel defaults();
};

enum class Encoding { kDamagedIs1, kDamagedIs0 };
enum class Provenance { kOriginal, kAugmented };
enum class SolverMode { kExact, kIterative };

std::string to_string(Encoding e);
std::string to_string(Provenance p);
std::string to_string(SolverMode m);
Encoding parse_encoding(const std::string& s);
Provenance parse_provenance(const std::string& s);
SolverMode parse_solver_mode(const std::string& s);

// Throws std::invalid_argument for a magnitude the model does not know.
DamageScenario generate_scenario(const Network& net, const DamageModel& model,
                                 int magnitude, std::uint64_t seed);

// Flips exactly f node bits, f uniform in [lo, hi]. Arcs are left untouched.
DamageScenario augment(const Network& net, const DamageScenario& scenario,
                       std::pair<int, int> flip_range, std::uint64_t seed);

struct ScenarioEntry {
  DamageScenario scenario;
  Provenance provenance = Provenance::kOriginal;
};

struct ScenarioFileInfo {
  Encoding encoding = Encoding::kDamagedIs0;
  std::uint64_t seed = 0;
  std::optional<int> magnitude;
  Provenance provenance = Provenance::kOriginal;
};

// One scenario per line: element bits in canonical order, encoded per
// `info.encoding`; header comments carry encoding, seed, magnitude and
// provenance.
void write_scenarios(const std::filesystem::path& path,
                     const std::vector<DamageScenario>& scenarios,
                     const ScenarioFileInfo& info);
std::vector<ScenarioEntry> read_scenarios(const std::filesystem::path& path,
                                          const Network& net,
                                          ScenarioFileInfo* info = nullptr);

struct DatasetRecord {
  std::vector<std::uint8_t> input;  // per node, encoded
  std::vector<int> target;          // per node: 0 or a repair step
  int resource_cap = 0;
  std::optional<int> magnitude;
  Provenance provenance = Provenance::kOriginal;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct Dataset {
  Encoding encoding = Encoding::kDamagedIs1;
  std::vector<DatasetRecord> records;

  int node_count() const {
    return records.empty() ? 0 : static_cast<int>(records.front().input.size());
  }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetOptions {
  SolverMode mode = SolverMode::kIterative;
  int horizon = kDefaultHorizon;
  Encoding encoding = Encoding::kDamagedIs1;
  SolverLimits limits;
  int jobs = 1;
};

// Encoded node bits of a scenario.
std::vector<std::uint8_t> encode_input(const Network& net,
                                       const DamageScenario& scenario,
                                       Encoding encoding);

// Labels every scenario with the solver; record order follows `scenarios`
// regardless of `options.jobs`. Nodes the plan never repairs are labelled
// with the horizon. Throws CapabilityError for exact mode on oversized
// instances.
Dataset build_dataset(const Network& net,
                      const std::vector<ScenarioEntry>& scenarios,
                      int resource_cap, const DatasetOptions& options);

// Inputs x -> 1 - x, targets unchanged.
Dataset flip_encoding(const Dataset& dataset);

void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace restoro

#endif  // RESTORO_SCENARIO_H_
