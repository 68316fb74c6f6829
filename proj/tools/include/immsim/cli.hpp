#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "immsim/kinetic.hpp"
#include "immsim/microsim.hpp"
#include "immsim/model.hpp"
#include "immsim/patches.hpp"

namespace immsim::cli {

inline constexpr const char* kVersion = "0.3.0";

enum class Subcommand { kinetic, patches, micro, meso, horizon };

std::string to_string(Subcommand s);

struct SolverSection {
  double dt = 0.01;
  double t_end = 1.0;
  KineticMethod method = KineticMethod::rk4;
  RhsVariant variant = RhsVariant::kinetic;
  std::vector<double> snapshot_times;
  std::optional<double> segment;
  /// Extra slack granted to the envelope check.
  double allowance = 0.0;

  bool operator==(const SolverSection&) const = default;
};

struct PatchSection {
  PatchParams params;
  double t_end = 100.0;
  double dt = 0.01;
  double snapshot_every = 1.0;

  bool operator==(const PatchSection&) const = default;
};

struct MicroSection {
  std::uint64_t seed = 1;
  std::size_t replicas = 1;
  std::vector<WindowSpec> windows;
  /// Report times for window statistics; empty means {t_end}.
  std::vector<double> sample_times;
  std::vector<double> epsilons{1.0, 0.5, 0.25, 0.125};
  /// Meso comparison horizon; 0 selects the default.
  double horizon = 0.0;
  std::size_t samples = 4;
  /// Pair-correlation bins for the meso run; 0 disables the estimate.
  std::size_t pair_bins = 0;
  double pair_range = 0.0;
  bool write_events = true;

  bool operator==(const MicroSection&) const = default;
};

struct HorizonSection {
  double theta0 = -1.0;
  double b_bar = 1.0;
  double mass = 1.0;

  bool operator==(const HorizonSection&) const = default;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::kinetic;
  TorusDomain domain;
  Potential potential;
  RateField rate;
  /// Constant initial density for kinetic and meso runs.
  double initial_density = 0.0;
  SolverSection solver;
  PatchSection patches;
  MicroSection micro;
  HorizonSection horizon;
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

/// Parses a JSON configuration document and applies defaults. Throws
/// ParseError for malformed documents or mistyped values, UnknownKey for
/// unrecognized keys in strict mode and RangeError for values that violate
/// module preconditions.
RunConfig parse_config(const std::string& text, bool strict = true);

/// JSON document that parses back to an equal RunConfig.
std::string serialize_config(const RunConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = true;
  /// Worst-case margin of the check (positive means room to spare).
  double slack = 0.0;
};

struct ReportSummary {
  std::string subcommand;
  std::vector<CheckResult> checks;
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<std::string> artifacts;
  std::vector<std::pair<std::string, double>> values;

  bool all_passed() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitCheck = 3;

/// Runs the configured experiment, writes CSV artifacts plus summary.txt and
/// summary.json into cfg.output_dir and returns the exit status.
int run(const RunConfig& cfg, unsigned threads = 1);

}  // namespace immsim::cli
