#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "risnoma/orchestrator.hpp"

namespace risnoma {

/// Config error carrying the 1-based line of the offending node (0 if unknown).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& msg, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class SweepAxis { None, M, N, K, B };
const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

struct SchemeSpec {
  Optimizer optimizer = Optimizer::DC;
  OrderingScheme ordering = OrderingScheme::Eigen;
  std::optional<int> bits;  // nullopt: continuous
};

struct SweepSpec {
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::None;
  /// Axis values; for B, +inf means continuous phases.
  std::vector<double> values;
  std::vector<SchemeSpec> schemes{SchemeSpec{}};
  int n_trials = 10;
  std::string csv_path;
  std::string plot_data_path;
  int workers = 1;
  bool timing = false;  // adds a wall-time column (breaks byte-identical output)

  void validate() const;
  /// The axis values to iterate; a single NaN placeholder when axis is None.
  std::vector<double> cell_values() const;
};

SweepSpec parse_config(const std::string& text);
SweepSpec load_config(const std::filesystem::path& path);

/// Parses "1,2,continuous" style lists for the given axis.
std::vector<double> parse_axis_values(SweepAxis axis, const std::string& list);

/// Seed shared by every scheme and axis value of a trial.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

struct TrialRecord {
  double value = 0.0;
  SchemeSpec scheme;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<RunResult> result;  // empty when the trial threw
  std::string error;
  double wall_time_s = 0.0;

  bool feasible() const { return result && result->has_solution(); }
  bool converged() const {
    return result && result->termination == TerminationReason::Converged;
  }
};

struct CellAggregate {
  double value = 0.0;
  SchemeSpec scheme;
  int n_trials = 0;
  int n_feasible = 0;   // trials reporting a feasible (w, v) pair
  int n_converged = 0;
  double mean_power_mw = 0.0;
  double mean_power_dbm = 0.0;
  double stderr_dbm = 0.0;
};

struct SweepResult {
  std::vector<TrialRecord> trials;  // ordered by (value, scheme, trial)
  std::vector<CellAggregate> aggregates;
};

/// Applies one axis value to a copy of the base config and scheme.
void apply_axis(SweepAxis axis, double value, ScenarioConfig& config, SchemeSpec& scheme);

SweepResult run_sweep(const SweepSpec& spec);

/// Means over feasible trials; the remaining trials are counted as excluded.
std::vector<CellAggregate> aggregate(const SweepSpec& spec, const std::vector<TrialRecord>& trials);

std::string to_csv(const SweepSpec& spec, const SweepResult& result);
std::string to_plot_data(const SweepSpec& spec, const SweepResult& result);

}  // namespace risnoma
