// Batch Monte Carlo driver: risnoma --config sweep.yaml --out results.csv

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "risnoma/experiments.hpp"

using namespace risnoma;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void print_summary(const SweepSpec& spec, const SweepResult& result) {
  std::printf("%-8s %-8s %-11s %-11s %12s %10s %9s %9s\n", to_string(spec.axis), "scheme",
              "ordering", "bits", "mean [dBm]", "stderr", "feasible", "converged");
  for (const auto& a : result.aggregates) {
    char value[32] = "-";
    if (spec.axis != SweepAxis::None) {
      if (std::isinf(a.value)) {
        std::snprintf(value, sizeof value, "cont.");
      } else {
        std::snprintf(value, sizeof value, "%g", a.value);
      }
    }
    const std::string bits = a.scheme.bits ? std::to_string(*a.scheme.bits) : "continuous";
    std::printf("%-8s %-8s %-11s %-11s %12.4f %10.4f %5d/%-3d %5d/%-3d\n", value,
                to_string(a.scheme.optimizer), to_string(a.scheme.ordering), bits.c_str(),
                a.mean_power_dbm, a.stderr_dbm, a.n_feasible, a.n_trials, a.n_converged,
                a.n_trials);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmit power minimization for RIS-aided downlink NOMA"};
  std::string config_path, out_path, plot_path, axis_arg, scheme_arg, ordering_arg, bits_arg;
  int workers = 0, trials = 0;
  std::uint64_t seed = 0;
  bool timing = false;
  app.add_option("--config", config_path, "YAML sweep configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "CSV output path (overrides output.csv)");
  app.add_option("--plot-data", plot_path, "plot-data output path (overrides output.plot_data)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* trials_opt = app.add_option("--trials", trials, "trials per cell")->check(CLI::PositiveNumber);
  app.add_option("--axis", axis_arg, "sweep axis, e.g. N=8,16,32 or B=1,2,continuous");
  app.add_option("--scheme", scheme_arg, "optimizer")
      ->check(CLI::IsMember({"dc", "sdr", "random", "noris"}));
  app.add_option("--ordering", ordering_arg, "decoding order scheme")
      ->check(CLI::IsMember({"direct", "eigen", "sdr", "exhaustive"}));
  app.add_option("--bits", bits_arg, "phase resolution: integer bits or 'continuous'");
  app.add_flag("--timing", timing, "add a wall-time column to the CSV");
  CLI11_PARSE(app, argc, argv);

  try {
    SweepSpec spec = config_path.empty() ? parse_config("") : load_config(config_path);
    if (workers_opt->count()) spec.workers = workers;
    if (seed_opt->count()) spec.base.seed = seed;
    if (trials_opt->count()) spec.n_trials = trials;
    if (timing) spec.timing = true;
    if (!out_path.empty()) spec.csv_path = out_path;
    if (!plot_path.empty()) spec.plot_data_path = plot_path;
    if (!axis_arg.empty()) {
      const auto eq = axis_arg.find('=');
      if (eq == std::string::npos) throw ValidationError("--axis expects NAME=v1,v2,...");
      spec.axis = axis_from_string(axis_arg.substr(0, eq));
      spec.values = parse_axis_values(spec.axis, axis_arg.substr(eq + 1));
    }
    // Any of the scheme flags collapses the scheme list to a single entry.
    if (!scheme_arg.empty() || !ordering_arg.empty() || !bits_arg.empty()) {
      SchemeSpec s = spec.schemes.front();
      if (!scheme_arg.empty()) s.optimizer = optimizer_from_string(scheme_arg);
      if (!ordering_arg.empty()) s.ordering = ordering_from_string(ordering_arg);
      if (!bits_arg.empty()) {
        const double b = parse_axis_values(SweepAxis::B, bits_arg).front();
        s.bits = std::isinf(b) ? std::nullopt : std::optional<int>(static_cast<int>(b));
      }
      spec.schemes = {s};
    }
    spec.validate();

    const SweepResult result = run_sweep(spec);
    const std::string csv = to_csv(spec, result);
    if (spec.csv_path.empty()) {
      std::cout << csv;
    } else {
      write_file(spec.csv_path, csv);
      print_summary(spec, result);
    }
    if (!spec.plot_data_path.empty()) write_file(spec.plot_data_path, to_plot_data(spec, result));
    for (const auto& r : result.trials) {
      if (!r.error.empty()) std::cerr << "trial " << r.trial << " failed: " << r.error << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
