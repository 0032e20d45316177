#include "risnoma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

namespace risnoma {

namespace {

constexpr double kContinuous = std::numeric_limits<double>::infinity();

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  throw ConfigError(msg, line_of(n));
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!map.IsMap()) fail(map, section + ": expected a mapping");
  for (auto it = map.begin(); it != map.end(); ++it) {
    const std::string key = it->first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string where = section.empty() ? key : section + "." + key;
      fail(it->first, "unknown key '" + where + "'");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field + ": expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, field + ": cannot parse '" + n.Scalar() + "'");
  }
}

double number(const YAML::Node& n, const std::string& field) {
  const double x = scalar<double>(n, field);
  if (!std::isfinite(x)) fail(n, field + ": must be finite");
  return x;
}

int integer(const YAML::Node& n, const std::string& field, int min_value) {
  const int x = scalar<int>(n, field);
  if (x < min_value) fail(n, field + " must be >= " + std::to_string(min_value));
  return x;
}

double positive(const YAML::Node& n, const std::string& field, bool allow_zero = false) {
  const double x = number(n, field);
  if (x < 0 || (!allow_zero && x == 0)) fail(n, field + (allow_zero ? " must be >= 0" : " must be > 0"));
  return x;
}

Point3 point(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence() || n.size() != 3) fail(n, field + ": expected [x, y, z]");
  return {number(n[0], field), number(n[1], field), number(n[2], field)};
}

std::pair<double, double> interval(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence() || n.size() != 2) fail(n, field + ": expected [min, max]");
  const double lo = number(n[0], field), hi = number(n[1], field);
  if (lo > hi) fail(n, field + ": min exceeds max");
  return {lo, hi};
}

std::optional<int> parse_bits_text(const std::string& s) {
  if (s == "continuous" || s == "inf") return std::nullopt;
  std::size_t used = 0;
  int b = 0;
  try {
    b = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("bits: cannot parse '" + s + "'");
  }
  if (used != s.size() || b < 1 || b > 16) throw ValidationError("bits must be in [1, 16] or 'continuous'");
  return b;
}

std::optional<int> bits_node(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field + ": expected a scalar");
  try {
    return parse_bits_text(n.Scalar());
  } catch (const ValidationError& e) {
    fail(n, field + ": " + e.what());
  }
}

void parse_scenario(const YAML::Node& s, ScenarioConfig& c) {
  check_keys(s,
             {"M", "N", "K", "bs_position", "ris_position", "user_region", "user_positions",
              "T0_db", "alpha_bu", "alpha_bi", "alpha_iu", "ris_element_gain_db",
              "noise_power_dbm", "rate_min"},
             "scenario");
  if (s["M"]) c.M = integer(s["M"], "scenario.M", 1);
  if (s["N"]) c.N = integer(s["N"], "scenario.N", 0);
  if (s["K"]) c.K = integer(s["K"], "scenario.K", 1);
  if (s["bs_position"]) c.bs_pos = point(s["bs_position"], "scenario.bs_position");
  if (s["ris_position"]) c.ris_pos = point(s["ris_position"], "scenario.ris_position");
  if (const YAML::Node r = s["user_region"]) {
    check_keys(r, {"x", "y", "z"}, "scenario.user_region");
    if (r["x"]) std::tie(c.user_region.x_min, c.user_region.x_max) = interval(r["x"], "scenario.user_region.x");
    if (r["y"]) std::tie(c.user_region.y_min, c.user_region.y_max) = interval(r["y"], "scenario.user_region.y");
    if (r["z"]) std::tie(c.user_region.z_min, c.user_region.z_max) = interval(r["z"], "scenario.user_region.z");
  }
  if (const YAML::Node u = s["user_positions"]) {
    if (!u.IsSequence()) fail(u, "scenario.user_positions: expected a list of [x, y, z]");
    c.user_positions.clear();
    for (const auto& p : u) c.user_positions.push_back(point(p, "scenario.user_positions"));
  }
  if (s["T0_db"]) c.T0_db = number(s["T0_db"], "scenario.T0_db");
  if (s["alpha_bu"]) c.alpha_bu = positive(s["alpha_bu"], "scenario.alpha_bu");
  if (s["alpha_bi"]) c.alpha_bi = positive(s["alpha_bi"], "scenario.alpha_bi");
  if (s["alpha_iu"]) c.alpha_iu = positive(s["alpha_iu"], "scenario.alpha_iu");
  if (s["ris_element_gain_db"]) c.ris_element_gain_db = number(s["ris_element_gain_db"], "scenario.ris_element_gain_db");
  if (s["noise_power_dbm"]) c.noise_power_dbm = number(s["noise_power_dbm"], "scenario.noise_power_dbm");
  if (const YAML::Node r = s["rate_min"]) {
    if (r.IsSequence()) {
      c.user_rates.clear();
      for (const auto& x : r) c.user_rates.push_back(positive(x, "scenario.rate_min", true));
    } else {
      c.rate_min = positive(r, "scenario.rate_min", true);
      c.user_rates.clear();
    }
  }
}

void parse_algorithm(const YAML::Node& a, ScenarioConfig& c) {
  check_keys(a,
             {"rho", "eta", "epsilon", "rank_tol", "max_outer_iters", "max_inner_iters",
              "n_randomizations"},
             "algorithm");
  if (a["rho"]) c.rho = positive(a["rho"], "algorithm.rho");
  if (a["eta"]) c.eta = positive(a["eta"], "algorithm.eta", true);
  if (a["epsilon"]) c.epsilon = positive(a["epsilon"], "algorithm.epsilon");
  if (a["rank_tol"]) {
    c.rank_tol = positive(a["rank_tol"], "algorithm.rank_tol");
    if (c.rank_tol >= 1) fail(a["rank_tol"], "algorithm.rank_tol must lie in (0, 1)");
  }
  if (a["max_outer_iters"]) c.max_outer_iters = integer(a["max_outer_iters"], "algorithm.max_outer_iters", 1);
  if (a["max_inner_iters"]) c.max_inner_iters = integer(a["max_inner_iters"], "algorithm.max_inner_iters", 1);
  if (a["n_randomizations"]) c.n_randomizations = integer(a["n_randomizations"], "algorithm.n_randomizations", 1);
}

SchemeSpec parse_scheme(const YAML::Node& n) {
  check_keys(n, {"optimizer", "ordering", "bits"}, "sweep.schemes[]");
  SchemeSpec s;
  try {
    if (n["optimizer"]) s.optimizer = optimizer_from_string(scalar<std::string>(n["optimizer"], "optimizer"));
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    fail(n["optimizer"], std::string("sweep.schemes[].optimizer: ") + e.what());
  }
  try {
    if (n["ordering"]) s.ordering = ordering_from_string(scalar<std::string>(n["ordering"], "ordering"));
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    fail(n["ordering"], std::string("sweep.schemes[].ordering: ") + e.what());
  }
  if (n["bits"]) s.bits = bits_node(n["bits"], "sweep.schemes[].bits");
  return s;
}

double axis_value(SweepAxis axis, const std::string& text) {
  if (axis == SweepAxis::B) {
    const auto b = parse_bits_text(text);
    return b ? static_cast<double>(*b) : kContinuous;
  }
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw ValidationError(std::string("axis ") + to_string(axis) + ": cannot parse '" + text + "'");
  }
  if (used != text.size()) throw ValidationError("axis value '" + text + "' is not an integer");
  const int min_value = axis == SweepAxis::N ? 0 : 1;
  if (v < min_value) {
    throw ValidationError(std::string("axis ") + to_string(axis) + " values must be >= " +
                          std::to_string(min_value));
  }
  return v;
}

void parse_sweep(const YAML::Node& s, SweepSpec& spec) {
  check_keys(s, {"axis", "values", "trials", "seed", "schemes"}, "sweep");
  if (s["axis"]) {
    try {
      spec.axis = axis_from_string(scalar<std::string>(s["axis"], "sweep.axis"));
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      fail(s["axis"], std::string("sweep.axis: ") + e.what());
    }
  }
  if (const YAML::Node v = s["values"]) {
    if (!v.IsSequence()) fail(v, "sweep.values: expected a list");
    spec.values.clear();
    for (const auto& x : v) {
      try {
        spec.values.push_back(axis_value(spec.axis, scalar<std::string>(x, "sweep.values")));
      } catch (const ConfigError&) {
        throw;
      } catch (const ValidationError& e) {
        fail(x, std::string("sweep.values: ") + e.what());
      }
    }
  }
  if (s["trials"]) spec.n_trials = integer(s["trials"], "sweep.trials", 1);
  if (s["seed"]) spec.base.seed = scalar<std::uint64_t>(s["seed"], "sweep.seed");
  if (const YAML::Node l = s["schemes"]) {
    if (!l.IsSequence() || l.size() == 0) fail(l, "sweep.schemes: expected a non-empty list");
    spec.schemes.clear();
    for (const auto& n : l) spec.schemes.push_back(parse_scheme(n));
  }
}

void parse_output(const YAML::Node& o, SweepSpec& spec) {
  check_keys(o, {"csv", "plot_data", "workers", "timing"}, "output");
  if (o["csv"]) spec.csv_path = scalar<std::string>(o["csv"], "output.csv");
  if (o["plot_data"]) spec.plot_data_path = scalar<std::string>(o["plot_data"], "output.plot_data");
  if (o["workers"]) spec.workers = integer(o["workers"], "output.workers", 1);
  if (o["timing"]) spec.timing = scalar<bool>(o["timing"], "output.timing");
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string value_text(SweepAxis axis, double v) {
  if (axis == SweepAxis::None) return "";
  if (std::isinf(v)) return "continuous";
  return std::to_string(static_cast<long long>(v));
}

std::string bits_text(const std::optional<int>& b) {
  return b ? std::to_string(*b) : "continuous";
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, int line)
    : ValidationError(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::None: return "none";
    case SweepAxis::M: return "M";
    case SweepAxis::N: return "N";
    case SweepAxis::K: return "K";
    case SweepAxis::B: return "B";
  }
  return "?";
}

SweepAxis axis_from_string(const std::string& s) {
  if (s == "none" || s.empty()) return SweepAxis::None;
  if (s == "M") return SweepAxis::M;
  if (s == "N") return SweepAxis::N;
  if (s == "K") return SweepAxis::K;
  if (s == "B") return SweepAxis::B;
  throw ValidationError("unknown sweep axis '" + s + "'");
}

void SweepSpec::validate() const {
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (schemes.empty()) throw ValidationError("at least one scheme is required");
  if (axis != SweepAxis::None && values.empty()) {
    throw ValidationError(std::string("sweep axis ") + to_string(axis) + " has no values");
  }
  for (double v : cell_values()) {
    ScenarioConfig c = base;
    SchemeSpec s = schemes.front();
    apply_axis(axis, v, c, s);
    c.validate();
    for (const auto& sc : schemes) {
      if (sc.ordering == OrderingScheme::Exhaustive && c.K > 6) {
        throw ValidationError("exhaustive ordering supports K <= 6");
      }
    }
  }
}

std::vector<double> SweepSpec::cell_values() const {
  if (axis == SweepAxis::None) return {std::numeric_limits<double>::quiet_NaN()};
  return values;
}

SweepSpec parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  SweepSpec spec;
  if (root.IsNull()) {
    spec.validate();
    return spec;
  }
  check_keys(root, {"scenario", "algorithm", "sweep", "output"}, "");
  if (root["scenario"]) parse_scenario(root["scenario"], spec.base);
  if (root["algorithm"]) parse_algorithm(root["algorithm"], spec.base);
  if (root["sweep"]) parse_sweep(root["sweep"], spec);
  if (root["output"]) parse_output(root["output"], spec);
  spec.validate();
  return spec;
}

SweepSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::vector<double> parse_axis_values(SweepAxis axis, const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    out.push_back(axis_value(axis, item));
  }
  if (out.empty()) throw ValidationError("empty axis value list");
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

void apply_axis(SweepAxis axis, double value, ScenarioConfig& config, SchemeSpec& scheme) {
  switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::M: config.M = static_cast<int>(value); break;
    case SweepAxis::N: config.N = static_cast<int>(value); break;
    case SweepAxis::K: config.K = static_cast<int>(value); break;
    case SweepAxis::B:
      scheme.bits = std::isinf(value) ? std::nullopt : std::optional<int>(static_cast<int>(value));
      break;
  }
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<double> values = spec.cell_values();
  const std::size_t n_schemes = spec.schemes.size();
  const std::size_t n_trials = static_cast<std::size_t>(spec.n_trials);

  SweepResult out;
  out.trials.resize(values.size() * n_schemes * n_trials);
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    for (std::size_t si = 0; si < n_schemes; ++si) {
      for (std::size_t t = 0; t < n_trials; ++t) {
        TrialRecord& r = out.trials[(vi * n_schemes + si) * n_trials + t];
        r.value = values[vi];
        r.scheme = spec.schemes[si];
        r.trial = static_cast<int>(t);
        r.seed = trial_seed(spec.base.seed, static_cast<int>(t));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < out.trials.size(); j = next++) {
      TrialRecord& r = out.trials[j];
      ScenarioConfig config = spec.base;
      SchemeSpec scheme = r.scheme;
      apply_axis(spec.axis, r.value, config, scheme);
      r.scheme = scheme;
      const auto start = std::chrono::steady_clock::now();
      try {
        r.result = run_trial(config, r.seed, scheme.ordering, scheme.optimizer, scheme.bits);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      r.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int workers = std::min<int>(spec.workers, static_cast<int>(out.trials.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  out.aggregates = aggregate(spec, out.trials);
  return out;
}

std::vector<CellAggregate> aggregate(const SweepSpec& spec, const std::vector<TrialRecord>& trials) {
  std::vector<CellAggregate> out;
  const std::size_t n_trials = static_cast<std::size_t>(spec.n_trials);
  for (std::size_t begin = 0; begin + n_trials <= trials.size(); begin += n_trials) {
    CellAggregate a;
    a.value = trials[begin].value;
    a.scheme = trials[begin].scheme;
    a.n_trials = spec.n_trials;
    double sum_mw = 0.0, sum_db = 0.0, sum_db2 = 0.0;
    for (std::size_t t = begin; t < begin + n_trials; ++t) {
      const TrialRecord& r = trials[t];
      if (r.converged()) ++a.n_converged;
      if (!r.feasible()) continue;
      ++a.n_feasible;
      sum_mw += r.result->total_power_mw;
      sum_db += r.result->total_power_dbm;
      sum_db2 += r.result->total_power_dbm * r.result->total_power_dbm;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (a.n_feasible > 0) {
      const double n = a.n_feasible;
      a.mean_power_mw = sum_mw / n;
      a.mean_power_dbm = sum_db / n;
      a.stderr_dbm = a.n_feasible > 1
                         ? std::sqrt(std::max(0.0, (sum_db2 - n * a.mean_power_dbm * a.mean_power_dbm) /
                                                       (n - 1)) / n)
                         : 0.0;
    } else {
      a.mean_power_mw = a.mean_power_dbm = a.stderr_dbm = nan;
    }
    out.push_back(a);
  }
  return out;
}

// Field order is fixed; see the README for the column meanings.
std::string to_csv(const SweepSpec& spec, const SweepResult& result) {
  std::ostringstream os;
  os << "kind,axis,value,optimizer,ordering,bits,trial,seed,power_mw,power_dbm,iterations,"
        "termination,n_trials,n_feasible,n_converged,n_excluded,stderr_dbm";
  if (spec.timing) os << ",wall_time_s";
  os << '\n';
  const char* axis = to_string(spec.axis);
  for (const TrialRecord& r : result.trials) {
    os << "trial," << axis << ',' << value_text(spec.axis, r.value) << ','
       << to_string(r.scheme.optimizer) << ',' << to_string(r.scheme.ordering) << ','
       << bits_text(r.scheme.bits) << ',' << r.trial << ',' << r.seed << ',';
    if (r.result) {
      const bool ok = r.result->has_solution();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      os << fmt(ok ? r.result->total_power_mw : nan) << ','
         << fmt(ok ? r.result->total_power_dbm : nan) << ',' << r.result->outer_iterations << ','
         << to_string(r.result->termination);
    } else {
      os << "nan,nan,0,Error";
    }
    os << ",,,,,";
    if (spec.timing) os << ',' << fmt(r.wall_time_s);
    os << '\n';
  }
  for (const CellAggregate& a : result.aggregates) {
    os << "aggregate," << axis << ',' << value_text(spec.axis, a.value) << ','
       << to_string(a.scheme.optimizer) << ',' << to_string(a.scheme.ordering) << ','
       << bits_text(a.scheme.bits) << ",,," << fmt(a.mean_power_mw) << ','
       << fmt(a.mean_power_dbm) << ",,," << a.n_trials << ',' << a.n_feasible << ','
       << a.n_converged << ',' << (a.n_trials - a.n_feasible) << ',' << fmt(a.stderr_dbm);
    if (spec.timing) os << ',';
    os << '\n';
  }
  return os.str();
}

std::string to_plot_data(const SweepSpec& spec, const SweepResult& result) {
  std::ostringstream os;
  os << "scheme,x,mean_dbm,stderr_dbm\n";
  for (const CellAggregate& a : result.aggregates) {
    std::string label = std::string(to_string(a.scheme.optimizer)) + "/" + to_string(a.scheme.ordering);
    if (spec.axis != SweepAxis::B) label += "/" + bits_text(a.scheme.bits);
    os << label << ',' << value_text(spec.axis, a.value) << ',' << fmt(a.mean_power_dbm) << ','
       << fmt(a.stderr_dbm) << '\n';
  }
  return os.str();
}

}  // namespace risnoma
