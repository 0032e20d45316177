#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace risnoma {

/// History of one DC inner loop. objective[0] and penalty[0] belong to the
/// initial point; entry r >= 1 to iterate r. step_sq[r-1] is the squared
/// Frobenius distance between iterates r-1 and r, summed over blocks.
struct DcTrace {
  std::vector<double> objective;
  std::vector<double> penalty;
  std::vector<double> step_sq;
  double eta = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline double dc_slack(double f) { return 1e-9 * std::max(1.0, std::abs(f)); }

/// Objective values never increase by more than the relative slack.
inline bool dc_monotone(const DcTrace& t) {
  for (std::size_t r = 1; r < t.objective.size(); ++r) {
    if (t.objective[r] > t.objective[r - 1] + dc_slack(t.objective[r - 1])) return false;
  }
  return true;
}

/// eta * sum of squared steps is bounded by the total objective decrease.
/// Equivalent to the average-step bound with the last iterate standing in for
/// the optimum. Vacuous when eta = 0.
inline bool dc_rate_bound(const DcTrace& t) {
  if (t.eta <= 0.0 || t.objective.size() < 2) return true;
  double sum = 0.0;
  for (double s : t.step_sq) sum += s;
  const double decrease = t.objective.front() - t.objective.back();
  const double slack = dc_slack(t.objective.front()) * static_cast<double>(t.objective.size());
  return t.eta * sum <= decrease + slack;
}

}  // namespace risnoma
