#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "risnoma/channel.hpp"

namespace risnoma {

enum class OrderingScheme { DirectLink, Eigen, SDR, Exhaustive };
const char* to_string(OrderingScheme s);
OrderingScheme ordering_from_string(const std::string& s);

struct OrderingResult {
  std::vector<int> permutation;  // permutation[pos] = user
  std::vector<double> criterion; // per user
  OrderingScheme scheme = OrderingScheme::DirectLink;
  /// Exhaustive search only: every permutation with its power (NaN when the
  /// pipeline was infeasible), in lexicographic order.
  std::vector<std::pair<std::vector<int>, double>> per_permutation;
};

/// Weakest direct link first.
OrderingResult order_direct_link(const ChannelSet& ch);

/// Q_k such that x~^H Q_k x~ = ||h_{r,k}^H diag(v) G + h_{d,k}^H||^2 for
/// x~ = (conj(v); 1).
HermitianMatrix build_Q(const ChannelSet& ch, int k);

/// Largest estimated power p = gamma sigma^2 / (sigma_1(Q_k) (N + 1)) first.
OrderingResult order_eigen(const ChannelSet& ch, const ScenarioConfig& config);

/// Same with sigma_1(Q_k)(N+1) replaced by the relaxation optimum
/// max Tr(Q_k V) over diag(V) = 1, V >= 0. Throws std::runtime_error when a
/// relaxation cannot be solved.
OrderingResult order_sdr(const ChannelSet& ch, const ScenarioConfig& config);

/// Pipeline returns the total power for a permutation, or nullopt when infeasible.
using OrderingPipeline = std::function<std::optional<double>(const std::vector<int>&)>;

/// Runs the pipeline for every permutation (K <= 6) and returns the one with
/// the least power; ties keep the lexicographically first. Throws
/// std::runtime_error when every permutation is infeasible.
OrderingResult order_exhaustive(const ChannelSet& ch, const ScenarioConfig& config,
                                const OrderingPipeline& pipeline);

}  // namespace risnoma
