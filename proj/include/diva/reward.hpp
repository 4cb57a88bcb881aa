#pragma once

// Group reward statistics and the baseline group-relative (z-score) advantage.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace diva {

inline constexpr double kDefaultEps = 1e-8;
inline constexpr double kDefaultRewardCap = 1.0;

/// Rewards of the k rollouts sampled for one question (or one variant).
class RolloutGroup {
 public:
  /// Throws GroupTooSmall for fewer than two rewards and InvalidArgument for
  /// negative or non-finite values.
  RolloutGroup(std::string group_id, std::vector<double> rewards);

  const std::string& group_id() const noexcept { return group_id_; }
  std::span<const double> rewards() const noexcept { return rewards_; }
  std::size_t size() const noexcept { return rewards_.size(); }

  double min() const noexcept;
  double max() const noexcept;

  /// InvalidArgument if any reward exceeds the cap.
  void check_cap(double r_cap) const;

 private:
  std::string group_id_;
  std::vector<double> rewards_;
};

struct GroupStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Mean and standard deviation; the deviation uses divisor n-1 when `bessel`
/// is set and n otherwise.
GroupStats group_stats(std::span<const double> values, bool bessel);
inline GroupStats group_stats(const RolloutGroup& g, bool bessel) {
  return group_stats(g.rewards(), bessel);
}

/// (r_i - mean) / (std + eps). A group whose values are all equal yields
/// exact zeros.
std::vector<double> zscore_advantages(std::span<const double> values, double eps, bool bessel);
inline std::vector<double> zscore_advantages(const RolloutGroup& g, double eps, bool bessel) {
  return zscore_advantages(g.rewards(), eps, bessel);
}

/// (max - min) / r_cap; the normalized reward range of a group.
double reward_range(std::span<const double> values, double r_cap);

}  // namespace diva
