#include "diva/reward.hpp"

#include <algorithm>
#include <cmath>

#include "diva/error.hpp"

namespace diva {

RolloutGroup::RolloutGroup(std::string group_id, std::vector<double> rewards)
    : group_id_(std::move(group_id)), rewards_(std::move(rewards)) {
  if (rewards_.size() < 2) {
    throw Error(ErrorKind::GroupTooSmall,
                "group '" + group_id_ + "' has " + std::to_string(rewards_.size()) +
                    " rollouts, need at least 2");
  }
  for (double r : rewards_) {
    if (!std::isfinite(r) || r < 0.0) {
      throw Error(ErrorKind::InvalidArgument,
                  "group '" + group_id_ + "' has a negative or non-finite reward");
    }
  }
}

double RolloutGroup::min() const noexcept { return *std::min_element(rewards_.begin(), rewards_.end()); }
double RolloutGroup::max() const noexcept { return *std::max_element(rewards_.begin(), rewards_.end()); }

void RolloutGroup::check_cap(double r_cap) const {
  if (max() > r_cap) {
    throw Error(ErrorKind::InvalidArgument,
                "group '" + group_id_ + "' has a reward above the cap " + std::to_string(r_cap));
  }
}

GroupStats group_stats(std::span<const double> values, bool bessel) {
  if (values.size() < 2) {
    throw Error(ErrorKind::GroupTooSmall, "need at least 2 values, got " + std::to_string(values.size()));
  }
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double std = (*lo == *hi) ? 0.0 : std::sqrt(ss / (bessel ? n - 1.0 : n));
  return {(*lo == *hi) ? *lo : mean, std, values.size()};
}

std::vector<double> zscore_advantages(std::span<const double> values, double eps, bool bessel) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  const GroupStats st = group_stats(values, bessel);
  std::vector<double> out(values.size(), 0.0);
  if (st.std == 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - st.mean) / (st.std + eps);
  return out;
}

double reward_range(std::span<const double> values, double r_cap) {
  if (!(r_cap > 0.0)) throw Error(ErrorKind::InvalidArgument, "r_cap must be positive");
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return std::clamp((*hi - *lo) / r_cap, 0.0, 1.0);
}

}  // namespace diva
