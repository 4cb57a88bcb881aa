#pragma once

// Variant-group advantage pipeline:
//   local z-scores (per variant) and global z-scores (pooled over the variant set)
//   -> batch-level standardization of each channel
//   -> local/global combination
//   -> difficulty-weighted scaling exp(k * (D_i - mean D) * sgn(A)) * A
//   -> reward-range rescaling by (max - min) / r_cap.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "diva/reward.hpp"

namespace diva {

struct VariantMember {
  int level = 6;
  double difficulty = 0.0;  // difficulty coefficient D_q^(i)
  RolloutGroup rollouts;
};

struct VariantGroupRewards {
  std::string problem_id;
  std::vector<VariantMember> members;

  /// InvalidArgument unless there is at least one member and every member has
  /// the same rollout count.
  void validate() const;
  std::size_t rollout_count() const noexcept;
  std::vector<double> pooled_rewards() const;
};

enum class CombineRule { Mean, Sum };
enum class RrbScope { Local, Global, Both };

// Auto standardizes the batch only when some group has more than one member;
// with single-member groups the two channels coincide and there is no
// local/global imbalance to remove.
enum class BatchNormMode { Auto, Always, Never };

/// ln(1.5) / 4: the largest weight is 1.5 (and the smallest 1/1.5) when
/// variant difficulties sit at most 4 above/below their group mean.
inline const double kDefaultSensitivity = std::log(1.5) / 4.0;

struct PipelineConfig {
  double sensitivity_k = kDefaultSensitivity;
  double eps = kDefaultEps;
  bool bessel = true;
  double r_cap = kDefaultRewardCap;
  CombineRule combine = CombineRule::Mean;
  bool rrb = true;
  RrbScope rrb_scope = RrbScope::Local;
  BatchNormMode batch_norm = BatchNormMode::Auto;

  void validate() const;
};

/// Sensitivity that caps the weight at `max_weight` for a difficulty gap of `max_gap`.
double sensitivity_for(double max_weight, double max_gap);

// Per-rollout vectors below are flat, member-major: member 0's k rollouts, then member 1's, ...

std::vector<double> local_advantages(const VariantGroupRewards& group, const PipelineConfig& cfg);
std::vector<double> global_advantages(const VariantGroupRewards& group, const PipelineConfig& cfg);

struct NormalizedChannels {
  std::vector<double> local;
  std::vector<double> global;
  bool local_degenerate = false;
  bool global_degenerate = false;
};

/// Standardizes a channel over the batch with the population deviation.
/// A constant channel comes back as zeros with `degenerate` set.
std::vector<double> batch_zscore(std::span<const double> values, double eps, bool& degenerate);

/// Standardizes the local and global channels separately.
NormalizedChannels batch_normalize(std::span<const double> local, std::span<const double> global, double eps);

std::vector<double> combine(std::span<const double> local, std::span<const double> global, CombineRule rule);

/// exp(k * delta * sgn(adv)), with sgn(0) = 0.
double difficulty_factor(double k, double delta, double adv);

std::vector<double> difficulty_weight(std::span<const double> combined, const VariantGroupRewards& group,
                                      const PipelineConfig& cfg);

struct RangeScaled {
  std::vector<double> values;
  std::vector<double> delta_r;  // per member
};

RangeScaled rrb_rescale(std::span<const double> advantages, const VariantGroupRewards& group,
                        const PipelineConfig& cfg);

struct RolloutAdvantage {
  int member = 0;
  int rollout = 0;
  int level = 0;
  double difficulty = 0.0;
  double reward = 0.0;
  double local_raw = 0.0;
  double global_raw = 0.0;
  double local_norm = 0.0;
  double global_norm = 0.0;
  double combined = 0.0;
  double weighted = 0.0;
  double final = 0.0;
};

struct GroupAdvantages {
  std::string problem_id;
  std::vector<RolloutAdvantage> rollouts;
  std::vector<double> delta_r;
};

struct BatchAdvantages {
  std::vector<GroupAdvantages> groups;
  bool batch_normalized = false;
  bool local_degenerate = false;
  bool global_degenerate = false;
};

/// Runs every stage and keeps the intermediate values. Stage failures are
/// rethrown with the stage and problem id prefixed to the message.
BatchAdvantages run_pipeline(std::span<const VariantGroupRewards> batch, const PipelineConfig& cfg);

}  // namespace diva
