#pragma once

// Per-problem difficulty scores, recalibrated once per epoch from rollout
// accuracy: D <- clip(D + eta * (0.5 - accuracy), d_min, d_max).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace diva {

struct DifficultyConfig {
  double d_min = 1.0;
  double d_max = 9.0;
  double eta = 4.0;  // (d_max - d_min) / 2
  double initial = 5.0;

  double midpoint() const noexcept { return 0.5 * (d_min + d_max); }

  /// InvalidArgument unless d_min < d_max, d_min <= initial <= d_max, eta > 0.
  void validate() const;
};

struct DifficultyState {
  std::map<std::string, double> scores;
  std::uint64_t epoch = 0;

  bool operator==(const DifficultyState&) const = default;
};

struct EpochObservation {
  std::string problem_id;
  std::uint64_t correct_count = 0;
  std::uint64_t total_count = 0;
};

DifficultyState init_state(const DifficultyConfig& config, std::span<const std::string> problem_ids);

/// correct / total. ZeroTotal when total is 0.
double accuracy(const EpochObservation& obs);

/// The clipped update for a single score.
double updated_score(double old_score, double alpha, const DifficultyConfig& config);

/// Applies one observation. The epoch counter is left untouched.
DifficultyState update_difficulty(DifficultyState state, const DifficultyConfig& config,
                                  const EpochObservation& obs);

/// Applies every observation of an epoch and advances the epoch counter.
DifficultyState apply_epoch(DifficultyState state, const DifficultyConfig& config,
                            std::span<const EpochObservation> observations);

inline constexpr const char* kSnapshotFormat = "diva-difficulty/1";

/// JSON document: {"format", "epoch", "d_min", "d_max", "scores": {id: score}}.
std::string snapshot(const DifficultyState& state, const DifficultyConfig& config);

/// MalformedSnapshot on parse failure, wrong format tag, or any score outside
/// the configured range.
DifficultyState restore(const std::string& document, const DifficultyConfig& config);

}  // namespace diva
