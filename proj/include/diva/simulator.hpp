#pragma once

// Synthetic training-dynamics testbed. A scalar "skill" stands in for the
// policy; each problem has a latent requirement, each variant level shifts
// that requirement, and rollouts succeed with a logistic probability. Skill
// moves by the advantage-weighted update projected onto the correctness
// direction, so it only grows while groups carry non-zero advantages.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "diva/advantage.hpp"
#include "diva/difficulty.hpp"
#include "diva/variants.hpp"

namespace diva::sim {

enum class Strategy { Grpo, GrpoRrb, Diva };
enum class RewardMode { Binary, Format };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);
std::string to_string(RewardMode m);
RewardMode parse_reward_mode(const std::string& name);

struct SyntheticProblem {
  std::string problem_id;
  double latent_requirement = 0.0;
};

struct SkillModel {
  double skill = 0.0;
  double learn_rate = 0.1;
  double slope = 1.5;
};

struct SimConfig {
  int bank_size = 128;
  int epochs = 100;
  int steps_per_epoch = 4;
  int rollouts = 8;  // k
  Strategy strategy = Strategy::Diva;
  // Requirement shift per variant level, strictly decreasing (level 1 hardest).
  std::array<double, 9> level_offsets = {6.0, 4.5, 3.25, 2.25, 0.5, 0.0, -1.0, -2.0, -3.0};
  double requirement_lo = -2.0;
  double requirement_hi = 2.0;
  double initial_skill = -2.5;
  double learn_rate = 0.05;
  double slope = 1.5;
  RewardMode reward_mode = RewardMode::Format;
  double format_prob = 0.9;        // chance an incorrect answer is still well formatted
  double format_reward = 0.1;      // reward of a formatted but incorrect answer
  double format_alignment = -0.5;  // skill projection of a formatted but incorrect answer
  int sample_cap = 2000;           // (difficulty, advantage) pairs kept per epoch; 0 keeps all
  int threads = 1;
  std::uint64_t rng_seed = 0;

  DifficultyConfig difficulty;
  SchedulerConfig scheduler;
  PipelineConfig pipeline;

  void validate() const;
};

struct SimEpochMetrics {
  std::uint64_t epoch = 0;
  double mean_accuracy = 0.0;      // over every rollout drawn this epoch
  double original_accuracy = 0.0;  // expected accuracy on the unmodified bank after the epoch
  double nonzero_advantage_fraction = 0.0;
  double skill = 0.0;
  std::vector<std::uint64_t> difficulty_histogram;  // unit bins over [d_min, d_max]
  std::vector<std::pair<double, double>> samples;   // (problem difficulty, final advantage)
  std::vector<double> problem_accuracy;             // per bank problem, this epoch

  bool operator==(const SimEpochMetrics&) const = default;
};

struct SimState {
  SkillModel model;
  DifficultyState difficulty;
  std::uint64_t epoch = 0;
};

std::vector<SyntheticProblem> generate_bank(const SimConfig& config);

/// logistic(slope * (skill - requirement - offset[level])).
double rollout_accuracy(const SkillModel& model, const SyntheticProblem& problem, int level, const SimConfig& config);

SimState initial_state(const SimConfig& config, const std::vector<SyntheticProblem>& bank);

/// One pass over the bank in `steps_per_epoch` batches.
std::pair<SimState, SimEpochMetrics> run_epoch(SimState state, const std::vector<SyntheticProblem>& bank,
                                              const SimConfig& config);

using EpochCallback = std::function<void(const SimState&, const SimEpochMetrics&)>;

std::vector<SimEpochMetrics> run_training(const SimConfig& config, const EpochCallback& on_epoch = {});

/// Histogram bin count for a difficulty range.
std::size_t histogram_bins(const DifficultyConfig& config);

/// Mean of `nonzero_advantage_fraction` over the last quarter of epochs.
double final_quarter_fraction(const std::vector<SimEpochMetrics>& trace);
double peak_fraction(const std::vector<SimEpochMetrics>& trace);

}  // namespace diva::sim
