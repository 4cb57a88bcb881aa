#pragma once

// Text formats: run configuration (JSON), reward logs (JSON lines), and the
// CSV / JSON-lines exports written by the command-line tool.

#include <iosfwd>
#include <string>
#include <vector>

#include "diva/advantage.hpp"
#include "diva/simulator.hpp"

namespace diva::io {

/// Parses a run configuration:
///   {"sim": {...}, "difficulty": {...}, "scheduler": {...}, "pipeline": {...}}
/// Every section and field is optional; missing ones keep their defaults.
/// Unknown fields and invariant violations raise ParseError / InvalidArgument.
sim::SimConfig parse_run_config(const std::string& document);
sim::SimConfig load_run_config(const std::string& path);

/// The full configuration with every field spelled out.
std::string dump_run_config(const sim::SimConfig& config);

/// One JSON object per line:
///   {"problem_id": "q1", "rewards": [0, 1, ...], "level": 6, "difficulty": 5.0, "group_id": "q1#0"}
/// `level`, `difficulty` and `group_id` are optional; a missing difficulty is
/// derived from the level. Records sharing a problem_id form one variant
/// group, in order of first appearance. Blank lines are skipped. Errors name
/// the offending line.
std::vector<VariantGroupRewards> parse_reward_log(std::istream& in, const DifficultyConfig& difficulty);

inline constexpr const char* kAdvantageCsvHeader =
    "problem_id,variant_index,level,difficulty,reward,local,global,combined,weighted,final";
void write_advantage_csv(std::ostream& out, const BatchAdvantages& batch);

inline constexpr const char* kMetricsCsvPrefix =
    "epoch,strategy,mean_accuracy,original_accuracy,nonzero_advantage_fraction,skill";
void write_metrics_csv(std::ostream& out, const std::vector<sim::SimEpochMetrics>& trace, sim::Strategy strategy,
                       const DifficultyConfig& difficulty);

/// One JSON object per epoch: {"epoch": n, "samples": [[difficulty, advantage], ...]}.
void write_samples(std::ostream& out, const std::vector<sim::SimEpochMetrics>& trace);

inline constexpr const char* kTheoryCsvHeader = "mu,a_plus,a_minus,signal";
/// Rows for mu = step, 2*step, ... strictly inside (0, 1). InvalidArgument
/// unless step is in (0, 0.5).
void write_theory_csv(std::ostream& out, double grid_step);

/// Shortest stable decimal rendering used in every CSV column.
std::string format_number(double v);

}  // namespace diva::io
