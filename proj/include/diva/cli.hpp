#pragma once

// In-process implementations of the `diva` subcommands. Each returns an exit
// code and writes diagnostics to `err`; tools/diva_main.cpp only parses flags.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "diva/simulator.hpp"

namespace diva::cli {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// DIVA_LOG=error|warn|info|debug (default warn).
LogLevel log_level_from_env();

class Logger {
 public:
  Logger(std::ostream& sink, LogLevel level) : sink_(sink), level_(level) {}
  void error(const std::string& msg) const { write(LogLevel::Error, "error", msg); }
  void warn(const std::string& msg) const { write(LogLevel::Warn, "warn", msg); }
  void info(const std::string& msg) const { write(LogLevel::Info, "info", msg); }
  void debug(const std::string& msg) const { write(LogLevel::Debug, "debug", msg); }

 private:
  void write(LogLevel at, const char* tag, const std::string& msg) const;
  std::ostream& sink_;
  LogLevel level_;
};

/// Flags override values from the config file.
struct SimulateOptions {
  std::string config_path;  // empty: built-in defaults
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<int> epochs;
  std::optional<int> threads;
};

sim::SimConfig resolve_config(const SimulateOptions& opts);

/// Writes metrics.csv, samples.txt and difficulty/epoch_NNNN.json under out_dir.
int cmd_simulate(const SimulateOptions& opts, const Logger& log);

/// Applies the image recipe of `level`; levels without one copy the input.
int cmd_perturb(const std::string& image_path, int level, std::uint64_t seed, const std::string& out_path,
                const Logger& log);

/// Reads a reward log and writes the per-rollout advantage CSV.
int cmd_advantage(const std::string& rewards_path, const std::string& config_path, const std::string& out_path,
                  const Logger& log);

int cmd_theory(const std::string& out_path, double grid_step, const Logger& log);

/// Prints the fully resolved configuration as JSON.
int cmd_config(const SimulateOptions& opts, const std::string& out_path, const Logger& log);

}  // namespace diva::cli
