#include "diva/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "diva/config_io.hpp"
#include "diva/error.hpp"
#include "diva/image.hpp"
#include "diva/theory.hpp"
#include "diva/variants.hpp"

namespace fs = std::filesystem;

namespace diva::cli {

LogLevel log_level_from_env() {
  const char* v = std::getenv("DIVA_LOG");
  if (v == nullptr) return LogLevel::Warn;
  const std::string s(v);
  if (s == "error") return LogLevel::Error;
  if (s == "info") return LogLevel::Info;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

void Logger::write(LogLevel at, const char* tag, const std::string& msg) const {
  if (static_cast<int>(at) > static_cast<int>(level_)) return;
  sink_ << "diva: " << tag << ": " << msg << '\n';
}

namespace {

// Writes through a sibling temp file so a failed command leaves nothing behind.
void write_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
      body(out);
      out.flush();
      if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

template <typename F>
int guarded(const Logger& log, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

std::string epoch_file(std::uint64_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04llu.json", static_cast<unsigned long long>(epoch));
  return buf;
}

}  // namespace

sim::SimConfig resolve_config(const SimulateOptions& opts) {
  sim::SimConfig c = opts.config_path.empty() ? sim::SimConfig{} : io::load_run_config(opts.config_path);
  if (opts.seed) c.rng_seed = *opts.seed;
  if (opts.strategy) c.strategy = sim::parse_strategy(*opts.strategy);
  if (opts.epochs) c.epochs = *opts.epochs;
  if (opts.threads) c.threads = *opts.threads;
  c.validate();
  return c;
}

int cmd_simulate(const SimulateOptions& opts, const Logger& log) {
  return guarded(log, [&] {
    if (opts.out_dir.empty()) throw Error(ErrorKind::InvalidArgument, "--out is required");
    const auto config = resolve_config(opts);

    const fs::path out(opts.out_dir);
    const bool created = !fs::exists(out);
    fs::create_directories(out);
    const fs::path staging = out / ".staging";
    fs::remove_all(staging);

    try {
      fs::create_directories(staging / "difficulty");
      log.info("simulating " + std::to_string(config.epochs) + " epochs, strategy " +
               sim::to_string(config.strategy) + ", seed " + std::to_string(config.rng_seed));

      const auto trace = sim::run_training(config, [&](const sim::SimState& state, const sim::SimEpochMetrics& m) {
        write_file(staging / "difficulty" / epoch_file(m.epoch), snapshot(state.difficulty, config.difficulty));
        log.debug("epoch " + std::to_string(m.epoch) + " fraction " + io::format_number(m.nonzero_advantage_fraction) +
                  " skill " + io::format_number(m.skill));
      });

      std::ostringstream metrics, samples;
      io::write_metrics_csv(metrics, trace, config.strategy, config.difficulty);
      io::write_samples(samples, trace);
      write_file(staging / "metrics.csv", metrics.str());
      write_file(staging / "samples.txt", samples.str());

      for (const auto& entry : fs::directory_iterator(staging)) {
        const auto dest = out / entry.path().filename();
        fs::remove_all(dest);
        fs::rename(entry.path(), dest);
      }
      fs::remove_all(staging);
    } catch (...) {
      std::error_code ec;
      fs::remove_all(staging, ec);
      if (created) fs::remove(out, ec);
      throw;
    }
    log.info("wrote " + out.string());
    return 0;
  });
}

int cmd_perturb(const std::string& image_path, int level, std::uint64_t seed, const std::string& out_path,
                const Logger& log) {
  return guarded(log, [&] {
    if (level < kMinLevel || level > kMaxLevel) throw Error(ErrorKind::InvalidArgument, "level must be in 1..9");
    if (out_path.empty()) throw Error(ErrorKind::InvalidArgument, "--out is required");
    const auto img = read_image(image_path);
    const VariantTable table;
    const auto& recipe = table.at(level).recipe;
    if (!has_image_perturbation(recipe)) {
      log.warn("level " + std::to_string(level) + " (" + describe(recipe) + ") has no image recipe; copying input");
      std::ifstream in(image_path, std::ios::binary);
      std::ostringstream bytes;
      bytes << in.rdbuf();
      write_output(out_path, [&](std::ostream& o) { o << bytes.str(); });
      return 0;
    }
    const auto result = apply_recipe(img, recipe, seed);
    const auto encoded = encode_pnm(result.image);
    write_output(out_path, [&](std::ostream& o) {
      o.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(encoded.size()));
    });
    log.info("applied " + result.applied);
    return 0;
  });
}

int cmd_advantage(const std::string& rewards_path, const std::string& config_path, const std::string& out_path,
                  const Logger& log) {
  return guarded(log, [&] {
    const auto config = config_path.empty() ? sim::SimConfig{} : io::load_run_config(config_path);
    std::ifstream in(rewards_path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open reward log " + rewards_path);
    const auto batch = io::parse_reward_log(in, config.difficulty);
    const auto result = run_pipeline(batch, config.pipeline);
    if (result.local_degenerate || result.global_degenerate) {
      log.warn("a batch channel is constant; it was normalized to zeros");
    }
    write_output(out_path, [&](std::ostream& o) { io::write_advantage_csv(o, result); });
    return 0;
  });
}

int cmd_theory(const std::string& out_path, double grid_step, const Logger& log) {
  return guarded(log, [&] {
    if (!(grid_step > 0.0 && grid_step < 0.5)) {
      throw Error(ErrorKind::InvalidArgument, "grid step must be in (0, 0.5)");
    }
    write_output(out_path, [&](std::ostream& o) { io::write_theory_csv(o, grid_step); });
    return 0;
  });
}

int cmd_config(const SimulateOptions& opts, const std::string& out_path, const Logger& log) {
  return guarded(log, [&] {
    const auto text = io::dump_run_config(resolve_config(opts));
    write_output(out_path.empty() ? "-" : out_path, [&](std::ostream& o) { o << text; });
    return 0;
  });
}

}  // namespace diva::cli
