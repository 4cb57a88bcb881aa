#include "diva/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "diva/error.hpp"
#include "diva/rng.hpp"

namespace diva::sim {

namespace {

struct ProblemRollouts {
  VariantGroupRewards group;
  std::vector<char> correct;  // member-major, parallels the group's rewards
  std::vector<char> formatted_wrong;
};

template <typename F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t used = std::min(workers, n);
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += used) fn(i);
    });
  }
}

PipelineConfig strategy_pipeline(const SimConfig& config) {
  PipelineConfig p = config.pipeline;
  if (config.strategy == Strategy::Grpo) p.rrb = false;
  if (config.strategy == Strategy::GrpoRrb) {
    p.rrb = true;
    p.rrb_scope = RrbScope::Local;
  }
  return p;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ProblemRollouts draw_problem(const SimState& state, const SyntheticProblem& problem, const SimConfig& config,
                             const VariantTable& table) {
  const std::uint64_t stream = derive_seed(config.rng_seed, state.epoch, hash_id(problem.problem_id));
  std::vector<int> levels;
  if (config.strategy == Strategy::Diva) {
    SchedulerConfig sched = config.scheduler;
    sched.rng_seed = derive_seed(config.rng_seed, 0x5C4Eull);
    const double score = state.difficulty.scores.at(problem.problem_id);
    for (const auto& spec : build_specs(problem.problem_id, score, config.difficulty, sched, table, state.epoch)) {
      levels.push_back(spec.level.level);
    }
  } else {
    levels.push_back(kOriginalLevel);
  }

  Rng rng(derive_seed(stream, 0xA11Dull));
  ProblemRollouts out;
  out.group.problem_id = problem.problem_id;
  for (std::size_t mi = 0; mi < levels.size(); ++mi) {
    const double p = rollout_accuracy(state.model, problem, levels[mi], config);
    std::vector<double> rewards;
    for (int j = 0; j < config.rollouts; ++j) {
      const bool ok = rng.bernoulli(p);
      double r = ok ? 1.0 : 0.0;
      bool fmt_wrong = false;
      if (config.reward_mode == RewardMode::Format && !ok && rng.bernoulli(config.format_prob)) {
        r = config.format_reward;
        fmt_wrong = true;
      }
      rewards.push_back(r);
      out.correct.push_back(ok ? 1 : 0);
      out.formatted_wrong.push_back(fmt_wrong ? 1 : 0);
    }
    out.group.members.push_back(VariantMember{
        levels[mi], variant_difficulty(levels[mi], config.difficulty),
        RolloutGroup(problem.problem_id + "#" + std::to_string(mi), std::move(rewards))});
  }
  return out;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Grpo: return "grpo";
    case Strategy::GrpoRrb: return "grpo_rrb";
    case Strategy::Diva: return "diva";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "grpo") return Strategy::Grpo;
  if (name == "grpo_rrb") return Strategy::GrpoRrb;
  if (name == "diva") return Strategy::Diva;
  throw Error(ErrorKind::InvalidArgument, "unknown strategy '" + name + "' (grpo, grpo_rrb, diva)");
}

std::string to_string(RewardMode m) { return m == RewardMode::Binary ? "binary" : "format"; }

RewardMode parse_reward_mode(const std::string& name) {
  if (name == "binary") return RewardMode::Binary;
  if (name == "format") return RewardMode::Format;
  throw Error(ErrorKind::InvalidArgument, "unknown reward mode '" + name + "' (binary, format)");
}

void SimConfig::validate() const {
  auto bad = [](const std::string& msg) { return Error(ErrorKind::InvalidArgument, msg); };
  if (bank_size < 1) throw bad("bank_size must be >= 1");
  if (epochs < 1) throw bad("epochs must be >= 1");
  if (steps_per_epoch < 1) throw bad("steps_per_epoch must be >= 1");
  if (rollouts < 2) throw bad("rollouts must be >= 2");
  for (std::size_t i = 1; i < level_offsets.size(); ++i) {
    if (!(level_offsets[i] < level_offsets[i - 1])) throw bad("level_offsets must be strictly decreasing");
  }
  if (!(requirement_lo <= requirement_hi)) throw bad("requirement span is empty");
  if (!(learn_rate > 0.0) || !(slope > 0.0)) throw bad("learn_rate and slope must be positive");
  if (!(format_prob >= 0.0 && format_prob <= 1.0)) throw bad("format_prob must be in [0, 1]");
  if (!(format_reward > 0.0 && format_reward < 1.0)) throw bad("format_reward must be in (0, 1)");
  if (!std::isfinite(format_alignment)) throw bad("format_alignment must be finite");
  if (sample_cap < 0) throw bad("sample_cap must be >= 0");
  if (threads < 1) throw bad("threads must be >= 1");
  difficulty.validate();
  scheduler.validate();
  pipeline.validate();
}

std::vector<SyntheticProblem> generate_bank(const SimConfig& config) {
  if (config.bank_size < 1) throw Error(ErrorKind::InvalidArgument, "bank_size must be >= 1");
  Rng rng(derive_seed(config.rng_seed, 0xBA4Cull));
  std::vector<SyntheticProblem> bank;
  bank.reserve(static_cast<std::size_t>(config.bank_size));
  const int width = static_cast<int>(std::to_string(config.bank_size - 1).size());
  for (int i = 0; i < config.bank_size; ++i) {
    std::string id = std::to_string(i);
    id.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0');
    const double req = config.requirement_lo + (config.requirement_hi - config.requirement_lo) * rng.uniform();
    bank.push_back({"p" + id, req});
  }
  return bank;
}

double rollout_accuracy(const SkillModel& model, const SyntheticProblem& problem, int level, const SimConfig& config) {
  if (level < kMinLevel || level > kMaxLevel) {
    throw Error(ErrorKind::InvalidArgument, "variant level " + std::to_string(level) + " outside 1..9");
  }
  const double offset = config.level_offsets[static_cast<std::size_t>(level - 1)];
  return logistic(model.slope * (model.skill - problem.latent_requirement - offset));
}

SimState initial_state(const SimConfig& config, const std::vector<SyntheticProblem>& bank) {
  std::vector<std::string> ids;
  ids.reserve(bank.size());
  for (const auto& p : bank) ids.push_back(p.problem_id);
  SimState s;
  s.model = {config.initial_skill, config.learn_rate, config.slope};
  s.difficulty = init_state(config.difficulty, ids);
  return s;
}

std::size_t histogram_bins(const DifficultyConfig& config) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(config.d_max - config.d_min)));
}

std::pair<SimState, SimEpochMetrics> run_epoch(SimState state, const std::vector<SyntheticProblem>& bank,
                                              const SimConfig& config) {
  static const VariantTable table;
  const PipelineConfig pipeline = strategy_pipeline(config);

  // Visit order for this epoch, then split into steps.
  std::vector<std::size_t> order(bank.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle(derive_seed(config.rng_seed, state.epoch, 0x0DE4ull));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

  SimEpochMetrics metrics;
  metrics.epoch = state.epoch + 1;
  std::vector<std::uint64_t> correct_by_problem(bank.size(), 0);
  std::vector<std::uint64_t> total_by_problem(bank.size(), 0);
  std::uint64_t correct_total = 0;
  std::uint64_t rollout_total = 0;
  std::uint64_t nonzero_total = 0;
  std::vector<std::pair<double, double>> samples;

  const auto steps = static_cast<std::size_t>(config.steps_per_epoch);
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t begin = order.size() * step / steps;
    const std::size_t end = order.size() * (step + 1) / steps;
    if (begin == end) continue;

    std::vector<ProblemRollouts> drawn(end - begin);
    parallel_for(drawn.size(), config.threads, [&](std::size_t i) {
      drawn[i] = draw_problem(state, bank[order[begin + i]], config, table);
    });

    std::vector<VariantGroupRewards> batch;
    batch.reserve(drawn.size());
    for (const auto& d : drawn) batch.push_back(d.group);
    const BatchAdvantages adv = run_pipeline(batch, pipeline);

    double signal = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < drawn.size(); ++i) {
      const std::size_t bank_index = order[begin + i];
      const double score = state.difficulty.scores.at(bank[bank_index].problem_id);
      const auto& rolls = adv.groups[i].rollouts;
      for (std::size_t j = 0; j < rolls.size(); ++j) {
        const double a = rolls[j].final;
        const double direction = drawn[i].correct[j] ? 1.0 : (drawn[i].formatted_wrong[j] ? config.format_alignment : 0.0);
        signal += a * direction;
        ++count;
        if (std::abs(a) > 1e-12) ++nonzero_total;
        correct_by_problem[bank_index] += static_cast<std::uint64_t>(drawn[i].correct[j]);
        samples.emplace_back(score, a);
      }
      total_by_problem[bank_index] += rolls.size();
    }
    rollout_total += count;
    if (count > 0) state.model.skill += state.model.learn_rate * signal / static_cast<double>(count);
  }

  std::vector<EpochObservation> observations;
  observations.reserve(bank.size());
  metrics.problem_accuracy.resize(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    correct_total += correct_by_problem[i];
    metrics.problem_accuracy[i] =
        total_by_problem[i] ? static_cast<double>(correct_by_problem[i]) / static_cast<double>(total_by_problem[i]) : 0.0;
    observations.push_back({bank[i].problem_id, correct_by_problem[i], total_by_problem[i]});
  }
  if (config.strategy == Strategy::Diva) {
    state.difficulty = apply_epoch(std::move(state.difficulty), config.difficulty, observations);
  } else {
    ++state.difficulty.epoch;
  }
  ++state.epoch;

  metrics.mean_accuracy = rollout_total ? static_cast<double>(correct_total) / static_cast<double>(rollout_total) : 0.0;
  metrics.nonzero_advantage_fraction =
      rollout_total ? static_cast<double>(nonzero_total) / static_cast<double>(rollout_total) : 0.0;
  metrics.skill = state.model.skill;
  double orig = 0.0;
  for (const auto& p : bank) orig += rollout_accuracy(state.model, p, kOriginalLevel, config);
  metrics.original_accuracy = orig / static_cast<double>(bank.size());

  const std::size_t bins = histogram_bins(config.difficulty);
  metrics.difficulty_histogram.assign(bins, 0);
  for (const auto& [id, score] : state.difficulty.scores) {
    const auto b = static_cast<std::size_t>(std::max(0.0, std::floor(score - config.difficulty.d_min)));
    ++metrics.difficulty_histogram[std::min(b, bins - 1)];
  }

  const auto cap = static_cast<std::size_t>(config.sample_cap);
  if (cap == 0 || samples.size() <= cap) {
    metrics.samples = std::move(samples);
  } else {
    metrics.samples.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) metrics.samples.push_back(samples[i * samples.size() / cap]);
  }
  return {std::move(state), std::move(metrics)};
}

std::vector<SimEpochMetrics> run_training(const SimConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const auto bank = generate_bank(config);
  SimState state = initial_state(config, bank);
  std::vector<SimEpochMetrics> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));
  for (int e = 0; e < config.epochs; ++e) {
    auto [next, metrics] = run_epoch(std::move(state), bank, config);
    state = std::move(next);
    if (on_epoch) on_epoch(state, metrics);
    trace.push_back(std::move(metrics));
  }
  return trace;
}

double final_quarter_fraction(const std::vector<SimEpochMetrics>& trace) {
  if (trace.empty()) return 0.0;
  const std::size_t start = trace.size() - std::max<std::size_t>(1, trace.size() / 4);
  double sum = 0.0;
  for (std::size_t i = start; i < trace.size(); ++i) sum += trace[i].nonzero_advantage_fraction;
  return sum / static_cast<double>(trace.size() - start);
}

double peak_fraction(const std::vector<SimEpochMetrics>& trace) {
  double best = 0.0;
  for (const auto& m : trace) best = std::max(best, m.nonzero_advantage_fraction);
  return best;
}

}  // namespace diva::sim
