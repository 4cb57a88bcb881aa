#include "diva/advantage.hpp"

#include <algorithm>
#include <numeric>

#include "diva/error.hpp"

namespace diva {

namespace {

template <typename F>
auto in_stage(const char* stage, const std::string& problem_id, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::string where = std::string("stage '") + stage + "'";
    if (!problem_id.empty()) where += " (problem '" + problem_id + "')";
    throw Error(e.kind(), where + ": " + e.what());
  }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void VariantGroupRewards::validate() const {
  if (members.empty()) throw Error(ErrorKind::InvalidArgument, "problem '" + problem_id + "' has no members");
  const std::size_t k = members.front().rollouts.size();
  for (const auto& m : members) {
    if (m.rollouts.size() != k) {
      throw Error(ErrorKind::InvalidArgument, "problem '" + problem_id + "' mixes rollout counts");
    }
    if (!std::isfinite(m.difficulty)) {
      throw Error(ErrorKind::InvalidArgument, "problem '" + problem_id + "' has a non-finite difficulty");
    }
  }
}

std::size_t VariantGroupRewards::rollout_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : members) n += m.rollouts.size();
  return n;
}

std::vector<double> VariantGroupRewards::pooled_rewards() const {
  std::vector<double> out;
  out.reserve(rollout_count());
  for (const auto& m : members) out.insert(out.end(), m.rollouts.rewards().begin(), m.rollouts.rewards().end());
  return out;
}

void PipelineConfig::validate() const {
  if (!(sensitivity_k >= 0.0) || !std::isfinite(sensitivity_k)) {
    throw Error(ErrorKind::InvalidArgument, "sensitivity_k must be >= 0");
  }
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  if (!(r_cap > 0.0) || !std::isfinite(r_cap)) throw Error(ErrorKind::InvalidArgument, "r_cap must be positive");
}

double sensitivity_for(double max_weight, double max_gap) {
  if (!(max_weight >= 1.0) || !(max_gap > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "need max_weight >= 1 and a positive gap");
  }
  return std::log(max_weight) / max_gap;
}

std::vector<double> local_advantages(const VariantGroupRewards& group, const PipelineConfig& cfg) {
  group.validate();
  std::vector<double> out;
  out.reserve(group.rollout_count());
  for (const auto& m : group.members) {
    const auto z = zscore_advantages(m.rollouts, cfg.eps, cfg.bessel);
    out.insert(out.end(), z.begin(), z.end());
  }
  return out;
}

std::vector<double> global_advantages(const VariantGroupRewards& group, const PipelineConfig& cfg) {
  group.validate();
  return zscore_advantages(group.pooled_rewards(), cfg.eps, cfg.bessel);
}

std::vector<double> batch_zscore(std::span<const double> values, double eps, bool& degenerate) {
  const GroupStats st = group_stats(values, /*bessel=*/false);
  std::vector<double> out(values.size(), 0.0);
  degenerate = st.std == 0.0;
  if (degenerate) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - st.mean) / (st.std + eps);
  return out;
}

NormalizedChannels batch_normalize(std::span<const double> local, std::span<const double> global, double eps) {
  if (local.size() < 2 || global.size() < 2) {
    throw Error(ErrorKind::GroupTooSmall, "batch normalization needs at least 2 values per channel");
  }
  NormalizedChannels out;
  out.local = batch_zscore(local, eps, out.local_degenerate);
  out.global = batch_zscore(global, eps, out.global_degenerate);
  return out;
}

std::vector<double> combine(std::span<const double> local, std::span<const double> global, CombineRule rule) {
  if (local.size() != global.size()) {
    throw Error(ErrorKind::LengthMismatch, "local and global channels differ in length");
  }
  std::vector<double> out(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    out[i] = rule == CombineRule::Mean ? 0.5 * (local[i] + global[i]) : local[i] + global[i];
  }
  return out;
}

double difficulty_factor(double k, double delta, double adv) { return std::exp(k * delta * sign(adv)); }

std::vector<double> difficulty_weight(std::span<const double> combined, const VariantGroupRewards& group,
                                      const PipelineConfig& cfg) {
  group.validate();
  if (combined.size() != group.rollout_count()) {
    throw Error(ErrorKind::LengthMismatch, "advantage count does not match the group's rollouts");
  }
  double mean_d = 0.0;
  for (const auto& m : group.members) mean_d += m.difficulty;
  mean_d /= static_cast<double>(group.members.size());

  std::vector<double> out(combined.size());
  std::size_t i = 0;
  for (const auto& m : group.members) {
    const double delta = m.difficulty - mean_d;
    for (std::size_t j = 0; j < m.rollouts.size(); ++j, ++i) {
      out[i] = difficulty_factor(cfg.sensitivity_k, delta, combined[i]) * combined[i];
    }
  }
  return out;
}

RangeScaled rrb_rescale(std::span<const double> advantages, const VariantGroupRewards& group,
                        const PipelineConfig& cfg) {
  group.validate();
  if (advantages.size() != group.rollout_count()) {
    throw Error(ErrorKind::LengthMismatch, "advantage count does not match the group's rollouts");
  }
  const double global_range = reward_range(group.pooled_rewards(), cfg.r_cap);
  RangeScaled out;
  out.values.resize(advantages.size());
  std::size_t i = 0;
  for (const auto& m : group.members) {
    const double local_range = reward_range(m.rollouts.rewards(), cfg.r_cap);
    double dr = local_range;
    if (cfg.rrb_scope == RrbScope::Global) dr = global_range;
    if (cfg.rrb_scope == RrbScope::Both) dr = local_range * global_range;
    out.delta_r.push_back(dr);
    for (std::size_t j = 0; j < m.rollouts.size(); ++j, ++i) out.values[i] = dr * advantages[i];
  }
  return out;
}

BatchAdvantages run_pipeline(std::span<const VariantGroupRewards> batch, const PipelineConfig& cfg) {
  cfg.validate();
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");

  BatchAdvantages result;
  std::vector<double> all_local;
  std::vector<double> all_global;
  bool multi_member = false;
  for (const auto& g : batch) {
    in_stage("validate", g.problem_id, [&] {
      g.validate();
      for (const auto& m : g.members) m.rollouts.check_cap(cfg.r_cap);
    });
    const auto local = in_stage("local", g.problem_id, [&] { return local_advantages(g, cfg); });
    const auto global = in_stage("global", g.problem_id, [&] { return global_advantages(g, cfg); });
    all_local.insert(all_local.end(), local.begin(), local.end());
    all_global.insert(all_global.end(), global.begin(), global.end());
    multi_member = multi_member || g.members.size() > 1;
  }

  const bool normalize = cfg.batch_norm == BatchNormMode::Always ||
                         (cfg.batch_norm == BatchNormMode::Auto && multi_member);
  NormalizedChannels norm;
  if (normalize) {
    norm = in_stage("batch_normalize", "", [&] { return batch_normalize(all_local, all_global, cfg.eps); });
  } else {
    norm.local = all_local;
    norm.global = all_global;
  }
  result.batch_normalized = normalize;
  result.local_degenerate = norm.local_degenerate;
  result.global_degenerate = norm.global_degenerate;

  const auto combined_all = in_stage("combine", "", [&] { return combine(norm.local, norm.global, cfg.combine); });

  std::size_t offset = 0;
  for (const auto& g : batch) {
    const std::size_t n = g.rollout_count();
    const std::span<const double> combined(combined_all.data() + offset, n);
    const auto weighted = in_stage("difficulty_weight", g.problem_id, [&] { return difficulty_weight(combined, g, cfg); });
    RangeScaled scaled;
    if (cfg.rrb) {
      scaled = in_stage("rrb_rescale", g.problem_id, [&] { return rrb_rescale(weighted, g, cfg); });
    } else {
      scaled.values = weighted;
      scaled.delta_r.assign(g.members.size(), 1.0);
    }

    GroupAdvantages ga;
    ga.problem_id = g.problem_id;
    ga.delta_r = scaled.delta_r;
    std::size_t i = 0;
    for (std::size_t mi = 0; mi < g.members.size(); ++mi) {
      const auto& m = g.members[mi];
      for (std::size_t j = 0; j < m.rollouts.size(); ++j, ++i) {
        RolloutAdvantage ra;
        ra.member = static_cast<int>(mi);
        ra.rollout = static_cast<int>(j);
        ra.level = m.level;
        ra.difficulty = m.difficulty;
        ra.reward = m.rollouts.rewards()[j];
        ra.local_raw = all_local[offset + i];
        ra.global_raw = all_global[offset + i];
        ra.local_norm = norm.local[offset + i];
        ra.global_norm = norm.global[offset + i];
        ra.combined = combined[i];
        ra.weighted = weighted[i];
        ra.final = scaled.values[i];
        ga.rollouts.push_back(ra);
      }
    }
    result.groups.push_back(std::move(ga));
    offset += n;
  }
  return result;
}

}  // namespace diva
