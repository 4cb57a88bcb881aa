#include "diva/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "diva/error.hpp"
#include "diva/theory.hpp"

namespace diva::io {

using nlohmann::json;

namespace {

Error parse_error(const std::string& msg) { return Error(ErrorKind::ParseError, msg); }

template <typename T>
T read_field(const json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw parse_error(where + ": wrong type");
  }
}

// Dispatches each key of `section` to a setter; unknown keys are rejected.
void read_section(const json& doc, const char* name,
                  const std::map<std::string, std::function<void(const json&, const std::string&)>>& fields) {
  if (!doc.contains(name)) return;
  const json& section = doc.at(name);
  if (!section.is_object()) throw parse_error(std::string("section '") + name + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    auto it = fields.find(key);
    const std::string where = std::string(name) + "." + key;
    if (it == fields.end()) throw parse_error("unknown field '" + where + "'");
    it->second(value, where);
  }
}

template <typename T>
auto setter(T& target) {
  return [&target](const json& v, const std::string& where) { target = read_field<T>(v, where); };
}

CombineRule parse_combine(const std::string& s) {
  if (s == "mean") return CombineRule::Mean;
  if (s == "sum") return CombineRule::Sum;
  throw parse_error("combine must be 'mean' or 'sum'");
}

RrbScope parse_scope(const std::string& s) {
  if (s == "local") return RrbScope::Local;
  if (s == "global") return RrbScope::Global;
  if (s == "both") return RrbScope::Both;
  throw parse_error("rrb_scope must be 'local', 'global' or 'both'");
}

BatchNormMode parse_batch_norm(const std::string& s) {
  if (s == "auto") return BatchNormMode::Auto;
  if (s == "always") return BatchNormMode::Always;
  if (s == "never") return BatchNormMode::Never;
  throw parse_error("batch_norm must be 'auto', 'always' or 'never'");
}

const char* to_string(CombineRule r) { return r == CombineRule::Mean ? "mean" : "sum"; }
const char* to_string(RrbScope s) {
  return s == RrbScope::Local ? "local" : (s == RrbScope::Global ? "global" : "both");
}
const char* to_string(BatchNormMode m) {
  return m == BatchNormMode::Auto ? "auto" : (m == BatchNormMode::Always ? "always" : "never");
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

sim::SimConfig parse_run_config(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw parse_error(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw parse_error("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "sim" && key != "difficulty" && key != "scheduler" && key != "pipeline") {
      throw parse_error("unknown section '" + key + "'");
    }
  }

  sim::SimConfig c;
  read_section(doc, "sim",
               {
                   {"bank_size", setter(c.bank_size)},
                   {"epochs", setter(c.epochs)},
                   {"steps_per_epoch", setter(c.steps_per_epoch)},
                   {"rollouts", setter(c.rollouts)},
                   {"strategy",
                    [&](const json& v, const std::string& w) {
                      c.strategy = sim::parse_strategy(read_field<std::string>(v, w));
                    }},
                   {"level_offsets", setter(c.level_offsets)},
                   {"requirement_lo", setter(c.requirement_lo)},
                   {"requirement_hi", setter(c.requirement_hi)},
                   {"initial_skill", setter(c.initial_skill)},
                   {"learn_rate", setter(c.learn_rate)},
                   {"slope", setter(c.slope)},
                   {"reward_mode",
                    [&](const json& v, const std::string& w) {
                      c.reward_mode = sim::parse_reward_mode(read_field<std::string>(v, w));
                    }},
                   {"format_prob", setter(c.format_prob)},
                   {"format_reward", setter(c.format_reward)},
                   {"format_alignment", setter(c.format_alignment)},
                   {"sample_cap", setter(c.sample_cap)},
                   {"threads", setter(c.threads)},
                   {"seed", setter(c.rng_seed)},
               });
  read_section(doc, "difficulty",
               {
                   {"d_min", setter(c.difficulty.d_min)},
                   {"d_max", setter(c.difficulty.d_max)},
                   {"eta", setter(c.difficulty.eta)},
                   {"initial", setter(c.difficulty.initial)},
               });
  read_section(doc, "scheduler",
               {
                   {"variants_per_problem", setter(c.scheduler.variants_per_problem)},
                   {"sampling_std", setter(c.scheduler.sampling_std)},
                   {"include_original", setter(c.scheduler.include_original)},
               });
  read_section(doc, "pipeline",
               {
                   {"sensitivity_k", setter(c.pipeline.sensitivity_k)},
                   {"eps", setter(c.pipeline.eps)},
                   {"bessel", setter(c.pipeline.bessel)},
                   {"r_cap", setter(c.pipeline.r_cap)},
                   {"combine",
                    [&](const json& v, const std::string& w) {
                      c.pipeline.combine = parse_combine(read_field<std::string>(v, w));
                    }},
                   {"rrb", setter(c.pipeline.rrb)},
                   {"rrb_scope",
                    [&](const json& v, const std::string& w) {
                      c.pipeline.rrb_scope = parse_scope(read_field<std::string>(v, w));
                    }},
                   {"batch_norm",
                    [&](const json& v, const std::string& w) {
                      c.pipeline.batch_norm = parse_batch_norm(read_field<std::string>(v, w));
                    }},
               });
  c.validate();
  return c;
}

sim::SimConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const sim::SimConfig& c) {
  nlohmann::ordered_json doc;
  doc["sim"] = {
      {"bank_size", c.bank_size},
      {"epochs", c.epochs},
      {"steps_per_epoch", c.steps_per_epoch},
      {"rollouts", c.rollouts},
      {"strategy", sim::to_string(c.strategy)},
      {"level_offsets", c.level_offsets},
      {"requirement_lo", c.requirement_lo},
      {"requirement_hi", c.requirement_hi},
      {"initial_skill", c.initial_skill},
      {"learn_rate", c.learn_rate},
      {"slope", c.slope},
      {"reward_mode", sim::to_string(c.reward_mode)},
      {"format_prob", c.format_prob},
      {"format_reward", c.format_reward},
      {"format_alignment", c.format_alignment},
      {"sample_cap", c.sample_cap},
      {"threads", c.threads},
      {"seed", c.rng_seed},
  };
  doc["difficulty"] = {
      {"d_min", c.difficulty.d_min},
      {"d_max", c.difficulty.d_max},
      {"eta", c.difficulty.eta},
      {"initial", c.difficulty.initial},
  };
  doc["scheduler"] = {
      {"variants_per_problem", c.scheduler.variants_per_problem},
      {"sampling_std", c.scheduler.sampling_std},
      {"include_original", c.scheduler.include_original},
  };
  doc["pipeline"] = {
      {"sensitivity_k", c.pipeline.sensitivity_k},
      {"eps", c.pipeline.eps},
      {"bessel", c.pipeline.bessel},
      {"r_cap", c.pipeline.r_cap},
      {"combine", to_string(c.pipeline.combine)},
      {"rrb", c.pipeline.rrb},
      {"rrb_scope", to_string(c.pipeline.rrb_scope)},
      {"batch_norm", to_string(c.pipeline.batch_norm)},
  };
  return doc.dump(2) + "\n";
}

std::vector<VariantGroupRewards> parse_reward_log(std::istream& in, const DifficultyConfig& difficulty) {
  std::vector<VariantGroupRewards> groups;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      const json rec = json::parse(line);
      if (!rec.is_object()) throw parse_error("record must be a JSON object");
      for (const auto& [key, _] : rec.items()) {
        if (key != "problem_id" && key != "rewards" && key != "level" && key != "difficulty" && key != "group_id") {
          throw parse_error("unknown field '" + key + "'");
        }
      }
      if (!rec.contains("problem_id") || !rec["problem_id"].is_string()) throw parse_error("missing problem_id");
      if (!rec.contains("rewards") || !rec["rewards"].is_array()) throw parse_error("missing rewards array");
      const auto problem_id = rec["problem_id"].get<std::string>();
      const auto rewards = read_field<std::vector<double>>(rec["rewards"], "rewards");
      const int level = rec.contains("level") ? read_field<int>(rec["level"], "level") : kOriginalLevel;
      if (level < kMinLevel || level > kMaxLevel) throw parse_error("level must be in 1..9");
      const double d = rec.contains("difficulty") ? read_field<double>(rec["difficulty"], "difficulty")
                                                  : variant_difficulty(level, difficulty);

      auto [it, fresh] = index.emplace(problem_id, groups.size());
      if (fresh) groups.push_back(VariantGroupRewards{problem_id, {}});
      auto& group = groups[it->second];
      const std::string group_id = rec.contains("group_id")
                                       ? read_field<std::string>(rec["group_id"], "group_id")
                                       : problem_id + "#" + std::to_string(group.members.size());
      group.members.push_back(VariantMember{level, d, RolloutGroup(group_id, rewards)});
      group.validate();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  if (groups.empty()) throw parse_error("reward log contains no records");
  return groups;
}

void write_advantage_csv(std::ostream& out, const BatchAdvantages& batch) {
  out << kAdvantageCsvHeader << '\n';
  for (const auto& g : batch.groups) {
    for (const auto& r : g.rollouts) {
      out << g.problem_id << ',' << r.member << ',' << r.level << ',' << format_number(r.difficulty) << ','
          << format_number(r.reward) << ',' << format_number(r.local_raw) << ',' << format_number(r.global_raw)
          << ',' << format_number(r.combined) << ',' << format_number(r.weighted) << ','
          << format_number(r.final) << '\n';
    }
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<sim::SimEpochMetrics>& trace, sim::Strategy strategy,
                       const DifficultyConfig& difficulty) {
  const std::size_t bins = sim::histogram_bins(difficulty);
  out << kMetricsCsvPrefix;
  for (std::size_t b = 0; b < bins; ++b) out << ",hist_" << b;
  out << '\n';
  for (const auto& m : trace) {
    out << m.epoch << ',' << sim::to_string(strategy) << ',' << format_number(m.mean_accuracy) << ','
        << format_number(m.original_accuracy) << ',' << format_number(m.nonzero_advantage_fraction) << ','
        << format_number(m.skill);
    for (auto c : m.difficulty_histogram) out << ',' << c;
    out << '\n';
  }
}

void write_samples(std::ostream& out, const std::vector<sim::SimEpochMetrics>& trace) {
  for (const auto& m : trace) {
    out << "{\"epoch\":" << m.epoch << ",\"samples\":[";
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
      if (i) out << ',';
      out << '[' << format_number(m.samples[i].first) << ',' << format_number(m.samples[i].second) << ']';
    }
    out << "]}\n";
  }
}

void write_theory_csv(std::ostream& out, double grid_step) {
  if (!(grid_step > 0.0 && grid_step < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "grid step must be in (0, 0.5)");
  }
  out << kTheoryCsvHeader << '\n';
  const auto rows = static_cast<long>(std::ceil(1.0 / grid_step - 1e-9)) - 1;
  for (long i = 1; i <= rows; ++i) {
    const double mu = static_cast<double>(i) * grid_step;
    if (!(mu < 1.0)) break;
    const auto a = theory::binary_advantages(mu);
    out << format_number(mu) << ',' << format_number(a.a_plus) << ',' << format_number(a.a_minus) << ','
        << format_number(theory::projected_signal(mu, 1.0, 0.0)) << '\n';
  }
}

}  // namespace diva::io
