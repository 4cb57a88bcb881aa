#include "diva/difficulty.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "diva/error.hpp"

namespace diva {

void DifficultyConfig::validate() const {
  if (!std::isfinite(d_min) || !std::isfinite(d_max) || !(d_min < d_max)) {
    throw Error(ErrorKind::InvalidArgument, "difficulty range requires d_min < d_max");
  }
  if (!(initial >= d_min && initial <= d_max)) {
    throw Error(ErrorKind::InvalidArgument, "initial difficulty must lie in [d_min, d_max]");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::InvalidArgument, "eta must be positive");
}

DifficultyState init_state(const DifficultyConfig& config, std::span<const std::string> problem_ids) {
  config.validate();
  if (problem_ids.empty()) throw Error(ErrorKind::InvalidArgument, "no problem ids given");
  DifficultyState state;
  for (const auto& id : problem_ids) {
    if (!state.scores.emplace(id, config.initial).second) {
      throw Error(ErrorKind::DuplicateProblemId, "duplicate problem id '" + id + "'");
    }
  }
  return state;
}

double accuracy(const EpochObservation& obs) {
  if (obs.total_count == 0) throw Error(ErrorKind::ZeroTotal, "problem '" + obs.problem_id + "' has no rollouts");
  if (obs.correct_count > obs.total_count) {
    throw Error(ErrorKind::InvalidArgument, "correct count exceeds total for '" + obs.problem_id + "'");
  }
  return static_cast<double>(obs.correct_count) / static_cast<double>(obs.total_count);
}

double updated_score(double old_score, double alpha, const DifficultyConfig& config) {
  return std::clamp(old_score + config.eta * (0.5 - alpha), config.d_min, config.d_max);
}

DifficultyState update_difficulty(DifficultyState state, const DifficultyConfig& config,
                                  const EpochObservation& obs) {
  auto it = state.scores.find(obs.problem_id);
  if (it == state.scores.end()) {
    throw Error(ErrorKind::UnknownProblemId, "unknown problem id '" + obs.problem_id + "'");
  }
  it->second = updated_score(it->second, accuracy(obs), config);
  return state;
}

DifficultyState apply_epoch(DifficultyState state, const DifficultyConfig& config,
                            std::span<const EpochObservation> observations) {
  for (const auto& obs : observations) state = update_difficulty(std::move(state), config, obs);
  ++state.epoch;
  return state;
}

std::string snapshot(const DifficultyState& state, const DifficultyConfig& config) {
  nlohmann::ordered_json doc;
  doc["format"] = kSnapshotFormat;
  doc["epoch"] = state.epoch;
  doc["d_min"] = config.d_min;
  doc["d_max"] = config.d_max;
  auto& scores = doc["scores"] = nlohmann::ordered_json::object();
  for (const auto& [id, score] : state.scores) scores[id] = score;
  // nlohmann prints the shortest representation that round-trips exactly.
  return doc.dump(2) + "\n";
}

DifficultyState restore(const std::string& document, const DifficultyConfig& config) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedSnapshot, e.what());
  }
  auto fail = [](const std::string& msg) { return Error(ErrorKind::MalformedSnapshot, msg); };
  if (!doc.is_object()) throw fail("snapshot is not an object");
  if (doc.value("format", std::string{}) != kSnapshotFormat) throw fail("missing or unknown format tag");
  if (!doc.contains("epoch") || !doc["epoch"].is_number_unsigned()) throw fail("missing epoch");
  if (!doc.contains("scores") || !doc["scores"].is_object()) throw fail("missing scores");

  DifficultyState state;
  state.epoch = doc["epoch"].get<std::uint64_t>();
  for (const auto& [id, value] : doc["scores"].items()) {
    if (!value.is_number()) throw fail("score for '" + id + "' is not a number");
    const double score = value.get<double>();
    if (!(score >= config.d_min && score <= config.d_max)) {
      throw fail("score " + std::to_string(score) + " for '" + id + "' outside [d_min, d_max]");
    }
    state.scores.emplace(id, score);
  }
  if (state.scores.empty()) throw fail("snapshot has no scores");
  return state;
}

}  // namespace diva
