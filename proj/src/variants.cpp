#include "diva/variants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "diva/error.hpp"

namespace diva {

namespace {

std::array<VariantLevel, 9> builtin_levels() {
  return {{
      {1, ImageAndTextPerturb{0.45, 1, Combine::And}},
      {2, ImageAndTextPerturb{0.45, 30, Combine::Or}},
      {3, ImageAndTextPerturb{0.30, 45, Combine::Or}},
      {4, ImagePerturbOnly{0.30, 90}},
      {5, TextParaphrase{}},
      {6, OriginalOrParaphrase{}},
      {7, ThinkSteps{1}},
      {8, ThinkSteps{2}},
      {9, ThinkSteps{3}},
  }};
}

void check_image_params(int level, double noise, int rotation) {
  if (!(noise > 0.0 && noise <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "level " + std::to_string(level) + ": noise intensity must be in (0, 1]");
  }
  if (rotation < 1 || rotation > 359) {
    throw Error(ErrorKind::InvalidArgument, "level " + std::to_string(level) + ": rotation multiple must be in [1, 359]");
  }
}

void check_level(const VariantLevel& v) {
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ImageAndTextPerturb> || std::is_same_v<T, ImagePerturbOnly>) {
          check_image_params(v.level, r.noise_intensity, r.rotation_multiple_deg);
        } else if constexpr (std::is_same_v<T, ThinkSteps>) {
          if (r.count < 1) throw Error(ErrorKind::InvalidArgument, "think-step count must be positive");
        }
      },
      v.recipe);
}

}  // namespace

bool has_image_perturbation(const Recipe& recipe) noexcept {
  return std::holds_alternative<ImageAndTextPerturb>(recipe) || std::holds_alternative<ImagePerturbOnly>(recipe);
}

std::string describe(const Recipe& recipe) {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ImageAndTextPerturb>) {
          os << "gaussian " << r.noise_intensity << (r.combine == Combine::And ? " and" : " or") << " rotate x"
             << r.rotation_multiple_deg << "deg + text variant/embed";
        } else if constexpr (std::is_same_v<T, ImagePerturbOnly>) {
          os << "gaussian " << r.noise_intensity << " or rotate x" << r.rotation_multiple_deg << "deg";
        } else if constexpr (std::is_same_v<T, TextParaphrase>) {
          os << "text paraphrase";
        } else if constexpr (std::is_same_v<T, OriginalOrParaphrase>) {
          os << "original or paraphrase";
        } else {
          os << r.count << " think step" << (r.count == 1 ? "" : "s");
        }
      },
      recipe);
  return os.str();
}

VariantTable::VariantTable() : levels_(builtin_levels()) {}

VariantTable::VariantTable(std::array<VariantLevel, 9> levels) : levels_(std::move(levels)) {
  for (int i = 0; i < 9; ++i) {
    if (levels_[i].level != i + 1) {
      throw Error(ErrorKind::InvalidArgument, "variant table must list levels 1..9 in order");
    }
    check_level(levels_[i]);
  }
}

const VariantLevel& VariantTable::at(int level) const {
  if (level < kMinLevel || level > kMaxLevel) {
    throw Error(ErrorKind::InvalidArgument, "variant level " + std::to_string(level) + " outside 1..9");
  }
  return levels_[static_cast<std::size_t>(level - 1)];
}

VariantTable VariantTable::parse(const std::string& document) {
  using nlohmann::json;
  auto fail = [](const std::string& msg) { return Error(ErrorKind::ParseError, "variant table: " + msg); };
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string{}) != "diva-variants/1") throw fail("bad format tag");
  if (!doc.contains("levels") || !doc["levels"].is_array() || doc["levels"].size() != 9) {
    throw fail("'levels' must be an array of 9 entries");
  }
  std::array<VariantLevel, 9> levels;
  try {
    for (std::size_t i = 0; i < 9; ++i) {
      const json& e = doc["levels"][i];
      VariantLevel v;
      v.level = e.at("level").get<int>();
      const auto kind = e.at("kind").get<std::string>();
      if (kind == "image_and_text") {
        const auto combine = e.at("combine").get<std::string>();
        if (combine != "and" && combine != "or") throw fail("combine must be 'and' or 'or'");
        v.recipe = ImageAndTextPerturb{e.at("noise").get<double>(), e.at("rotation_step_deg").get<int>(),
                                       combine == "and" ? Combine::And : Combine::Or};
      } else if (kind == "image_only") {
        v.recipe = ImagePerturbOnly{e.at("noise").get<double>(), e.at("rotation_step_deg").get<int>()};
      } else if (kind == "paraphrase") {
        v.recipe = TextParaphrase{};
      } else if (kind == "original_or_paraphrase") {
        v.recipe = OriginalOrParaphrase{};
      } else if (kind == "think_steps") {
        v.recipe = ThinkSteps{e.at("steps").get<int>()};
      } else {
        throw fail("unknown kind '" + kind + "'");
      }
      levels[i] = v;
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  return VariantTable(levels);
}

std::string VariantTable::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "diva-variants/1";
  auto& arr = doc["levels"] = nlohmann::ordered_json::array();
  for (const auto& v : levels_) {
    nlohmann::ordered_json e;
    e["level"] = v.level;
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, ImageAndTextPerturb>) {
            e["kind"] = "image_and_text";
            e["noise"] = r.noise_intensity;
            e["rotation_step_deg"] = r.rotation_multiple_deg;
            e["combine"] = r.combine == Combine::And ? "and" : "or";
          } else if constexpr (std::is_same_v<T, ImagePerturbOnly>) {
            e["kind"] = "image_only";
            e["noise"] = r.noise_intensity;
            e["rotation_step_deg"] = r.rotation_multiple_deg;
          } else if constexpr (std::is_same_v<T, TextParaphrase>) {
            e["kind"] = "paraphrase";
          } else if constexpr (std::is_same_v<T, OriginalOrParaphrase>) {
            e["kind"] = "original_or_paraphrase";
          } else {
            e["kind"] = "think_steps";
            e["steps"] = r.count;
          }
        },
        v.recipe);
    arr.push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

void SchedulerConfig::validate() const {
  if (variants_per_problem < 1) throw Error(ErrorKind::InvalidArgument, "variants_per_problem must be >= 1");
  if (!(sampling_std > 0.0) || !std::isfinite(sampling_std)) {
    throw Error(ErrorKind::InvalidArgument, "sampling_std must be positive");
  }
}

int target_level(double score, double d_min, double d_max) {
  if (!(d_min < d_max)) throw Error(ErrorKind::InvalidArgument, "d_min must be below d_max");
  if (!(score >= d_min && score <= d_max)) {
    throw Error(ErrorKind::ScoreOutOfRange, "score " + std::to_string(score) + " outside [d_min, d_max]");
  }
  const double pos = (score - d_min) / (d_max - d_min) * (kMaxLevel - kMinLevel) + kMinLevel;
  return std::clamp(static_cast<int>(std::lround(pos)), kMinLevel, kMaxLevel);
}

double variant_difficulty(int level, const DifficultyConfig& config) {
  if (level < kMinLevel || level > kMaxLevel) {
    throw Error(ErrorKind::InvalidArgument, "variant level " + std::to_string(level) + " outside 1..9");
  }
  const double t = static_cast<double>(level - kMinLevel) / (kMaxLevel - kMinLevel);
  return config.d_max - t * (config.d_max - config.d_min);
}

std::vector<int> sample_levels(int target, int count, double sampling_std, Rng& rng) {
  if (target < kMinLevel || target > kMaxLevel) {
    throw Error(ErrorKind::InvalidArgument, "target level " + std::to_string(target) + " outside 1..9");
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double draw = rng.normal(static_cast<double>(target), sampling_std);
    out.push_back(std::clamp(static_cast<int>(std::lround(std::clamp(draw, -1e6, 1e6))), kMinLevel, kMaxLevel));
  }
  return out;
}

std::vector<VariantSpec> build_specs(const std::string& problem_id, double score, const DifficultyConfig& difficulty,
                                     const SchedulerConfig& config, const VariantTable& table,
                                     std::uint64_t stream) {
  config.validate();
  const int target = target_level(score, difficulty.d_min, difficulty.d_max);
  const std::uint64_t base = derive_seed(config.rng_seed, hash_id(problem_id), stream);
  Rng level_rng(derive_seed(base, 0x1E7E1ull));

  const int m = config.variants_per_problem;
  const bool with_original = config.include_original && m >= 2;
  std::vector<int> levels;
  if (with_original) levels.push_back(kOriginalLevel);
  for (int lv : sample_levels(target, with_original ? m - 1 : m, config.sampling_std, level_rng)) levels.push_back(lv);

  std::vector<VariantSpec> specs;
  specs.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    VariantSpec spec;
    spec.problem_id = problem_id;
    spec.index = static_cast<int>(i);
    spec.level = table.at(levels[i]);
    spec.perturb_seed = derive_seed(base, 0x5EEDull, i);
    const bool even = (i % 2) == 0;
    std::visit(
        [&](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, ImageAndTextPerturb>) {
            spec.text = even ? TextChoice::Paraphrase : TextChoice::EmbedInImage;
          } else if constexpr (std::is_same_v<T, ImagePerturbOnly>) {
            spec.text = TextChoice::Original;
          } else if constexpr (std::is_same_v<T, OriginalOrParaphrase>) {
            spec.text = (with_original && i == 0) || even ? TextChoice::Original : TextChoice::Paraphrase;
          } else if constexpr (std::is_same_v<T, TextParaphrase>) {
            spec.text = TextChoice::Paraphrase;
          } else {
            spec.text = TextChoice::Original;  // original text with appended steps
          }
        },
        spec.level.recipe);
    if (spec.text == TextChoice::Paraphrase || std::holds_alternative<ThinkSteps>(spec.level.recipe)) {
      spec.paraphrase_slot = i;
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace diva
