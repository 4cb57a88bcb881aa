#pragma once

// Variant catalogue (nine levels, 1 = hardest, 9 = easiest) and the
// difficulty-adaptive scheduler that picks variant levels for a problem.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "diva/difficulty.hpp"
#include "diva/rng.hpp"

namespace diva {

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 9;
inline constexpr int kOriginalLevel = 6;

enum class Combine { And, Or };

/// How the text of a variant is presented.
enum class TextChoice { Original, Paraphrase, EmbedInImage };

// Image noise plus rotation, with a text change (paraphrase, or the text
// rendered into the image).
struct ImageAndTextPerturb {
  double noise_intensity = 0.0;
  int rotation_multiple_deg = 0;
  Combine combine = Combine::Or;
  bool operator==(const ImageAndTextPerturb&) const = default;
};

struct ImagePerturbOnly {
  double noise_intensity = 0.0;
  int rotation_multiple_deg = 0;
  bool operator==(const ImagePerturbOnly&) const = default;
};

struct TextParaphrase {
  bool operator==(const TextParaphrase&) const = default;
};

struct OriginalOrParaphrase {
  bool operator==(const OriginalOrParaphrase&) const = default;
};

struct ThinkSteps {
  int count = 1;  // 1..3 appended reasoning hints
  bool operator==(const ThinkSteps&) const = default;
};

using Recipe = std::variant<ImageAndTextPerturb, ImagePerturbOnly, TextParaphrase, OriginalOrParaphrase, ThinkSteps>;

struct VariantLevel {
  int level = kOriginalLevel;
  Recipe recipe = OriginalOrParaphrase{};
  bool operator==(const VariantLevel&) const = default;
};

bool has_image_perturbation(const Recipe& recipe) noexcept;
std::string describe(const Recipe& recipe);

class VariantTable {
 public:
  /// The built-in catalogue.
  VariantTable();
  /// InvalidArgument unless exactly levels 1..9 are present, in order, with
  /// valid recipe parameters.
  explicit VariantTable(std::array<VariantLevel, 9> levels);

  const VariantLevel& at(int level) const;
  const std::array<VariantLevel, 9>& levels() const noexcept { return levels_; }

  /// JSON catalogue: {"format": "diva-variants/1", "levels": [...]}.
  static VariantTable parse(const std::string& document);
  std::string to_json() const;

 private:
  std::array<VariantLevel, 9> levels_;
};

struct SchedulerConfig {
  int variants_per_problem = 3;  // m
  double sampling_std = 1.0;
  std::uint64_t rng_seed = 0;
  bool include_original = true;  // variant 0 is the unmodified question when m >= 2

  void validate() const;
};

struct VariantSpec {
  std::string problem_id;
  int index = 0;
  VariantLevel level;
  std::uint64_t perturb_seed = 0;
  TextChoice text = TextChoice::Original;
  std::optional<std::size_t> paraphrase_slot;  // into pre-generated paraphrase / think-step text
};

/// Score -> variant level. Low scores (easy problems) map to level 1 (hardest
/// variant), high scores to level 9; the map is linear over [d_min, d_max].
/// ScoreOutOfRange for scores outside the range.
int target_level(double score, double d_min, double d_max);

/// Difficulty coefficient carried by a variant level: d_max at level 1 down
/// to d_min at level 9.
double variant_difficulty(int level, const DifficultyConfig& config);

/// `count` levels drawn as round(N(target, sampling_std)) clipped to 1..9.
std::vector<int> sample_levels(int target, int count, double sampling_std, Rng& rng);
inline std::vector<int> sample_levels(int target, const SchedulerConfig& config, Rng& rng) {
  return sample_levels(target, config.variants_per_problem, config.sampling_std, rng);
}

/// m variant specs for one problem. `stream` separates draws made for the
/// same problem at different times (the simulator passes the epoch).
std::vector<VariantSpec> build_specs(const std::string& problem_id, double score, const DifficultyConfig& difficulty,
                                     const SchedulerConfig& config, const VariantTable& table,
                                     std::uint64_t stream = 0);

}  // namespace diva
