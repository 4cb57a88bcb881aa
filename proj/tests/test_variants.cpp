#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "diva/error.hpp"
#include "diva/variants.hpp"

using namespace diva;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Exact law of clip(round(N(target, sd)), 1, 9).
std::array<double, 10> level_law(int target, double sd) {
  std::array<double, 10> p{};
  for (int j = 1; j <= 9; ++j) {
    const double hi = j == 9 ? 1.0 : phi((j + 0.5 - target) / sd);
    const double lo = j == 1 ? 0.0 : phi((j - 0.5 - target) / sd);
    p[j] = hi - lo;
  }
  return p;
}

}  // namespace

TEST_CASE("built-in table rows") {
  const VariantTable t;
  const auto& l1 = std::get<ImageAndTextPerturb>(t.at(1).recipe);
  CHECK(l1.noise_intensity == 0.45);
  CHECK(l1.rotation_multiple_deg == 1);
  CHECK(l1.combine == Combine::And);
  const auto& l2 = std::get<ImageAndTextPerturb>(t.at(2).recipe);
  CHECK(l2.noise_intensity == 0.45);
  CHECK(l2.rotation_multiple_deg == 30);
  CHECK(l2.combine == Combine::Or);
  const auto& l3 = std::get<ImageAndTextPerturb>(t.at(3).recipe);
  CHECK(l3.noise_intensity == 0.3);
  CHECK(l3.rotation_multiple_deg == 45);
  const auto& l4 = std::get<ImagePerturbOnly>(t.at(4).recipe);
  CHECK(l4.noise_intensity == 0.3);
  CHECK(l4.rotation_multiple_deg == 90);
  CHECK(std::holds_alternative<TextParaphrase>(t.at(5).recipe));
  CHECK(std::holds_alternative<OriginalOrParaphrase>(t.at(6).recipe));
  for (int lv = 7; lv <= 9; ++lv) CHECK(std::get<ThinkSteps>(t.at(lv).recipe).count == lv - 6);
  for (int lv = 1; lv <= 9; ++lv) CHECK(has_image_perturbation(t.at(lv).recipe) == (lv <= 4));
  CHECK_THROWS_AS(t.at(0), Error);
  CHECK_THROWS_AS(t.at(10), Error);
}

TEST_CASE("table json round trip and validation") {
  const VariantTable t;
  const auto again = VariantTable::parse(t.to_json());
  CHECK(again.levels() == t.levels());

  auto levels = t.levels();
  std::swap(levels[0], levels[1]);
  CHECK_THROWS_AS(VariantTable{levels}, Error);
  levels = t.levels();
  levels[3].recipe = ImagePerturbOnly{1.5, 90};
  CHECK_THROWS_AS(VariantTable{levels}, Error);
  levels = t.levels();
  levels[3].recipe = ImagePerturbOnly{0.3, 0};
  CHECK_THROWS_AS(VariantTable{levels}, Error);

  try {
    VariantTable::parse(R"({"format":"diva-variants/1","levels":[]})");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
  CHECK_THROWS_AS(VariantTable::parse("not json"), Error);
}

TEST_CASE("score to level orientation") {
  CHECK(target_level(5, 1, 9) == 5);
  CHECK(target_level(9, 1, 9) == 9);
  CHECK(target_level(1, 1, 9) == 1);
  CHECK(target_level(3.4, 1, 9) == 3);
  int prev = 0;
  for (double s = 1.0; s <= 9.0; s += 0.05) {
    const int lv = target_level(s, 1, 9);
    CHECK(lv >= prev);
    prev = lv;
  }
  CHECK_THROWS_AS(target_level(0.5, 1, 9), Error);
  try {
    target_level(9.5, 1, 9);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScoreOutOfRange);
  }
}

TEST_CASE("variant difficulty decreases from hardest to easiest level") {
  const DifficultyConfig cfg;
  CHECK(variant_difficulty(1, cfg) == 9.0);
  CHECK(variant_difficulty(6, cfg) == 4.0);
  CHECK(variant_difficulty(9, cfg) == 1.0);
  for (int lv = 1; lv < 9; ++lv) CHECK(variant_difficulty(lv, cfg) > variant_difficulty(lv + 1, cfg));
}

TEST_CASE("sample_levels collapses with tiny spread and respects bounds") {
  Rng rng(1);
  CHECK(sample_levels(5, 3, 1e-9, rng) == std::vector<int>{5, 5, 5});
  for (int i = 0; i < 1000; ++i) {
    for (int lv : sample_levels(9, 3, 2.0, rng)) {
      CHECK(lv <= 9);
      CHECK(lv >= 1);
    }
  }
}

TEST_CASE("sample_levels follows the rounded clipped normal") {
  Rng rng(77);
  const int n = 100000;
  std::array<int, 10> counts{};
  double sum = 0.0;
  for (int lv : sample_levels(5, n, 1.0, rng)) {
    ++counts[lv];
    sum += lv;
  }
  CHECK(std::abs(sum / n - 5.0) < 0.05);
  CHECK(counts[3] + counts[4] + counts[5] + counts[6] + counts[7] >= 0.95 * n);

  const auto law = level_law(5, 1.0);
  for (int j = 1; j <= 9; ++j) {
    const double p = law[j];
    const double tol = 4.0 * std::sqrt(p * (1 - p) / n) + 1e-4;
    CHECK(std::abs(counts[j] / static_cast<double>(n) - p) < tol);
  }

  // near the edge the clip absorbs mass into level 9
  std::array<int, 10> edge{};
  for (int lv : sample_levels(9, n, 1.0, rng)) ++edge[lv];
  const auto law9 = level_law(9, 1.0);
  CHECK(std::abs(edge[9] / static_cast<double>(n) - law9[9]) < 0.01);
}

TEST_CASE("build_specs composition") {
  const DifficultyConfig d;
  SchedulerConfig cfg;
  const VariantTable table;

  cfg.variants_per_problem = 1;
  CHECK(build_specs("q", 5.0, d, cfg, table).size() == 1);

  cfg.variants_per_problem = 4;
  const auto specs = build_specs("q", 5.0, d, cfg, table);
  REQUIRE(specs.size() == 4);
  CHECK(specs[0].level.level == kOriginalLevel);
  CHECK(specs[0].text == TextChoice::Original);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CHECK(specs[i].index == static_cast<int>(i));
    CHECK(specs[i].problem_id == "q");
    CHECK(specs[i].level == table.at(specs[i].level.level));
  }
  CHECK(specs[1].perturb_seed != specs[2].perturb_seed);

  cfg.include_original = false;
  cfg.variants_per_problem = 200;
  const auto hard_bank = build_specs("q", 9.0, d, cfg, table);
  int think = 0;
  for (const auto& s : hard_bank) think += s.level.level >= 7;
  CHECK(think > 150);
  const auto easy = build_specs("q", 1.0, d, cfg, table);
  int perturbed = 0;
  for (const auto& s : easy) perturbed += s.level.level <= 3;
  CHECK(perturbed > 150);
}

TEST_CASE("build_specs is deterministic and seed sensitive") {
  const DifficultyConfig d;
  SchedulerConfig cfg;
  cfg.variants_per_problem = 8;
  const VariantTable table;
  const auto a = build_specs("p1", 4.2, d, cfg, table, 3);
  const auto b = build_specs("p1", 4.2, d, cfg, table, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].level == b[i].level);
    CHECK(a[i].perturb_seed == b[i].perturb_seed);
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].paraphrase_slot == b[i].paraphrase_slot);
  }
  const auto c = build_specs("p1", 4.2, d, cfg, table, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].perturb_seed != c[i].perturb_seed;
  CHECK(differs);
}

TEST_CASE("mean emitted level rises with problem score") {
  const DifficultyConfig d;
  SchedulerConfig cfg;
  cfg.include_original = false;
  cfg.variants_per_problem = 2000;
  const VariantTable table;
  double prev = 0.0;
  for (double s = 1.0; s <= 9.0; s += 0.5) {
    double mean = 0.0;
    for (const auto& v : build_specs("q", s, d, cfg, table)) mean += v.level.level;
    mean /= cfg.variants_per_problem;
    CHECK(mean >= prev);
    prev = mean;
  }
}

TEST_CASE("text choice alternates for image-and-text levels") {
  const DifficultyConfig d;
  SchedulerConfig cfg;
  cfg.include_original = false;
  cfg.variants_per_problem = 300;
  const VariantTable table;
  for (const auto& s : build_specs("q", 1.0, d, cfg, table)) {
    if (std::holds_alternative<ImageAndTextPerturb>(s.level.recipe)) {
      CHECK(s.text == (s.index % 2 == 0 ? TextChoice::Paraphrase : TextChoice::EmbedInImage));
    }
    if (s.text == TextChoice::Paraphrase || std::holds_alternative<ThinkSteps>(s.level.recipe)) {
      CHECK(s.paraphrase_slot.has_value());
    } else {
      CHECK_FALSE(s.paraphrase_slot.has_value());
    }
  }
}
