#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "diva/advantage.hpp"
#include "diva/error.hpp"
#include "diva/rng.hpp"

using namespace diva;

namespace {

VariantGroupRewards single(const std::string& id, std::vector<double> r, double difficulty = 4.0) {
  return {id, {VariantMember{6, difficulty, RolloutGroup(id + "#0", std::move(r))}}};
}

std::vector<double> rewards(Rng& rng, std::size_t k) {
  std::vector<double> r(k);
  for (auto& x : r) {
    const double u = rng.uniform();
    x = u < 0.4 ? 0.0 : (u < 0.6 ? 0.1 : 1.0);
  }
  return r;
}

std::vector<VariantGroupRewards> random_batch(Rng& rng, int problems, int m, std::size_t k) {
  std::vector<VariantGroupRewards> batch;
  for (int p = 0; p < problems; ++p) {
    VariantGroupRewards g{"p" + std::to_string(p), {}};
    for (int i = 0; i < m; ++i) {
      const int level = 1 + static_cast<int>(rng.below(9));
      g.members.push_back({level, 9.0 - level + 1.0, RolloutGroup(g.problem_id + "#" + std::to_string(i), rewards(rng, k))});
    }
    batch.push_back(std::move(g));
  }
  return batch;
}

// Straight-line restatement of every stage, sharing no code with the library.
double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }
double sd_of(const std::vector<double>& v, bool bessel) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (bessel ? v.size() - 1.0 : double(v.size())));
}
std::vector<double> z(const std::vector<double>& v, double eps, bool bessel) {
  const double m = mean_of(v), s = sd_of(v, bessel);
  std::vector<double> out;
  for (double x : v) out.push_back(s == 0.0 ? 0.0 : (x - m) / (s + eps));
  return out;
}

std::vector<double> reference_final(const std::vector<VariantGroupRewards>& batch, const PipelineConfig& cfg) {
  std::vector<double> local, global;
  bool multi = false;
  for (const auto& g : batch) {
    std::vector<double> pooled;
    for (const auto& m : g.members) {
      const std::vector<double> r(m.rollouts.rewards().begin(), m.rollouts.rewards().end());
      for (double a : z(r, cfg.eps, cfg.bessel)) local.push_back(a);
      pooled.insert(pooled.end(), r.begin(), r.end());
    }
    for (double a : z(pooled, cfg.eps, cfg.bessel)) global.push_back(a);
    multi |= g.members.size() > 1;
  }
  if (cfg.batch_norm == BatchNormMode::Always || (cfg.batch_norm == BatchNormMode::Auto && multi)) {
    local = z(local, cfg.eps, false);
    global = z(global, cfg.eps, false);
  }
  std::vector<double> out;
  std::size_t i = 0;
  for (const auto& g : batch) {
    double dbar = 0.0;
    std::vector<double> pooled;
    for (const auto& m : g.members) {
      dbar += m.difficulty;
      pooled.insert(pooled.end(), m.rollouts.rewards().begin(), m.rollouts.rewards().end());
    }
    dbar /= g.members.size();
    const double grange =
        std::min(1.0, (*std::max_element(pooled.begin(), pooled.end()) - *std::min_element(pooled.begin(), pooled.end())) / cfg.r_cap);
    for (const auto& m : g.members) {
      const auto r = m.rollouts.rewards();
      const double lrange = std::min(1.0, (*std::max_element(r.begin(), r.end()) - *std::min_element(r.begin(), r.end())) / cfg.r_cap);
      double dr = 1.0;
      if (cfg.rrb) {
        dr = cfg.rrb_scope == RrbScope::Local ? lrange : cfg.rrb_scope == RrbScope::Global ? grange : lrange * grange;
      }
      for (std::size_t j = 0; j < r.size(); ++j, ++i) {
        const double c = cfg.combine == CombineRule::Mean ? (local[i] + global[i]) / 2 : local[i] + global[i];
        const double s = c > 0 ? 1.0 : (c < 0 ? -1.0 : 0.0);
        out.push_back(dr * std::exp(cfg.sensitivity_k * (m.difficulty - dbar) * s) * c);
      }
    }
  }
  return out;
}

std::vector<double> finals(const BatchAdvantages& b) {
  std::vector<double> out;
  for (const auto& g : b.groups)
    for (const auto& r : g.rollouts) out.push_back(r.final);
  return out;
}

}  // namespace

TEST_CASE("local and global channels") {
  PipelineConfig cfg;
  const auto a = single("a", {0, 0, 0, 0, 0.1});
  const auto l = local_advantages(a, cfg);
  CHECK(std::round(l[0] * 100) / 100 == doctest::Approx(-0.45));
  CHECK(std::round(l[4] * 100) / 100 == doctest::Approx(1.79));
  CHECK(global_advantages(a, cfg) == l);

  for (double x : local_advantages(single("b", {1, 1, 1, 1, 1}), cfg)) CHECK(x == 0.0);

  cfg.bessel = false;
  VariantGroupRewards two{"q", {{6, 4, RolloutGroup("x", {1, 1, 1, 1, 1})}, {7, 3, RolloutGroup("y", {0, 0, 0, 0, 0})}}};
  const auto g = global_advantages(two, cfg);
  for (int i = 0; i < 5; ++i) CHECK(g[i] == doctest::Approx(1.0).epsilon(1e-7));
  for (int i = 5; i < 10; ++i) CHECK(g[i] == doctest::Approx(-1.0).epsilon(1e-7));
  for (double x : local_advantages(two, cfg)) CHECK(x == 0.0);

  Rng rng(2);
  const auto batch = random_batch(rng, 1, 3, 6);
  const auto loc = local_advantages(batch[0], cfg);
  for (int m = 0; m < 3; ++m) CHECK(std::abs(std::accumulate(loc.begin() + 6 * m, loc.begin() + 6 * (m + 1), 0.0)) < 1e-9);

  VariantGroupRewards ragged{"r", {{6, 4, RolloutGroup("x", {1, 0})}, {6, 4, RolloutGroup("y", {1, 0, 1})}}};
  CHECK_THROWS_AS(local_advantages(ragged, cfg), Error);
}

TEST_CASE("batch normalization balances channels") {
  Rng rng(8);
  std::vector<double> l(500), g(500);
  for (auto& x : l) x = rng.normal(0.3, 1.0);
  for (auto& x : g) x = rng.normal(-0.2, 2.0);
  const auto n = batch_normalize(l, g, kDefaultEps);
  CHECK(std::abs(mean_of(n.local)) < 1e-6);
  CHECK(std::abs(mean_of(n.global)) < 1e-6);
  CHECK(std::abs(sd_of(n.local, false) - 1.0) < 1e-6);
  CHECK(std::abs(sd_of(n.global, false) - 1.0) < 1e-6);
  CHECK_FALSE(n.local_degenerate);

  const std::vector<double> flat(4, 0.0);
  const auto d = batch_normalize(flat, flat, kDefaultEps);
  CHECK(d.local_degenerate);
  CHECK(d.global_degenerate);
  for (double x : d.local) CHECK(x == 0.0);
  CHECK_THROWS_AS(batch_normalize(std::vector<double>{1.0}, std::vector<double>{1.0}, kDefaultEps), Error);
}

TEST_CASE("combine rules") {
  const std::vector<double> l{0.5, -1.0, 2.0}, neg{-0.5, 1.0, -2.0};
  CHECK(combine(l, l, CombineRule::Mean) == l);
  for (double x : combine(l, neg, CombineRule::Mean)) CHECK(x == 0.0);
  CHECK(combine(std::vector<double>{1, 0}, std::vector<double>{0, 1}, CombineRule::Sum) == std::vector<double>{1, 1});
  try {
    combine(l, std::vector<double>{1.0}, CombineRule::Mean);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("difficulty weighting") {
  CHECK(difficulty_factor(0.1, 4.05, 1.0) * 1.0 == doctest::Approx(1.5).epsilon(0.001));
  CHECK(difficulty_factor(0.1, 4.05, -1.0) * -1.0 == doctest::Approx(-0.667).epsilon(0.001));
  CHECK(difficulty_factor(0.7, 3.0, 0.0) == 1.0);
  CHECK(sensitivity_for(1.5, 4.0) == doctest::Approx(kDefaultSensitivity));

  PipelineConfig cfg;
  cfg.sensitivity_k = 0.0;
  Rng rng(4);
  const auto batch = random_batch(rng, 1, 4, 5);
  std::vector<double> c(20);
  for (auto& x : c) x = rng.normal();
  CHECK(difficulty_weight(c, batch[0], cfg) == c);

  cfg = {};
  const auto w = difficulty_weight(c, batch[0], cfg);
  double dbar = 0.0;
  for (const auto& m : batch[0].members) dbar += m.difficulty;
  dbar /= 4;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK((w[i] > 0) == (c[i] > 0));
    const double gap = std::abs(batch[0].members[i / 5].difficulty - dbar);
    if (gap <= 4.0) {
      const double f = w[i] / c[i];
      CHECK(f >= 2.0 / 3.0 - 1e-12);
      CHECK(f <= 1.5 + 1e-12);
    }
    // harder than average: correct answers amplified, wrong ones softened
    if (batch[0].members[i / 5].difficulty > dbar) CHECK(w[i] > c[i]);
  }
}

TEST_CASE("reward-range rescaling") {
  PipelineConfig cfg;
  const auto a = single("a", {0, 0, 0, 0, 0.1});
  const std::vector<double> adv{-0.45, -0.45, -0.45, -0.45, 1.79};
  const auto s = rrb_rescale(adv, a, cfg);
  CHECK(s.delta_r[0] == doctest::Approx(0.1));
  CHECK(s.values[0] == doctest::Approx(-0.045));
  CHECK(s.values[4] == doctest::Approx(0.179));

  const auto b = single("b", {0, 0, 0, 0, 1});
  CHECK(rrb_rescale(adv, b, cfg).values == adv);

  const auto c = single("c", {0.1, 0.1, 0.1});
  for (double x : rrb_rescale(std::vector<double>{1, 2, 3}, c, cfg).values) CHECK(x == 0.0);

  VariantGroupRewards two{"q", {{6, 4, RolloutGroup("x", {0, 0.1})}, {6, 4, RolloutGroup("y", {0, 1})}}};
  const std::vector<double> ones(4, 1.0);
  cfg.rrb_scope = RrbScope::Global;
  CHECK(rrb_rescale(ones, two, cfg).delta_r == std::vector<double>{1.0, 1.0});
  cfg.rrb_scope = RrbScope::Both;
  CHECK(rrb_rescale(ones, two, cfg).delta_r[0] == doctest::Approx(0.1));
}

TEST_CASE("sample A and B through the whole pipeline") {
  const std::vector<VariantGroupRewards> batch{single("A", {0, 0, 0, 0, 0.1}), single("B", {0, 0, 0, 0, 1})};
  const auto out = run_pipeline(batch, PipelineConfig{});
  CHECK_FALSE(out.batch_normalized);
  const auto& A = out.groups[0].rollouts;
  const auto& B = out.groups[1].rollouts;
  CHECK(std::abs(A[0].final + 0.0447) < 0.0005);
  CHECK(std::abs(A[4].final - 0.1789) < 0.0005);
  CHECK(std::abs(B[0].final + 0.447) < 0.005);
  CHECK(std::abs(B[4].final - 1.789) < 0.005);
  CHECK(B[4].final > A[4].final);
}

TEST_CASE("pipeline matches the straight-line reference") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    PipelineConfig cfg;
    cfg.bessel = trial % 2 == 0;
    cfg.combine = trial % 3 == 0 ? CombineRule::Sum : CombineRule::Mean;
    cfg.rrb = trial % 5 != 0;
    cfg.rrb_scope = static_cast<RrbScope>(trial % 3);
    cfg.batch_norm = static_cast<BatchNormMode>(trial % 3);
    cfg.sensitivity_k = rng.uniform() * 0.3;
    const int m = 1 + static_cast<int>(rng.below(4));
    const auto batch = random_batch(rng, 2 + static_cast<int>(rng.below(5)), m, 2 + rng.below(6));
    const auto got = finals(run_pipeline(batch, cfg));
    const auto want = reference_final(batch, cfg);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-9);
  }
}

TEST_CASE("pipeline invariants") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto batch = random_batch(rng, 6, 3, 5);
    const auto out = run_pipeline(batch, PipelineConfig{});
    CHECK(out.batch_normalized);
    for (const auto& g : out.groups) {
      for (const auto& r : g.rollouts) {
        CHECK(std::abs(r.final) <= std::abs(r.weighted) + 1e-15);
        if (g.delta_r[r.member] == 1.0) CHECK(r.final == r.weighted);
        CHECK((r.weighted > 0) == (r.combined > 0));
        CHECK(r.final * r.weighted >= 0.0);
      }
    }
  }
}

TEST_CASE("baseline reduction") {
  Rng rng(41);
  PipelineConfig cfg;
  cfg.sensitivity_k = 0.0;
  cfg.rrb = false;
  for (int trial = 0; trial < 100; ++trial) {
    const auto batch = random_batch(rng, 5, 1, 2 + rng.below(8));
    const auto out = run_pipeline(batch, cfg);
    for (std::size_t p = 0; p < batch.size(); ++p) {
      const auto plain = zscore_advantages(batch[p].members[0].rollouts, cfg.eps, cfg.bessel);
      for (std::size_t j = 0; j < plain.size(); ++j) CHECK(std::abs(out.groups[p].rollouts[j].final - plain[j]) < 1e-9);
    }
  }
}

TEST_CASE("pipeline errors carry the stage") {
  const std::vector<VariantGroupRewards> batch{single("big", {0, 2})};
  try {
    run_pipeline(batch, PipelineConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("validate") != std::string::npos);
    CHECK(std::string(e.what()).find("big") != std::string::npos);
  }
  CHECK_THROWS_AS(run_pipeline(std::vector<VariantGroupRewards>{}, PipelineConfig{}), Error);
  PipelineConfig bad;
  bad.sensitivity_k = -1;
  CHECK_THROWS_AS(run_pipeline(batch, bad), Error);
}
