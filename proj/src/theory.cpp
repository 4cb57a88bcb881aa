#include "diva/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diva/error.hpp"

namespace diva::theory {

BinaryAdvantages binary_advantages(double mu) {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw Error(ErrorKind::DegenerateMu, "mu = " + std::to_string(mu) + " leaves a single reward class");
  }
  return {std::sqrt((1.0 - mu) / mu), -std::sqrt(mu / (1.0 - mu))};
}

double projected_signal(double mu, double s_plus, double s_minus) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw Error(ErrorKind::InvalidArgument, "mu must lie in [0, 1]");
  return std::sqrt(mu * (1.0 - mu)) * (s_plus - s_minus);
}

double optimal_mu(double s_plus, double s_minus, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw Error(ErrorKind::InvalidArgument, "grid_step must be in (0, 1]");
  if (s_plus == s_minus) throw Error(ErrorKind::FlatObjective, "s_plus equals s_minus; every mu is optimal");
  const auto n = static_cast<long>(std::floor(1.0 / grid_step + 1e-9));
  double best_mu = 0.0;
  double best = -1.0;
  for (long i = 0; i <= n; ++i) {
    const double mu = std::min(1.0, static_cast<double>(i) * grid_step);
    const double f = std::abs(projected_signal(mu, s_plus, s_minus));
    if (f > best) {
      best = f;
      best_mu = mu;
    }
  }
  return best_mu;
}

double update_cosine(double mu, std::span<const double> g_plus, std::span<const double> g_minus,
                     std::span<const double> v) {
  if (g_plus.size() != g_minus.size() || g_plus.size() != v.size()) {
    throw Error(ErrorKind::LengthMismatch, "class means and direction differ in dimension");
  }
  const auto a = binary_advantages(mu);
  double dot = 0.0, norm_u = 0.0, norm_v = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = mu * a.a_plus * g_plus[i] + (1.0 - mu) * a.a_minus * g_minus[i];
    dot += u * v[i];
    norm_u += u * u;
    norm_v += v[i] * v[i];
  }
  if (norm_u == 0.0 || norm_v == 0.0) throw Error(ErrorKind::InvalidArgument, "zero-length vector");
  return dot / std::sqrt(norm_u * norm_v);
}

double variance_of_sums(const std::vector<std::vector<double>>& sums) {
  if (sums.size() < 2) throw Error(ErrorKind::TooFewBatches, "need at least 2 batches");
  const std::size_t dim = sums.front().size();
  for (const auto& s : sums) {
    if (s.size() != dim) throw Error(ErrorKind::LengthMismatch, "proxy dimensions differ");
  }
  const auto n = static_cast<double>(sums.size());
  double trace = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& s : sums) mean += s[d];
    mean /= n;
    double ss = 0.0;
    for (const auto& s : sums) ss += (s[d] - mean) * (s[d] - mean);
    trace += ss / n;
  }
  return trace;
}

double variance_estimate(const std::vector<std::vector<std::vector<double>>>& batches) {
  if (batches.size() < 2) throw Error(ErrorKind::TooFewBatches, "need at least 2 batches");
  std::vector<std::vector<double>> sums;
  sums.reserve(batches.size());
  for (const auto& batch : batches) {
    if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");
    std::vector<double> acc(batch.front().size(), 0.0);
    for (const auto& g : batch) {
      if (g.size() != acc.size()) throw Error(ErrorKind::LengthMismatch, "proxy dimensions differ");
      for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += g[d];
    }
    sums.push_back(std::move(acc));
  }
  return variance_of_sums(sums);
}

}  // namespace diva::theory
