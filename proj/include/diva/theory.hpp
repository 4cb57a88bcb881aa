#pragma once

// Closed forms for z-scored binary rewards {0, R_max} with a fraction mu of
// correct rollouts, plus an empirical gradient-variance estimator.

#include <span>
#include <vector>

namespace diva::theory {

struct BinaryAdvantages {
  double a_plus = 0.0;   // sqrt((1 - mu) / mu)
  double a_minus = 0.0;  // -sqrt(mu / (1 - mu))
};

/// DegenerateMu unless 0 < mu < 1.
BinaryAdvantages binary_advantages(double mu);

/// Projection of the batch update onto a reference direction:
/// sqrt(mu (1 - mu)) * (s_plus - s_minus).
double projected_signal(double mu, double s_plus, double s_minus);

/// Grid argmax of |projected_signal| over mu in [0, 1]. FlatObjective when
/// s_plus == s_minus.
double optimal_mu(double s_plus, double s_minus, double grid_step);

/// Cosine between the class-mean update mu*A+*g_plus + (1-mu)*A-*g_minus and
/// the unit direction v.
double update_cosine(double mu, std::span<const double> g_plus, std::span<const double> g_minus,
                     std::span<const double> v);

/// Trace of the (population) covariance of the per-batch summed proxies.
/// Each batch is a list of equally sized proxy vectors. TooFewBatches below 2.
double variance_estimate(const std::vector<std::vector<std::vector<double>>>& batches);

/// Same, for proxies that have already been summed per batch.
double variance_of_sums(const std::vector<std::vector<double>>& sums);

}  // namespace diva::theory
