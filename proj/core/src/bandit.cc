#include "recurtune/bandit.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "recurtune/errors.h"

namespace recurtune {

ArmState MakeArm(int batch_size, std::optional<std::size_t> window,
                 double prior_mean, double prior_variance) {
  ArmState arm;
  arm.batch_size = batch_size;
  arm.window = window;
  arm.prior_mean = prior_mean;
  arm.prior_variance = prior_variance;
  arm.posterior_mean = prior_mean;
  arm.posterior_variance = prior_variance;
  return arm;
}

Posterior ConjugatePosterior(double prior_mean, double prior_variance,
                             std::size_t count, double sum,
                             double cost_variance) {
  const bool flat = prior_variance == kFlatPrior;
  const double prior_precision = flat ? 0.0 : 1.0 / prior_variance;
  const double weighted_prior = flat ? 0.0 : prior_mean / prior_variance;
  const double variance =
      1.0 / (prior_precision + static_cast<double>(count) / cost_variance);
  return {variance * (weighted_prior + sum / cost_variance), variance};
}

double FlooredSampleVariance(const std::deque<double>& window) {
  const double n = static_cast<double>(window.size());
  const double mean = std::accumulate(window.begin(), window.end(), 0.0) / n;
  double ss = 0.0;
  for (double c : window) ss += (c - mean) * (c - mean);
  const double floor = 1e-12 * (1.0 + mean * mean);
  return std::max(ss / (n - 1.0), floor);
}

ArmState Observe(ArmState arm, double cost) {
  if (!std::isfinite(cost) || cost < 0.0) {
    throw ValidationError({"observed cost must be finite and non-negative"});
  }
  arm.history.push_back(cost);
  if (arm.window) {
    while (arm.history.size() > *arm.window) arm.history.pop_front();
  }
  if (arm.history.size() < 2) {
    arm.posterior_mean = arm.prior_mean;
    arm.posterior_variance = arm.prior_variance;
    arm.has_posterior = false;
    return arm;
  }
  const double sum = std::accumulate(arm.history.begin(), arm.history.end(), 0.0);
  const auto post =
      ConjugatePosterior(arm.prior_mean, arm.prior_variance, arm.history.size(),
                         sum, FlooredSampleVariance(arm.history));
  arm.posterior_mean = post.mean;
  arm.posterior_variance = post.variance;
  arm.has_posterior = true;
  return arm;
}

ArmState SeedArm(ArmState arm, std::span<const double> costs) {
  if (costs.size() < 2 && arm.flat_prior()) {
    throw ValidationError(
        {"seeding a flat-prior arm needs at least 2 costs, got " +
         std::to_string(costs.size())});
  }
  for (double c : costs) arm = Observe(std::move(arm), c);
  return arm;
}

int Predict(std::span<const ArmState> arms, Rng& rng) {
  if (arms.empty()) throw StateError("Predict: no arms");
  for (const auto& arm : arms) {
    if (!arm.has_posterior || !(arm.posterior_variance >= 0.0) ||
        !std::isfinite(arm.posterior_variance)) {
      throw StateError("Predict: arm " + std::to_string(arm.batch_size) +
                       " has no usable posterior");
    }
  }
  int best_b = 0;
  double best_draw = 0.0;
  bool first = true;
  for (const auto& arm : arms) {
    const double draw =
        rng.Normal(arm.posterior_mean, std::sqrt(arm.posterior_variance));
    if (first || draw < best_draw ||
        (draw == best_draw && arm.batch_size < best_b)) {
      best_b = arm.batch_size;
      best_draw = draw;
      first = false;
    }
  }
  return best_b;
}

}  // namespace recurtune
