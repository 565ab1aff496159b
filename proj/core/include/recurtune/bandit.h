#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>

#include "recurtune/rng.h"

namespace recurtune {

inline constexpr double kFlatPrior = std::numeric_limits<double>::infinity();

// One Gaussian Thompson Sampling arm (a batch size).
//
// The belief over the arm's mean cost is Normal(posterior_mean,
// posterior_variance). A prior variance of kFlatPrior means zero prior
// precision. The observation variance is not known in advance; it is the
// sample variance of the current history window.
struct ArmState {
  int batch_size = 0;
  std::optional<std::size_t> window;  // nullopt: unbounded
  std::deque<double> history;         // oldest first
  double prior_mean = 0.0;
  double prior_variance = kFlatPrior;
  double posterior_mean = 0.0;
  double posterior_variance = kFlatPrior;
  // False until the window holds two observations; such arms cannot enter
  // Predict.
  bool has_posterior = false;

  bool flat_prior() const { return prior_variance == kFlatPrior; }
  bool operator==(const ArmState&) const = default;
};

ArmState MakeArm(int batch_size, std::optional<std::size_t> window,
                 double prior_mean = 0.0, double prior_variance = kFlatPrior);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Normal-normal conjugate update with a plug-in observation variance.
// A kFlatPrior prior variance drops the prior terms.
Posterior ConjugatePosterior(double prior_mean, double prior_variance,
                             std::size_t count, double sum,
                             double cost_variance);

// Unbiased (n-1) sample variance, clamped below at 1e-12 * (1 + mean^2) so
// coincident observations keep the precision finite. Needs n >= 2.
double FlooredSampleVariance(const std::deque<double>& window);

// Appends a cost (evicting the oldest beyond the window) and recomputes the
// posterior from the window.
ArmState Observe(ArmState arm, double cost);

// Folds Observe over `costs` in order. Throws ValidationError for fewer than
// two costs under a flat prior.
ArmState SeedArm(ArmState arm, std::span<const double> costs);

// Draws one Normal(posterior_mean, posterior_variance) sample per arm, in
// arm order, and returns the batch size with the smallest draw (ties to the
// smaller batch size). Throws StateError for an empty set or an arm without
// a usable posterior.
int Predict(std::span<const ArmState> arms, Rng& rng);

}  // namespace recurtune
