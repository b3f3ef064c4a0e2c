// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>

namespace greenwood {

/// A realized Greenwood-type statistic together with its sample size.
/// Invariant: 1/n <= value <= 1.
struct StatisticValue {
  double value = 1.0;
  std::size_t n = 0;
};

/// Correctly rounded sum of `values` (Shewchuk's non-overlapping partials,
/// the algorithm behind Python's math.fsum). The result does not depend on
/// the order of the inputs.
double exact_sum(std::span<const double> values);

/// S_n = sum |x_i|^2 / (sum |x_i|)^2.
///
/// Both sums are correctly rounded, so the value is exactly invariant under
/// permutation and sign flips of the sample. The quotient is clamped to the
/// mathematically guaranteed range [1/n, 1] to absorb the final roundings.
/// Throws std::domain_error if n < 2, any entry is non-finite, or every
/// entry is zero.
StatisticValue modified_greenwood(std::span<const double> sample);

/// Classical T_n on a strictly positive sample; identical to S_n there.
/// Throws std::domain_error on any entry <= 0.
StatisticValue classical_greenwood(std::span<const double> sample);

/// sqrt(n) * (n * s_n / 2 - 1): the normalization under which T_n is
/// asymptotically standard normal for exponential data.
double normalized_statistic(StatisticValue stat);

/// Absolute moments E|X|^k, k = 1..4, of the sampling distribution.
struct AbsoluteMoments {
  double m1;
  double m2;
  double m3;
  double m4;

  static AbsoluteMoments exponential() noexcept;
  static AbsoluteMoments standard_normal() noexcept;
};

/// Asymptotic center n*E[S_n] -> m2/m1^2 and delta-method scale of
/// sqrt(n)*(n*S_n - center), valid whenever the fourth moment is finite.
struct AsymptoticNormalization {
  double center;
  double scale;
};
AsymptoticNormalization asymptotic_normalization(const AbsoluteMoments& m);

/// sqrt(n) * (n * s_n - center) / scale. With exponential moments
/// (center 2, scale 2) this equals normalized_statistic.
double moment_normalized_statistic(StatisticValue stat, const AbsoluteMoments& m);

}  // namespace greenwood
