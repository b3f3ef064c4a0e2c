// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "greenwood/statistic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace greenwood {

namespace {

// Non-overlapping partials; at most ~40 are ever live for doubles.
class ExactAccumulator {
 public:
  void add(double x) noexcept {
    std::size_t i = 0;
    for (std::size_t j = 0; j < count_; ++j) {
      double y = partials_[j];
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_[i] = x;
    count_ = i + 1;
  }

  double result() const noexcept {
    if (count_ == 0) return 0.0;
    std::size_t n = count_;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    // Round-half-even correction across the remaining partials.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                  (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::array<double, 64> partials_{};
  std::size_t count_ = 0;
};

// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2.
struct DoubleDouble {
  double hi;
  double lo;
};

DoubleDouble rounded_pair(const ExactAccumulator& acc) {
  const double hi = acc.result();
  ExactAccumulator rest = acc;
  rest.add(-hi);
  return {hi, rest.result()};
}

// (num) / (den)^2 correct to a few units in the last place of the double
// result; both inputs carry their rounding residual.
double ratio_of_square(DoubleDouble num, DoubleDouble den) {
  const double d2 = den.hi * den.hi;
  const double d2_lo = std::fma(den.hi, den.hi, -d2) + 2.0 * den.hi * den.lo;
  const double q = num.hi / d2;
  const double r = std::fma(-q, d2, num.hi);
  return q + (r + num.lo - q * d2_lo) / d2;
}

}  // namespace

double exact_sum(std::span<const double> values) {
  ExactAccumulator acc;
  for (double v : values) acc.add(v);
  return acc.result();
}

StatisticValue modified_greenwood(std::span<const double> sample) {
  if (sample.size() < 2) {
    throw std::domain_error("Greenwood statistic needs at least 2 observations");
  }
  double largest = 0.0;
  for (double x : sample) {
    if (!std::isfinite(x)) {
      throw std::domain_error("Greenwood statistic: sample contains NaN or infinity");
    }
    largest = std::max(largest, std::abs(x));
  }
  if (largest == 0.0) {
    throw std::domain_error("Greenwood statistic is undefined for an all-zero sample");
  }
  // S_n is scale invariant; a power-of-two rescale is exact and keeps the
  // squares away from overflow and underflow.
  const int shift = -std::ilogb(largest);
  ExactAccumulator abs_acc;
  ExactAccumulator sq_acc;
  for (double x : sample) {
    const double a = std::scalbn(std::abs(x), shift);
    const double p = a * a;
    abs_acc.add(a);
    sq_acc.add(p);
    sq_acc.add(std::fma(a, a, -p));
  }
  const double lower = 1.0 / static_cast<double>(sample.size());
  const double ratio = ratio_of_square(rounded_pair(sq_acc), rounded_pair(abs_acc));
  return {std::clamp(ratio, lower, 1.0), sample.size()};
}
StatisticValue classical_greenwood(std::span<const double> sample) {
  for (double x : sample) {
    if (!(x > 0.0)) {
      throw std::domain_error("classical Greenwood statistic requires strictly positive data");
    }
  }
  return modified_greenwood(sample);
}

double normalized_statistic(StatisticValue stat) {
  if (stat.n < 2) throw std::domain_error("normalized_statistic: n must be >= 2");
  const double n = static_cast<double>(stat.n);
  return std::sqrt(n) * (n * stat.value / 2.0 - 1.0);
}

AbsoluteMoments AbsoluteMoments::exponential() noexcept { return {1.0, 2.0, 6.0, 24.0}; }

AbsoluteMoments AbsoluteMoments::standard_normal() noexcept {
  const double m1 = std::sqrt(2.0 / std::numbers::pi);
  return {m1, 1.0, 2.0 * m1, 3.0};
}

AsymptoticNormalization asymptotic_normalization(const AbsoluteMoments& m) {
  // Delta method for g(a, b) = b / a^2 at (m1, m2) with a = mean|X|, b = mean X^2.
  const double ga = -2.0 * m.m2 / (m.m1 * m.m1 * m.m1);
  const double gb = 1.0 / (m.m1 * m.m1);
  const double var_a = m.m2 - m.m1 * m.m1;
  const double var_b = m.m4 - m.m2 * m.m2;
  const double cov_ab = m.m3 - m.m1 * m.m2;
  const double var = ga * ga * var_a + gb * gb * var_b + 2.0 * ga * gb * cov_ab;
  if (!(var > 0.0)) throw std::domain_error("asymptotic variance must be positive");
  return {m.m2 / (m.m1 * m.m1), std::sqrt(var)};
}

double moment_normalized_statistic(StatisticValue stat, const AbsoluteMoments& m) {
  if (stat.n < 2) throw std::domain_error("moment_normalized_statistic: n must be >= 2");
  const auto norm = asymptotic_normalization(m);
  const double n = static_cast<double>(stat.n);
  return std::sqrt(n) * (n * stat.value - norm.center) / norm.scale;
}

}  // namespace greenwood
