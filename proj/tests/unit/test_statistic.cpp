// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "greenwood/distributions.hpp"
#include "greenwood/statistic.hpp"

using namespace greenwood;

namespace {

double ks_to_standard_normal(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = 0.5 * std::erfc(-z[i] / std::numbers::sqrt2);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

std::vector<double> replicate(const DistributionSpec& spec, std::size_t n, std::size_t reps,
                              std::uint64_t seed, double (*transform)(StatisticValue)) {
  std::vector<double> out;
  std::vector<double> buffer(n);
  for (std::size_t r = 0; r < reps; ++r) {
    RngStream rng(seed, r);
    draw_into(spec, buffer, rng);
    out.push_back(transform(modified_greenwood(buffer)));
  }
  return out;
}

}  // namespace

TEST_CASE("modified greenwood on small hand-computed samples") {
  const std::vector<double> a = {1.0, -1.0, 2.0};
  CHECK(modified_greenwood(a).value == 0.375);
  CHECK(modified_greenwood(a).n == 3);
  for (std::size_t n : {2u, 3u, 7u, 50u, 1000u}) {
    const std::vector<double> equal(n, -3.7);
    CHECK(modified_greenwood(equal).value == doctest::Approx(1.0 / n).epsilon(1e-15));
    std::vector<double> spike(n, 0.0);
    spike.back() = 2.5e-7;
    CHECK(modified_greenwood(spike).value == 1.0);
  }
  CHECK(classical_greenwood(std::vector<double>{1.0, 2.0}).value == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
  CHECK(classical_greenwood(std::vector<double>(10, 0.3)).value == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("modified greenwood input validation") {
  CHECK_THROWS_AS(modified_greenwood(std::vector<double>{1.0}), std::domain_error);
  CHECK_THROWS_AS(modified_greenwood(std::vector<double>{}), std::domain_error);
  CHECK_THROWS_AS(modified_greenwood(std::vector<double>{0.0, 0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(modified_greenwood(std::vector<double>{1.0, NAN}), std::domain_error);
  CHECK_THROWS_AS(modified_greenwood(std::vector<double>{1.0, INFINITY}), std::domain_error);
  CHECK_THROWS_AS(classical_greenwood(std::vector<double>{1.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(classical_greenwood(std::vector<double>{1.0, -2.0}), std::domain_error);
}

TEST_CASE("classical and modified statistics coincide on positive data") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto x = sample(DistributionSpec::gpd(0.3), 37, RngStream(3, s));
    for (double& v : x) v += 1e-3;
    CHECK(classical_greenwood(x).value == modified_greenwood(x).value);
  }
}

TEST_CASE("bounds, sign, permutation and scale invariance on random samples") {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::gaussian(0.3, 2.0), DistributionSpec::stable(0.7),
      DistributionSpec::stable(1.6),        DistributionSpec::student_t(2),
      DistributionSpec::gpd(1.5),           DistributionSpec::gpd(-0.3)};
  std::mt19937_64 shuffle_rng(99);
  std::size_t cases = 0;
  for (std::uint64_t s = 0; s < 3000; ++s) {
    const auto& spec = specs[s % specs.size()];
    const std::size_t n = 2 + s % 300;
    auto x = sample(spec, n, RngStream(4, s));
    const double v = modified_greenwood(x).value;
    REQUIRE(v >= 1.0 / static_cast<double>(n));
    REQUIRE(v <= 1.0);

    auto flipped = x;
    for (std::size_t i = 0; i < n; i += 2) flipped[i] = -flipped[i];
    REQUIRE(modified_greenwood(flipped).value == v);
    auto negated = x;
    for (double& e : negated) e = -e;
    REQUIRE(modified_greenwood(negated).value == v);

    auto shuffled = x;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
    REQUIRE(modified_greenwood(shuffled).value == v);

    for (double c : {1e-8, 0.5, 3.0, 1e8}) {
      auto scaled = x;
      for (double& e : scaled) e *= c;
      const double w = modified_greenwood(scaled).value;
      const double ulp = std::nextafter(v, 2.0) - v;
      REQUIRE(std::abs(w - v) <= 4.0 * ulp);
    }
    ++cases;
  }
  CHECK(cases == 3000);
}

TEST_CASE("extreme magnitudes are handled by rescaling") {
  const std::vector<double> huge = {1e300, -2e300, 3e300};
  const std::vector<double> tiny = {1e-300, -2e-300, 3e-300};
  const std::vector<double> unit = {1.0, 2.0, 3.0};
  const double expected = modified_greenwood(unit).value;
  CHECK(modified_greenwood(huge).value == doctest::Approx(expected).epsilon(1e-15));
  CHECK(modified_greenwood(tiny).value == doctest::Approx(expected).epsilon(1e-15));
  const std::vector<double> denormal = {5e-324, 5e-324};
  CHECK(modified_greenwood(denormal).value == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("exact sum is correctly rounded and order independent") {
  const std::vector<double> v = {1e100, 1.0, -1e100, 1e-20};
  CHECK(exact_sum(v) == 1.0);
  std::vector<double> w(1000, 0.1);
  CHECK(exact_sum(w) == 100.0);
  const std::vector<double> r = {1e-20, -1e100, 1.0, 1e100};
  CHECK(exact_sum(r) == exact_sum(v));
}

TEST_CASE("normalized statistic") {
  CHECK(normalized_statistic({0.5, 4}) == doctest::Approx(0.0));
  CHECK(normalized_statistic({0.0175, 100}) == doctest::Approx(-1.25).epsilon(1e-12));
  CHECK(normalized_statistic({0.1, 10}) == doctest::Approx(-1.5811388300841898).epsilon(1e-12));
  CHECK_THROWS(normalized_statistic({0.5, 1}));
}

TEST_CASE("delta-method normalization constants") {
  const auto e = asymptotic_normalization(AbsoluteMoments::exponential());
  CHECK(e.center == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(e.scale == doctest::Approx(2.0).epsilon(1e-15));
  const auto g = asymptotic_normalization(AbsoluteMoments::standard_normal());
  CHECK(g.center == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-15));
  // Hand-derived: scale^2 = pi^2 (pi - 3) / 2.
  const double pi = std::numbers::pi;
  CHECK(g.scale * g.scale == doctest::Approx(pi * pi * (pi - 3.0) / 2.0).epsilon(1e-13));
  const StatisticValue s{0.021, 100};
  CHECK(moment_normalized_statistic(s, AbsoluteMoments::exponential()) ==
        doctest::Approx(normalized_statistic(s)).epsilon(1e-14));
}

TEST_CASE("slow convergence of the normalized statistic") {
  const std::size_t sizes[] = {100, 200, 500, 1000};
  SUBCASE("exponential data under the classical normalization") {
    std::vector<double> d;
    for (std::size_t n : sizes) {
      d.push_back(ks_to_standard_normal(
          replicate(DistributionSpec::gpd(0.0), n, 10000, 31, normalized_statistic)));
    }
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
    CHECK(d.back() > 0.01);
  }
  SUBCASE("gaussian data under moment normalization") {
    auto gaussian_norm = [](StatisticValue s) {
      return moment_normalized_statistic(s, AbsoluteMoments::standard_normal());
    };
    const double d100 = ks_to_standard_normal(
        replicate(DistributionSpec::gaussian(), 100, 10000, 32, +gaussian_norm));
    const double d1000 = ks_to_standard_normal(
        replicate(DistributionSpec::gaussian(), 1000, 10000, 32, +gaussian_norm));
    CHECK(d1000 < d100);
  }
}
