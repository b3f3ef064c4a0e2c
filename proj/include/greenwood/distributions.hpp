// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "greenwood/rng.hpp"

namespace greenwood {

enum class Family { gaussian, stable, student_t, gpd };

std::string_view family_tag(Family family) noexcept;
/// Accepts the tags produced by family_tag plus a few common aliases
/// ("normal", "t", "student_t", "pareto"). Throws std::invalid_argument.
Family parse_family(std::string_view tag);

struct Gaussian {
  double mu = 0.0;
  double sigma2 = 1.0;
};

/// Symmetric alpha-stable with characteristic function exp(-sigma^a |t|^a).
struct Stable {
  double alpha = 2.0;
  double sigma = 1.0;
};

struct StudentT {
  static constexpr std::uint64_t kInfinite =
      std::numeric_limits<std::uint64_t>::max();
  std::uint64_t nu = kInfinite;
  bool infinite() const noexcept { return nu == kInfinite; }
};

/// Generalized Pareto on [0, inf) (or [0, -delta/gamma) when gamma < 0).
struct Gpd {
  double gamma = 0.0;
  double delta = 1.0;
};

/// Validated distribution family plus parameters.
class DistributionSpec {
 public:
  using Params = std::variant<Gaussian, Stable, StudentT, Gpd>;

  DistributionSpec() = default;  // standard normal

  static DistributionSpec gaussian(double mu = 0.0, double sigma2 = 1.0);
  static DistributionSpec stable(double alpha, double sigma = 1.0);
  static DistributionSpec student_t(std::uint64_t nu);
  static DistributionSpec student_t_infinite();
  static DistributionSpec gpd(double gamma, double delta = 1.0);

  /// Member of `family` with its tail parameter set to `value` and unit
  /// scale. For Student's t the value must be a positive integer or +inf.
  static DistributionSpec with_tail_parameter(Family family, double value);

  Family family() const noexcept;
  const Params& params() const noexcept { return params_; }

  /// alpha, nu (inf for the Gaussian limit), gamma; mu/sigma for Gaussian.
  double tail_parameter() const noexcept;

  /// True for Gaussian, Stable(alpha = 2) and StudentT(inf).
  bool is_gaussian_case() const noexcept;

  /// Canonical key of everything S_n depends on (scale parameters are
  /// dropped since S_n is scale invariant), e.g. "stable:alpha=1.5".
  /// Stable(2) and StudentT(inf) map to the centred Gaussian key.
  std::string shape_key() const;

  /// Human-readable form, e.g. "stable(alpha=1.5, sigma=1)".
  std::string describe() const;

  nlohmann::json params_json() const;
  static DistributionSpec from_json(Family family, const nlohmann::json& params);

  friend bool operator==(const DistributionSpec& a, const DistributionSpec& b);

 private:
  explicit DistributionSpec(Params p) : params_(p) {}
  Params params_{Gaussian{}};
};

// Samplers. Every sampler is a pure function of its arguments: the stream is
// taken by value, so repeated calls with the same stream return the same draws.
std::vector<double> sample_gaussian(double mu, double sigma2, std::size_t n,
                                    RngStream rng);
std::vector<double> sample_stable(double alpha, double sigma, std::size_t n,
                                  RngStream rng);
std::vector<double> sample_student_t(std::uint64_t nu, std::size_t n,
                                     RngStream rng);
std::vector<double> sample_gpd(double gamma, double delta, std::size_t n,
                               RngStream rng);
std::vector<double> sample(const DistributionSpec& spec, std::size_t n,
                           RngStream rng);

/// Fills `out` with i.i.d. draws, advancing `rng`. Used in Monte Carlo loops
/// to avoid per-replication allocation.
void draw_into(const DistributionSpec& spec, std::span<double> out,
               RngStream& rng);

/// Chambers-Mallows-Stuck transform for the symmetric case, unit scale.
/// `v` is uniform on (-pi/2, pi/2), `w` is unit exponential.
double stable_from_uniform(double alpha, double v, double w) noexcept;

/// GPD inverse CDF applied to a uniform u in (0, 1).
double gpd_from_uniform(double gamma, double delta, double u) noexcept;

double cdf(const DistributionSpec& spec, double x);

/// Inverse CDF. Closed form for Gaussian and GPD; Student's t via Boost.Math;
/// stable by bisection on stable_cdf. Throws std::domain_error unless
/// 0 < p < 1.
double quantile_function(const DistributionSpec& spec, double p);

/// Symmetric stable CDF from the Zolotarev integral representation
/// (non-oscillatory; adaptive Gauss-Kronrod), closed forms at alpha = 1, 2.
double stable_cdf(double alpha, double sigma, double x);

/// Same quantity by Fourier inversion of the characteristic function:
/// F(x) = 1/2 + (1/pi) * int_0^inf sin(x t) exp(-(sigma t)^alpha) / t dt.
/// Independent route, used to cross-check stable_cdf.
double stable_cdf_fourier(double alpha, double sigma, double x);

/// Stable density by Fourier inversion,
/// f(x) = (1/pi) * int_0^inf cos(x t) exp(-(sigma t)^alpha) dt.
double stable_pdf(double alpha, double sigma, double x);

}  // namespace greenwood
