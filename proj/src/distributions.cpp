// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "greenwood/distributions.hpp"

#include "greenwood/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace greenwood {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_sample_size(std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample size must be at least 1");
}

void check_stable(double alpha, double sigma) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("stable alpha must lie in (0, 2], got " +
                                format_double(alpha));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("stable sigma must be positive, got " +
                                format_double(sigma));
  }
}

void check_gaussian(double mu, double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2) || !std::isfinite(mu)) {
    throw std::invalid_argument("gaussian requires finite mu and sigma2 > 0");
  }
}

void check_gpd(double gamma, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gpd requires finite gamma and delta > 0");
  }
}

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("probability must lie in (0, 1), got " +
                            format_double(p));
  }
}

constexpr double kHalfPi = std::numbers::pi / 2.0;

double draw_one(const Gaussian& g, double sd, RngStream& rng) {
  return g.mu + sd * rng.normal();
}

double draw_stable(double alpha, double sigma, RngStream& rng) {
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  return sigma * stable_from_uniform(alpha, v, w);
}

double draw_student_t(std::uint64_t nu, RngStream& rng) {
  const double z = rng.normal();
  const double dof = static_cast<double>(nu);
  return z / std::sqrt(rng.chi_squared(dof) / dof);
}

}  // namespace

std::string_view family_tag(Family family) noexcept {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::stable: return "stable";
    case Family::student_t: return "student-t";
    case Family::gpd: return "gpd";
  }
  return "unknown";
}

Family parse_family(std::string_view tag) {
  if (tag == "gaussian" || tag == "normal") return Family::gaussian;
  if (tag == "stable" || tag == "alpha-stable") return Family::stable;
  if (tag == "student-t" || tag == "student_t" || tag == "t") return Family::student_t;
  if (tag == "gpd" || tag == "pareto" || tag == "generalized-pareto") return Family::gpd;
  throw std::invalid_argument("unknown distribution family '" + std::string(tag) + "'");
}

DistributionSpec DistributionSpec::gaussian(double mu, double sigma2) {
  check_gaussian(mu, sigma2);
  return DistributionSpec(Gaussian{mu, sigma2});
}

DistributionSpec DistributionSpec::stable(double alpha, double sigma) {
  check_stable(alpha, sigma);
  return DistributionSpec(Stable{alpha, sigma});
}

DistributionSpec DistributionSpec::student_t(std::uint64_t nu) {
  if (nu < 1) throw std::invalid_argument("student-t nu must be >= 1");
  return DistributionSpec(StudentT{nu});
}

DistributionSpec DistributionSpec::student_t_infinite() {
  return DistributionSpec(StudentT{StudentT::kInfinite});
}

DistributionSpec DistributionSpec::gpd(double gamma, double delta) {
  check_gpd(gamma, delta);
  return DistributionSpec(Gpd{gamma, delta});
}

DistributionSpec DistributionSpec::with_tail_parameter(Family family, double value) {
  switch (family) {
    case Family::stable: return stable(value, 1.0);
    case Family::gpd: return gpd(value, 1.0);
    case Family::student_t: {
      if (std::isinf(value) && value > 0) return student_t_infinite();
      if (!(value >= 1.0) || value != std::floor(value) || value > 1e15) {
        throw std::invalid_argument(
            "student-t degrees of freedom must be a positive integer or inf, got " +
            format_double(value));
      }
      return student_t(static_cast<std::uint64_t>(value));
    }
    case Family::gaussian:
      break;
  }
  throw std::invalid_argument("the gaussian family has no tail parameter");
}

Family DistributionSpec::family() const noexcept {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return Family::gaussian; },
                        [](const Stable&) { return Family::stable; },
                        [](const StudentT&) { return Family::student_t; },
                        [](const Gpd&) { return Family::gpd; },
                    },
                    params_);
}

double DistributionSpec::tail_parameter() const noexcept {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return g.mu / std::sqrt(g.sigma2); },
          [](const Stable& s) { return s.alpha; },
          [](const StudentT& t) {
            return t.infinite() ? std::numeric_limits<double>::infinity()
                                : static_cast<double>(t.nu);
          },
          [](const Gpd& g) { return g.gamma; },
      },
      params_);
}

bool DistributionSpec::is_gaussian_case() const noexcept {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return true; },
                        [](const Stable& s) { return s.alpha == 2.0; },
                        [](const StudentT& t) { return t.infinite(); },
                        [](const Gpd&) { return false; },
                    },
                    params_);
}

std::string DistributionSpec::shape_key() const {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) {
            return "gaussian:mu_over_sigma=" + format_double(g.mu / std::sqrt(g.sigma2));
          },
          // Gaussian limits share the centred Gaussian key: same law of S_n.
          [](const Stable& s) {
            if (s.alpha == 2.0) return std::string("gaussian:mu_over_sigma=0");
            return "stable:alpha=" + format_double(s.alpha);
          },
          [](const StudentT& t) {
            if (t.infinite()) return std::string("gaussian:mu_over_sigma=0");
            return "student-t:nu=" + std::to_string(t.nu);
          },
          [](const Gpd& g) { return "gpd:gamma=" + format_double(g.gamma); },
      },
      params_);
}

std::string DistributionSpec::describe() const {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) {
            return "gaussian(mu=" + format_double(g.mu) +
                   ", sigma2=" + format_double(g.sigma2) + ")";
          },
          [](const Stable& s) {
            return "stable(alpha=" + format_double(s.alpha) +
                   ", sigma=" + format_double(s.sigma) + ")";
          },
          [](const StudentT& t) {
            return "student-t(nu=" +
                   (t.infinite() ? std::string("inf") : std::to_string(t.nu)) + ")";
          },
          [](const Gpd& g) {
            return "gpd(gamma=" + format_double(g.gamma) +
                   ", delta=" + format_double(g.delta) + ")";
          },
      },
      params_);
}

nlohmann::json DistributionSpec::params_json() const {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return nlohmann::json{{"mu", g.mu}, {"sigma2", g.sigma2}}; },
          [](const Stable& s) {
            return nlohmann::json{{"alpha", s.alpha}, {"sigma", s.sigma}};
          },
          [](const StudentT& t) {
            return t.infinite() ? nlohmann::json{{"nu", "inf"}}
                                : nlohmann::json{{"nu", t.nu}};
          },
          [](const Gpd& g) { return nlohmann::json{{"gamma", g.gamma}, {"delta", g.delta}}; },
      },
      params_);
}

DistributionSpec DistributionSpec::from_json(Family family, const nlohmann::json& p) {
  switch (family) {
    case Family::gaussian:
      return gaussian(p.value("mu", 0.0), p.value("sigma2", 1.0));
    case Family::stable:
      return stable(p.at("alpha").get<double>(), p.value("sigma", 1.0));
    case Family::gpd:
      return gpd(p.at("gamma").get<double>(), p.value("delta", 1.0));
    case Family::student_t: {
      const auto& nu = p.at("nu");
      if (nu.is_string()) {
        if (nu.get<std::string>() != "inf") {
          throw std::invalid_argument("student-t nu must be an integer or \"inf\"");
        }
        return student_t_infinite();
      }
      if (!nu.is_number_integer()) {
        throw std::invalid_argument("student-t nu must be an integer or \"inf\"");
      }
      const auto v = nu.get<std::int64_t>();
      if (v < 1) throw std::invalid_argument("student-t nu must be >= 1");
      return student_t(static_cast<std::uint64_t>(v));
    }
  }
  throw std::invalid_argument("unknown family");
}

bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
  if (a.params_.index() != b.params_.index()) return false;
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            const auto& o = std::get<Gaussian>(b.params_);
            return g.mu == o.mu && g.sigma2 == o.sigma2;
          },
          [&](const Stable& s) {
            const auto& o = std::get<Stable>(b.params_);
            return s.alpha == o.alpha && s.sigma == o.sigma;
          },
          [&](const StudentT& t) { return t.nu == std::get<StudentT>(b.params_).nu; },
          [&](const Gpd& g) {
            const auto& o = std::get<Gpd>(b.params_);
            return g.gamma == o.gamma && g.delta == o.delta;
          },
      },
      a.params_);
}

// --- sampling --------------------------------------------------------------

double stable_from_uniform(double alpha, double v, double w) noexcept {
  if (alpha == 1.0) return std::tan(v);
  const double av = alpha * v;
  return std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

double gpd_from_uniform(double gamma, double delta, double u) noexcept {
  // log1p/expm1 keep precision for small gamma and u.
  const double log_tail = std::log1p(-u);
  if (gamma == 0.0) return -delta * log_tail;
  return delta / gamma * std::expm1(-gamma * log_tail);
}

void draw_into(const DistributionSpec& spec, std::span<double> out, RngStream& rng) {
  std::visit(Overloaded{
                 [&](const Gaussian& g) {
                   const double sd = std::sqrt(g.sigma2);
                   for (double& x : out) x = draw_one(g, sd, rng);
                 },
                 [&](const Stable& s) {
                   for (double& x : out) x = draw_stable(s.alpha, s.sigma, rng);
                 },
                 [&](const StudentT& t) {
                   if (t.infinite()) {
                     for (double& x : out) x = rng.normal();
                   } else {
                     for (double& x : out) x = draw_student_t(t.nu, rng);
                   }
                 },
                 [&](const Gpd& g) {
                   for (double& x : out) x = gpd_from_uniform(g.gamma, g.delta, rng.uniform());
                 },
             },
             spec.params());
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, RngStream rng) {
  check_sample_size(n);
  std::vector<double> out(n);
  draw_into(spec, out, rng);
  return out;
}

std::vector<double> sample_gaussian(double mu, double sigma2, std::size_t n, RngStream rng) {
  return sample(DistributionSpec::gaussian(mu, sigma2), n, rng);
}

std::vector<double> sample_stable(double alpha, double sigma, std::size_t n, RngStream rng) {
  return sample(DistributionSpec::stable(alpha, sigma), n, rng);
}

std::vector<double> sample_student_t(std::uint64_t nu, std::size_t n, RngStream rng) {
  if (nu == StudentT::kInfinite) return sample(DistributionSpec::student_t_infinite(), n, rng);
  return sample(DistributionSpec::student_t(nu), n, rng);
}

std::vector<double> sample_gpd(double gamma, double delta, std::size_t n, RngStream rng) {
  return sample(DistributionSpec::gpd(gamma, delta), n, rng);
}

// --- CDFs and quantiles ----------------------------------------------------

double stable_cdf(double alpha, double sigma, double x) {
  check_stable(alpha, sigma);
  if (std::isnan(x)) throw std::domain_error("stable_cdf: x is NaN");
  const double z = x / sigma;
  if (z == 0.0) return 0.5;
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  if (alpha == 2.0) return 0.5 * std::erfc(-z / 2.0);  // N(0, 2)
  if (alpha == 1.0) return 0.5 + std::atan(z) / std::numbers::pi;

  const double t = std::abs(z);
  const double expo = alpha / (alpha - 1.0);
  const double log_t = std::log(t);
  auto integrand = [&](double theta) {
    const double c = std::cos(theta);
    const double log_v = expo * (log_t + std::log(c) - std::log(std::sin(alpha * theta))) +
                         std::log(std::cos((alpha - 1.0) * theta) / c);
    if (log_v > 700.0) return 0.0;
    return std::exp(-std::exp(log_v));
  };
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, kHalfPi, 20, 1e-13, &err);
  const double upper = alpha < 1.0 ? 0.5 + integral / std::numbers::pi
                                   : 1.0 - integral / std::numbers::pi;
  return z > 0 ? upper : 1.0 - upper;
}

double stable_cdf_fourier(double alpha, double sigma, double x) {
  check_stable(alpha, sigma);
  if (x == 0.0) return 0.5;
  const double w = std::abs(x);
  boost::math::quadrature::ooura_fourier_sin<double> integrator(1e-12, 12);
  auto f = [&](double t) { return std::exp(-std::pow(sigma * t, alpha)) / t; };
  const double integral = integrator.integrate(f, w).first;
  const double upper = 0.5 + integral / std::numbers::pi;
  return x > 0 ? upper : 1.0 - upper;
}

double stable_pdf(double alpha, double sigma, double x) {
  check_stable(alpha, sigma);
  if (x == 0.0) {
    return std::tgamma(1.0 + 1.0 / alpha) / (sigma * std::numbers::pi);
  }
  boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-12, 12);
  auto f = [&](double t) { return std::exp(-std::pow(sigma * t, alpha)); };
  return integrator.integrate(f, std::abs(x)).first / std::numbers::pi;
}

double cdf(const DistributionSpec& spec, double x) {
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            return boost::math::cdf(boost::math::normal(g.mu, std::sqrt(g.sigma2)), x);
          },
          [&](const Stable& s) { return stable_cdf(s.alpha, s.sigma, x); },
          [&](const StudentT& t) {
            if (t.infinite()) return boost::math::cdf(boost::math::normal(), x);
            return boost::math::cdf(
                boost::math::students_t(static_cast<double>(t.nu)), x);
          },
          [&](const Gpd& g) {
            if (x <= 0.0) return 0.0;
            if (g.gamma == 0.0) return -std::expm1(-x / g.delta);
            if (g.gamma < 0.0 && x >= -g.delta / g.gamma) return 1.0;
            return -std::expm1(-std::log1p(g.gamma * x / g.delta) / g.gamma);
          },
      },
      spec.params());
}

namespace {

double stable_quantile(double alpha, double sigma, double p) {
  if (p == 0.5) return 0.0;
  if (alpha == 1.0) return sigma * std::tan(std::numbers::pi * (p - 0.5));
  if (p < 0.5) return -stable_quantile(alpha, sigma, 1.0 - p);
  double lo = 0.0;
  double hi = sigma;
  while (stable_cdf(alpha, sigma, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return hi;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-11 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (stable_cdf(alpha, sigma, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double quantile_function(const DistributionSpec& spec, double p) {
  check_probability(p);
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            return boost::math::quantile(boost::math::normal(g.mu, std::sqrt(g.sigma2)), p);
          },
          [&](const Stable& s) { return stable_quantile(s.alpha, s.sigma, p); },
          [&](const StudentT& t) {
            if (t.infinite()) return boost::math::quantile(boost::math::normal(), p);
            if (t.nu == 1) return std::tan(std::numbers::pi * (p - 0.5));
            return boost::math::quantile(
                boost::math::students_t(static_cast<double>(t.nu)), p);
          },
          [&](const Gpd& g) { return gpd_from_uniform(g.gamma, g.delta, p); },
      },
      spec.params());
}

}  // namespace greenwood
