// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "greenwood/critical.hpp"
#include "greenwood/distributions.hpp"
#include "greenwood/rng.hpp"
#include "greenwood/statistic.hpp"

namespace greenwood {

inline constexpr double kDefaultSignificance = 0.05;
inline constexpr double kGpdBoundaryGamma = 0.5;
inline constexpr std::uint64_t kStudentTBoundaryNu = 2;
inline constexpr std::size_t kMinBaselineSampleSize = 8;

/// mg1: Gaussian null, alternative with stochastically smaller S_n (lower tail).
/// mg2: Gaussian null, heavy-tailed alternative (upper tail).
/// mg3_gpd: H0 gamma >= 0.5 in the GPD class; rejecting means finite variance.
/// mg4_student_t: H0 nu <= 2 in the Student-t class; rejecting means finite variance.
/// mg_two_sided: H0 data follow null_spec exactly.
/// jarque_bera, ks_normality: baselines with Monte Carlo critical values.
enum class TestKind {
  mg1,
  mg2,
  mg3_gpd,
  mg4_student_t,
  mg_two_sided,
  jarque_bera,
  ks_normality,
};

std::string_view test_kind_tag(TestKind kind) noexcept;
TestKind parse_test_kind(std::string_view tag);
bool is_mg_test(TestKind kind) noexcept;

struct TestOutcome {
  TestKind kind = TestKind::mg2;
  std::size_t n = 0;
  double c = kDefaultSignificance;
  double statistic = 0.0;
  std::vector<double> thresholds;
  bool reject = false;
  Domain domain = Domain::raw;
  std::string null_description;

  nlohmann::json to_json() const;
};

// --- rejection-region geometry (closed regions: ties reject) ---------------

inline bool in_upper_region(double statistic, double threshold) noexcept {
  return statistic >= threshold;
}
inline bool in_lower_region(double statistic, double threshold) noexcept {
  return statistic <= threshold;
}
inline bool in_two_sided_region(double statistic, double lower, double upper) noexcept {
  return statistic <= lower || statistic >= upper;
}

/// Decision for `kind` given its thresholds: one value, or (lower, upper)
/// for the two-sided test. Baselines reject in the upper tail.
bool decide(TestKind kind, double statistic, std::span<const double> thresholds);

// --- baseline statistics ---------------------------------------------------

/// n (skew^2 / 6 + (kurt - 3)^2 / 24) with biased central moments.
/// Throws std::domain_error for n < 8, non-finite data or zero variance.
double jarque_bera_statistic(std::span<const double> sample);

/// sup_x |F_n(x) - F(x)| for sorted data and a continuous CDF.
double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// KS distance to the normal law with the sample mean and standard
/// deviation (n - 1 denominator). Same errors as jarque_bera_statistic.
double ks_normal_statistic(std::span<const double> sample);

/// Monte Carlo (1 - c) critical values of the JB and KS statistics under a
/// Gaussian null, per (n, c).
class BaselineCalibration {
 public:
  BaselineCalibration() = default;

  /// Simulates `replications` Gaussian samples for each n in `sizes`.
  /// Replications are indexed substreams of `base`, offset per n.
  static BaselineCalibration build(std::span<const std::size_t> sizes,
                                   std::span<const double> levels, std::size_t replications,
                                   const RngStream& base, unsigned threads = 0);

  /// Throws CoverageError when (n, c) was not calibrated.
  double jarque_bera_critical(std::size_t n, double c) const;
  double ks_critical(std::size_t n, double c) const;
  bool covers(std::size_t n, double c) const noexcept;
  std::size_t replications() const noexcept { return replications_; }

 private:
  std::map<std::pair<std::size_t, double>, std::pair<double, double>> critical_;
  std::size_t replications_ = 0;
};

inline constexpr std::size_t kBaselineReplications = 20000;
inline constexpr std::uint64_t kBaselineSeed = 0x6a09e667f3bcc908ull;

/// Calibration for a single (n, c) with kBaselineReplications and a fixed
/// seed, memoized process-wide.
std::shared_ptr<const BaselineCalibration> default_baseline_calibration(std::size_t n, double c);

// --- test configuration ----------------------------------------------------

struct TestSpec {
  TestKind kind = TestKind::mg2;
  DistributionSpec null_spec;
  double c = kDefaultSignificance;
  std::shared_ptr<const QuantileTable> table;
  std::shared_ptr<const BaselineCalibration> baselines;
  Domain domain = Domain::raw;

  /// Fills null_spec with the kind's boundary law (Gaussian, GPD(0.5),
  /// t(2)); the two-sided test needs an explicit null and takes `null`.
  static TestSpec make(TestKind kind, std::shared_ptr<const QuantileTable> table,
                       double c = kDefaultSignificance,
                       const DistributionSpec& null = DistributionSpec());
};

/// Checks the invariants between kind and null_spec and the range of c.
/// Throws std::invalid_argument.
void validate(const TestSpec& spec);

/// The boundary distribution of H0, used to simulate size.
DistributionSpec null_boundary(const TestSpec& spec);

/// Table requests (spec, n, c, side) the test needs at sample size n.
std::vector<QuantileRequest> required_quantiles(const TestSpec& spec, std::size_t n);

/// Thresholds for sample size n, in the order `decide` expects. Throws
/// CoverageError naming the missing key.
std::vector<double> thresholds_for(const TestSpec& spec, std::size_t n);

/// Throws CoverageError if any n lacks an entry.
void require_coverage(const TestSpec& spec, std::span<const std::size_t> sizes);

/// Statistic the test compares with its thresholds: S_n for MG tests.
double test_statistic(TestKind kind, std::span<const double> sample);

TestOutcome apply_test(const TestSpec& spec, std::span<const double> sample);

/// Outcome from an already computed statistic; `thresholds` as from
/// thresholds_for.
TestOutcome make_outcome(const TestSpec& spec, std::size_t n, double statistic,
                         std::vector<double> thresholds);

// Named entry points for the individual procedures.

TestOutcome mg1_test(std::span<const double> sample, double c, const QuantileTable& table,
                     Domain domain = Domain::raw);
TestOutcome mg_gaussianity_test(std::span<const double> sample, double c,
                                const QuantileTable& table, Domain domain = Domain::raw);
/// Throws std::domain_error on negative entries.
TestOutcome mg_infinite_variance_test_gpd(std::span<const double> sample, double c,
                                          const QuantileTable& table,
                                          Domain domain = Domain::raw);
TestOutcome mg_infinite_variance_test_t(std::span<const double> sample, double c,
                                        const QuantileTable& table,
                                        Domain domain = Domain::raw);
TestOutcome mg_two_sided_test(std::span<const double> sample, const DistributionSpec& null_spec,
                              double c, const QuantileTable& table, Domain domain = Domain::raw);
TestOutcome jarque_bera_test(std::span<const double> sample, double c = kDefaultSignificance);
TestOutcome jarque_bera_test(std::span<const double> sample, double c,
                             const BaselineCalibration& calibration);
TestOutcome ks_normality_test(std::span<const double> sample, double c = kDefaultSignificance);
TestOutcome ks_normality_test(std::span<const double> sample, double c,
                              const BaselineCalibration& calibration);

}  // namespace greenwood
