// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "greenwood/hypothesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "greenwood/io.hpp"
#include "greenwood/parallel.hpp"

namespace greenwood {

namespace {

struct CentralMoments {
  double mean;
  double m2;
  double m3;
  double m4;
};

CentralMoments central_moments(std::span<const double> sample) {
  if (sample.size() < kMinBaselineSampleSize) {
    throw std::domain_error("baseline tests need at least " +
                            std::to_string(kMinBaselineSampleSize) + " observations");
  }
  double sum = 0.0;
  for (double x : sample) {
    if (!std::isfinite(x)) throw std::domain_error("sample contains NaN or infinity");
    sum += x;
  }
  const double n = static_cast<double>(sample.size());
  const double mean = sum / n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : sample) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0) || m2 <= 1e-28 * std::max(1.0, mean * mean)) {
    throw std::domain_error("sample has zero variance");
  }
  return {mean, m2, m3, m4};
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ks_normal_sorted(std::span<double> values) {
  const auto m = central_moments(values);
  const double n = static_cast<double>(values.size());
  const double sd = std::sqrt(m.m2 * n / (n - 1.0));
  std::sort(values.begin(), values.end());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = standard_normal_cdf((values[i] - m.mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

void check_significance(double c) {
  if (!(c > 0.0 && c < 1.0)) {
    throw std::invalid_argument("significance level c must lie in (0, 1), got " +
                                format_double(c));
  }
}

std::string baseline_key(std::size_t n, double c) {
  return "(n=" + std::to_string(n) + ", c=" + format_double(c) + ")";
}

}  // namespace

std::string_view test_kind_tag(TestKind kind) noexcept {
  switch (kind) {
    case TestKind::mg1: return "MG1";
    case TestKind::mg2: return "MG2";
    case TestKind::mg3_gpd: return "MG3";
    case TestKind::mg4_student_t: return "MG4";
    case TestKind::mg_two_sided: return "MG-two-sided";
    case TestKind::jarque_bera: return "JB";
    case TestKind::ks_normality: return "KS";
  }
  return "unknown";
}

TestKind parse_test_kind(std::string_view tag) {
  std::string t(tag);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "mg1") return TestKind::mg1;
  if (t == "mg2" || t == "gaussianity") return TestKind::mg2;
  if (t == "mg3" || t == "mg3-gpd") return TestKind::mg3_gpd;
  if (t == "mg4" || t == "mg4-t" || t == "mg4-student-t") return TestKind::mg4_student_t;
  if (t == "two-sided" || t == "mg-two-sided" || t == "mg5") return TestKind::mg_two_sided;
  if (t == "jb" || t == "jarque-bera") return TestKind::jarque_bera;
  if (t == "ks" || t == "ks-normality") return TestKind::ks_normality;
  throw std::invalid_argument("unknown test '" + std::string(tag) +
                              "' (expected MG1, MG2, MG3, MG4, two-sided, JB or KS)");
}

bool is_mg_test(TestKind kind) noexcept {
  return kind != TestKind::jarque_bera && kind != TestKind::ks_normality;
}

nlohmann::json TestOutcome::to_json() const {
  nlohmann::json out = {
      {"kind", test_kind_tag(kind)},
      {"n", n},
      {"c", c},
      {"statistic", statistic},
      {"thresholds", thresholds},
      {"reject", reject},
  };
  if (domain != Domain::raw) out["domain"] = domain_tag(domain);
  if (!null_description.empty()) out["null"] = null_description;
  return out;
}

bool decide(TestKind kind, double statistic, std::span<const double> thresholds) {
  switch (kind) {
    case TestKind::mg1:
    case TestKind::mg3_gpd:
    case TestKind::mg4_student_t:
      return in_lower_region(statistic, thresholds.front());
    case TestKind::mg_two_sided:
      if (thresholds.size() != 2) {
        throw std::invalid_argument("two-sided test needs lower and upper thresholds");
      }
      return in_two_sided_region(statistic, thresholds[0], thresholds[1]);
    case TestKind::mg2:
    case TestKind::jarque_bera:
    case TestKind::ks_normality:
      return in_upper_region(statistic, thresholds.front());
  }
  return false;
}

double jarque_bera_statistic(std::span<const double> sample) {
  const auto m = central_moments(sample);
  const double skew = m.m3 / std::pow(m.m2, 1.5);
  const double excess = m.m4 / (m.m2 * m.m2) - 3.0;
  const double n = static_cast<double>(sample.size());
  return n * (skew * skew / 6.0 + excess * excess / 24.0);
}

double ks_distance(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  if (sorted.empty()) throw std::invalid_argument("ks_distance: empty sample");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_normal_statistic(std::span<const double> sample) {
  std::vector<double> values(sample.begin(), sample.end());
  return ks_normal_sorted(values);
}

BaselineCalibration BaselineCalibration::build(std::span<const std::size_t> sizes,
                                               std::span<const double> levels,
                                               std::size_t replications, const RngStream& base,
                                               unsigned threads) {
  if (replications < kMinReplications) {
    throw std::invalid_argument("baseline calibration needs at least " +
                                std::to_string(kMinReplications) + " replications");
  }
  for (double c : levels) check_significance(c);
  BaselineCalibration out;
  out.replications_ = replications;
  for (std::size_t n : sizes) {
    if (n < kMinBaselineSampleSize) {
      throw std::invalid_argument("baseline tests need n >= " +
                                  std::to_string(kMinBaselineSampleSize));
    }
    const std::uint64_t offset = stable_hash("baseline|n=" + std::to_string(n)) << 32;
    const RngStream group = base.substream(base.stream_id() + offset);
    std::vector<double> jb(replications);
    std::vector<double> ks(replications);
    parallel_blocks(replications, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> buffer(n);
      for (std::size_t i = begin; i < end; ++i) {
        RngStream rng = group.substream(group.stream_id() + i);
        for (double& x : buffer) x = rng.normal();
        jb[i] = jarque_bera_statistic(buffer);
        ks[i] = ks_normal_sorted(buffer);
      }
    });
    std::sort(jb.begin(), jb.end());
    std::sort(ks.begin(), ks.end());
    for (double c : levels) {
      out.critical_[{n, c}] = {empirical_quantile_sorted(jb, 1.0 - c),
                               empirical_quantile_sorted(ks, 1.0 - c)};
    }
  }
  return out;
}

bool BaselineCalibration::covers(std::size_t n, double c) const noexcept {
  return critical_.contains({n, c});
}

double BaselineCalibration::jarque_bera_critical(std::size_t n, double c) const {
  const auto it = critical_.find({n, c});
  if (it == critical_.end()) {
    throw CoverageError("baseline calibration has no JB entry for " + baseline_key(n, c));
  }
  return it->second.first;
}

double BaselineCalibration::ks_critical(std::size_t n, double c) const {
  const auto it = critical_.find({n, c});
  if (it == critical_.end()) {
    throw CoverageError("baseline calibration has no KS entry for " + baseline_key(n, c));
  }
  return it->second.second;
}

std::shared_ptr<const BaselineCalibration> default_baseline_calibration(std::size_t n,
                                                                         double c) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, double>, std::shared_ptr<const BaselineCalibration>>
      cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, c}];
  if (!slot) {
    const std::size_t sizes[] = {n};
    const double levels[] = {c};
    slot = std::make_shared<const BaselineCalibration>(BaselineCalibration::build(
        sizes, levels, kBaselineReplications, RngStream(kBaselineSeed, 0)));
  }
  return slot;
}

TestSpec TestSpec::make(TestKind kind, std::shared_ptr<const QuantileTable> table, double c,
                        const DistributionSpec& null) {
  TestSpec spec;
  spec.kind = kind;
  spec.c = c;
  spec.table = std::move(table);
  switch (kind) {
    case TestKind::mg3_gpd:
      spec.null_spec = DistributionSpec::gpd(kGpdBoundaryGamma);
      break;
    case TestKind::mg4_student_t:
      spec.null_spec = DistributionSpec::student_t(kStudentTBoundaryNu);
      break;
    case TestKind::mg_two_sided:
    case TestKind::mg1:
    case TestKind::mg2:
      spec.null_spec = null;
      break;
    case TestKind::jarque_bera:
    case TestKind::ks_normality:
      spec.null_spec = DistributionSpec::gaussian();
      break;
  }
  return spec;
}

void validate(const TestSpec& spec) {
  check_significance(spec.c);
  switch (spec.kind) {
    case TestKind::mg1:
    case TestKind::mg2:
      if (!spec.null_spec.is_gaussian_case()) {
        throw std::invalid_argument(std::string(test_kind_tag(spec.kind)) +
                                    " requires a Gaussian-equivalent null, got " +
                                    spec.null_spec.describe());
      }
      break;
    case TestKind::mg3_gpd:
      if (spec.null_spec.family() != Family::gpd ||
          spec.null_spec.tail_parameter() != kGpdBoundaryGamma) {
        throw std::invalid_argument("MG3 null must be gpd with gamma = 0.5");
      }
      break;
    case TestKind::mg4_student_t:
      if (spec.null_spec.family() != Family::student_t ||
          spec.null_spec.tail_parameter() != static_cast<double>(kStudentTBoundaryNu)) {
        throw std::invalid_argument("MG4 null must be student-t with nu = 2");
      }
      break;
    case TestKind::mg_two_sided:
    case TestKind::jarque_bera:
    case TestKind::ks_normality:
      break;
  }
  if (is_mg_test(spec.kind) && !spec.table) {
    throw std::invalid_argument(std::string(test_kind_tag(spec.kind)) +
                                " needs a quantile table");
  }
}

DistributionSpec null_boundary(const TestSpec& spec) {
  if (!is_mg_test(spec.kind)) return DistributionSpec::gaussian();
  return spec.null_spec;
}

std::vector<QuantileRequest> required_quantiles(const TestSpec& spec, std::size_t n) {
  switch (spec.kind) {
    case TestKind::mg2:
      return {{spec.null_spec, n, spec.c, Side::upper}};
    case TestKind::mg1:
    case TestKind::mg3_gpd:
    case TestKind::mg4_student_t:
      return {{spec.null_spec, n, spec.c, Side::lower}};
    case TestKind::mg_two_sided:
      return {{spec.null_spec, n, spec.c / 2.0, Side::lower},
              {spec.null_spec, n, spec.c / 2.0, Side::upper}};
    case TestKind::jarque_bera:
    case TestKind::ks_normality:
      break;
  }
  return {};
}

std::vector<double> thresholds_for(const TestSpec& spec, std::size_t n) {
  if (!is_mg_test(spec.kind)) {
    const auto calibration = spec.baselines ? spec.baselines
                                            : default_baseline_calibration(n, spec.c);
    return {spec.kind == TestKind::jarque_bera ? calibration->jarque_bera_critical(n, spec.c)
                                               : calibration->ks_critical(n, spec.c)};
  }
  if (!spec.table) throw std::invalid_argument("MG tests need a quantile table");
  std::vector<double> out;
  for (const auto& r : required_quantiles(spec, n)) {
    out.push_back(spec.table->require(r.spec, r.n, r.c, r.side, spec.domain));
  }
  return out;
}

void require_coverage(const TestSpec& spec, std::span<const std::size_t> sizes) {
  for (std::size_t n : sizes) {
    if (is_mg_test(spec.kind)) {
      thresholds_for(spec, n);
    } else if (spec.baselines && !spec.baselines->covers(n, spec.c)) {
      throw CoverageError("baseline calibration has no entry for " + baseline_key(n, spec.c));
    }
  }
}

double test_statistic(TestKind kind, std::span<const double> sample) {
  switch (kind) {
    case TestKind::jarque_bera: return jarque_bera_statistic(sample);
    case TestKind::ks_normality: return ks_normal_statistic(sample);
    case TestKind::mg3_gpd:
      for (double x : sample) {
        if (x < 0.0) {
          throw std::domain_error("MG3 requires nonnegative data (GPD support), found " +
                                  format_double(x));
        }
      }
      return modified_greenwood(sample).value;
    default: return modified_greenwood(sample).value;
  }
}

TestOutcome make_outcome(const TestSpec& spec, std::size_t n, double statistic,
                         std::vector<double> thresholds) {
  TestOutcome out;
  out.kind = spec.kind;
  out.n = n;
  out.c = spec.c;
  out.statistic = statistic;
  out.reject = decide(spec.kind, statistic, thresholds);
  out.thresholds = std::move(thresholds);
  out.domain = spec.domain;
  out.null_description = null_boundary(spec).describe();
  return out;
}

TestOutcome apply_test(const TestSpec& spec, std::span<const double> sample) {
  validate(spec);
  const double statistic = test_statistic(spec.kind, sample);
  return make_outcome(spec, sample.size(), statistic, thresholds_for(spec, sample.size()));
}

namespace {

std::shared_ptr<const QuantileTable> borrow(const QuantileTable& table) {
  return {std::shared_ptr<const QuantileTable>(), &table};
}

TestOutcome run(TestKind kind, std::span<const double> sample, double c,
                const QuantileTable& table, Domain domain,
                const DistributionSpec& null = DistributionSpec()) {
  TestSpec spec = TestSpec::make(kind, borrow(table), c, null);
  spec.domain = domain;
  return apply_test(spec, sample);
}

TestOutcome run_baseline(TestKind kind, std::span<const double> sample, double c,
                         std::shared_ptr<const BaselineCalibration> calibration) {
  TestSpec spec = TestSpec::make(kind, nullptr, c);
  spec.baselines = std::move(calibration);
  return apply_test(spec, sample);
}

}  // namespace

TestOutcome mg1_test(std::span<const double> sample, double c, const QuantileTable& table,
                     Domain domain) {
  return run(TestKind::mg1, sample, c, table, domain);
}

TestOutcome mg_gaussianity_test(std::span<const double> sample, double c,
                                const QuantileTable& table, Domain domain) {
  return run(TestKind::mg2, sample, c, table, domain);
}

TestOutcome mg_infinite_variance_test_gpd(std::span<const double> sample, double c,
                                          const QuantileTable& table, Domain domain) {
  return run(TestKind::mg3_gpd, sample, c, table, domain);
}

TestOutcome mg_infinite_variance_test_t(std::span<const double> sample, double c,
                                        const QuantileTable& table, Domain domain) {
  return run(TestKind::mg4_student_t, sample, c, table, domain);
}

TestOutcome mg_two_sided_test(std::span<const double> sample, const DistributionSpec& null_spec,
                              double c, const QuantileTable& table, Domain domain) {
  return run(TestKind::mg_two_sided, sample, c, table, domain, null_spec);
}

TestOutcome jarque_bera_test(std::span<const double> sample, double c) {
  return run_baseline(TestKind::jarque_bera, sample, c, nullptr);
}

TestOutcome jarque_bera_test(std::span<const double> sample, double c,
                             const BaselineCalibration& calibration) {
  return run_baseline(TestKind::jarque_bera, sample, c, {std::shared_ptr<void>(), &calibration});
}

TestOutcome ks_normality_test(std::span<const double> sample, double c) {
  return run_baseline(TestKind::ks_normality, sample, c, nullptr);
}

TestOutcome ks_normality_test(std::span<const double> sample, double c,
                              const BaselineCalibration& calibration) {
  return run_baseline(TestKind::ks_normality, sample, c, {std::shared_ptr<void>(), &calibration});
}

}  // namespace greenwood
