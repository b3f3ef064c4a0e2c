// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "greenwood/distributions.hpp"
#include "greenwood/hypothesis.hpp"
#include "greenwood/rng.hpp"

namespace greenwood {

inline constexpr std::size_t kDefaultPowerReplications = 2000;
inline constexpr std::size_t kQuickPowerReplications = 500;
inline constexpr std::size_t kMinPowerReplications = 100;

struct PowerStudyConfig {
  TestSpec test;
  /// Data are drawn from with_tail_parameter(data_family, p) for each grid p.
  Family data_family = Family::stable;
  std::vector<double> parameter_grid;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = kDefaultPowerReplications;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;

  /// Deterministic description of the study (no timestamps).
  nlohmann::json to_json() const;
};

struct PowerPoint {
  double parameter = 0.0;
  std::size_t n = 0;
  double rejection_rate = 0.0;
  std::size_t replications = 0;

  friend bool operator==(const PowerPoint&, const PowerPoint&) = default;
};

struct PowerCurve {
  Family family = Family::stable;
  /// Grid-major: every n for the first parameter, then the next parameter.
  std::vector<PowerPoint> points;
  nlohmann::json config;
};

/// Throws std::invalid_argument on an invalid config (R < 100, empty or
/// non-monotone grids) and CoverageError on a table gap, both before any
/// simulation. Replication r at grid index g and size index k uses stream
/// (g << 40) | (k << 32) | r of master_seed.
PowerCurve run_power_study(const PowerStudyConfig& config);

/// Rejection fraction over R samples from the test's null boundary law.
/// Replication i uses stream rng.stream_id() + i. Throws on R = 0.
double size_check(const TestSpec& test, std::size_t n, std::size_t replications,
                  const RngStream& rng, unsigned threads = 0);

/// Writes `csv_path` (header family,param,n,replications,rejection_rate)
/// and its JSON sidecar (sidecar_path) atomically.
void export_curve(const PowerCurve& curve, const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);
/// Inverse of export_curve. The sidecar is optional.
PowerCurve import_curve(const std::filesystem::path& csv_path);

}  // namespace greenwood
