// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "greenwood/distributions.hpp"
#include "greenwood/rng.hpp"

namespace greenwood {

/// Which tail of the null distribution a critical value bounds.
/// upper: value is Q_{1-c}(n), rejection region [value, 1].
/// lower: value is Q_c(n),     rejection region [1/n, value].
enum class Side { upper, lower };

/// Raw samples, or rows of a spectrogram built from simulated null signals.
enum class Domain { raw, spectrogram };

std::string_view side_tag(Side side) noexcept;
Side parse_side(std::string_view tag);
std::string_view domain_tag(Domain domain) noexcept;
Domain parse_domain(std::string_view tag);

inline constexpr int kQuantileTableSchemaVersion = 1;
inline constexpr std::string_view kQuantileEstimator = "linear-interpolation-type7";
inline constexpr std::size_t kMinReplications = 1000;
inline constexpr std::size_t kDefaultReplications = 100000;
inline constexpr std::size_t kQuickReplications = 10000;

/// A table lookup that found no entry. The message names the missing key.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuantileEntry {
  DistributionSpec spec;
  std::size_t n = 0;
  double c = 0.05;  // tail probability
  Side side = Side::upper;
  Domain domain = Domain::raw;
  double value = 0.0;
};

struct TableMetadata {
  std::size_t replications = 0;
  std::uint64_t master_seed = 0;
  std::string estimator{kQuantileEstimator};
  std::string created_at;
  /// Spectrogram configuration for time-frequency tables, null otherwise.
  nlohmann::json domain_config;
};

/// Immutable map (family shape, n, c, side, domain) -> critical value.
///
/// Entries are keyed by the distribution's shape only (DistributionSpec::
/// shape_key), because S_n is scale invariant: a table built for
/// stable(1.5, 1) serves stable(1.5, 3) as well.
class QuantileTable {
 public:
  QuantileTable() = default;
  /// Throws std::invalid_argument on duplicate keys, values outside
  /// [1/n, 1], or quantiles that are not monotone in c.
  QuantileTable(TableMetadata metadata, std::vector<QuantileEntry> entries);

  const TableMetadata& metadata() const noexcept { return metadata_; }
  const std::vector<QuantileEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  std::optional<double> find(const DistributionSpec& spec, std::size_t n, double c, Side side,
                             Domain domain = Domain::raw) const;
  /// Like find, but throws CoverageError naming the (spec, n, c, side) key.
  double require(const DistributionSpec& spec, std::size_t n, double c, Side side,
                 Domain domain = Domain::raw) const;

  nlohmann::json to_json() const;
  /// Throws std::invalid_argument on unknown schema versions or bad content.
  static QuantileTable from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static QuantileTable load(const std::filesystem::path& path);

 private:
  TableMetadata metadata_;
  std::vector<QuantileEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

std::string describe_key(const DistributionSpec& spec, std::size_t n, double c, Side side,
                         Domain domain);

/// M i.i.d. realizations of S_n under `spec`. Replication i draws from
/// RngStream(base.master_seed(), base.stream_id() + i), so the vector is
/// identical for any thread count.
std::vector<double> estimate_null_distribution(const DistributionSpec& spec, std::size_t n,
                                               std::size_t replications, const RngStream& base,
                                               unsigned threads = 0);

/// Linear-interpolation order-statistic quantile (Hyndman-Fan type 7):
/// h = (m - 1) p on the sorted values (0-based), interpolate between
/// neighbours. Throws std::invalid_argument on empty input or p outside (0,1).
double empirical_quantile(std::span<const double> values, double p);
/// Same on input that is already sorted ascending.
double empirical_quantile_sorted(std::span<const double> sorted, double p);

/// Quantile for a tail probability on the given side: Q_{1-c} or Q_c.
inline double tail_probability_level(double c, Side side) noexcept {
  return side == Side::upper ? 1.0 - c : c;
}

struct QuantileRequest {
  DistributionSpec spec;
  std::size_t n = 0;
  double c = 0.05;
  Side side = Side::upper;
};

/// One null simulation per distinct (shape, n), shared by every (c, side)
/// request on it. The stream base for a group is derived from a hash of the
/// group key, so a table entry does not depend on which other requests were
/// made alongside it.
QuantileTable build_quantile_table(std::span<const QuantileRequest> requests,
                                   std::size_t replications, const RngStream& base,
                                   unsigned threads = 0);

/// 64-bit FNV-1a, used to derive per-group stream offsets.
std::uint64_t stable_hash(std::string_view text) noexcept;

}  // namespace greenwood
