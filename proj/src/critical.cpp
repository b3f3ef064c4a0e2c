// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "greenwood/critical.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "greenwood/io.hpp"
#include "greenwood/parallel.hpp"
#include "greenwood/statistic.hpp"

namespace greenwood {

namespace {

std::string entry_key(const std::string& shape, std::size_t n, double c, Side side,
                      Domain domain) {
  return shape + "|n=" + std::to_string(n) + "|c=" + format_double(c) + "|" +
         std::string(side_tag(side)) + "|" + std::string(domain_tag(domain));
}

void check_c(double c) {
  if (!(c > 0.0 && c < 1.0)) {
    throw std::invalid_argument("significance level c must lie in (0, 1), got " +
                                format_double(c));
  }
}

}  // namespace

std::string_view side_tag(Side side) noexcept {
  return side == Side::upper ? "upper" : "lower";
}

Side parse_side(std::string_view tag) {
  if (tag == "upper") return Side::upper;
  if (tag == "lower") return Side::lower;
  throw std::invalid_argument("side must be 'upper' or 'lower', got '" + std::string(tag) + "'");
}

std::string_view domain_tag(Domain domain) noexcept {
  return domain == Domain::raw ? "raw" : "spectrogram";
}

Domain parse_domain(std::string_view tag) {
  if (tag == "raw") return Domain::raw;
  if (tag == "spectrogram") return Domain::spectrogram;
  throw std::invalid_argument("domain must be 'raw' or 'spectrogram', got '" +
                              std::string(tag) + "'");
}

std::string describe_key(const DistributionSpec& spec, std::size_t n, double c, Side side,
                         Domain domain) {
  std::string out = "(" + spec.shape_key() + ", n=" + std::to_string(n) +
                    ", c=" + format_double(c) + ", side=" + std::string(side_tag(side));
  if (domain != Domain::raw) out += ", domain=" + std::string(domain_tag(domain));
  return out + ")";
}

QuantileTable::QuantileTable(TableMetadata metadata, std::vector<QuantileEntry> entries)
    : metadata_(std::move(metadata)), entries_(std::move(entries)) {
  // (shape, n, side, domain) -> [(c, value)] for the monotonicity check.
  std::map<std::tuple<std::string, std::size_t, int, int>, std::vector<std::pair<double, double>>>
      by_group;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.n < 2) throw std::invalid_argument("table entry with n < 2");
    check_c(e.c);
    const double lower = 1.0 / static_cast<double>(e.n);
    if (!(e.value >= lower && e.value <= 1.0)) {
      throw std::invalid_argument("table value " + format_double(e.value) + " outside [1/n, 1] for " +
                                  describe_key(e.spec, e.n, e.c, e.side, e.domain));
    }
    const std::string shape = e.spec.shape_key();
    const auto [it, inserted] = index_.emplace(entry_key(shape, e.n, e.c, e.side, e.domain), i);
    if (!inserted) {
      throw std::invalid_argument("duplicate table entry " +
                                  describe_key(e.spec, e.n, e.c, e.side, e.domain));
    }
    by_group[{shape, e.n, static_cast<int>(e.side), static_cast<int>(e.domain)}].emplace_back(
        e.c, e.value);
  }
  for (auto& [group, points] : by_group) {
    std::sort(points.begin(), points.end());
    const bool upper = std::get<2>(group) == static_cast<int>(Side::upper);
    for (std::size_t j = 1; j < points.size(); ++j) {
      const bool ok = upper ? points[j].second <= points[j - 1].second
                            : points[j].second >= points[j - 1].second;
      if (!ok) {
        throw std::invalid_argument("table values for " + std::get<0>(group) + ", n=" +
                                    std::to_string(std::get<1>(group)) +
                                    " are not monotone in c");
      }
    }
  }
}

std::optional<double> QuantileTable::find(const DistributionSpec& spec, std::size_t n, double c,
                                          Side side, Domain domain) const {
  const auto it = index_.find(entry_key(spec.shape_key(), n, c, side, domain));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].value;
}

double QuantileTable::require(const DistributionSpec& spec, std::size_t n, double c, Side side,
                              Domain domain) const {
  if (auto v = find(spec, n, c, side, domain)) return *v;
  throw CoverageError("quantile table has no entry for " + describe_key(spec, n, c, side, domain));
}

nlohmann::json QuantileTable::to_json() const {
  nlohmann::json meta = {
      {"M", metadata_.replications},
      {"master_seed", metadata_.master_seed},
      {"estimator", metadata_.estimator},
      {"created_at", metadata_.created_at},
  };
  if (!metadata_.domain_config.is_null()) meta["domain_config"] = metadata_.domain_config;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) {
    entries.push_back({
        {"family", family_tag(e.spec.family())},
        {"params", e.spec.params_json()},
        {"n", e.n},
        {"c", e.c},
        {"side", side_tag(e.side)},
        {"domain", domain_tag(e.domain)},
        {"value", e.value},
    });
  }
  return {{"schema_version", kQuantileTableSchemaVersion},
          {"metadata", std::move(meta)},
          {"entries", std::move(entries)}};
}

QuantileTable QuantileTable::from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("schema_version")) {
      throw std::invalid_argument("quantile table: missing schema_version");
    }
    const auto& version = doc.at("schema_version");
    if (!version.is_number_integer() || version.get<int>() != kQuantileTableSchemaVersion) {
      throw std::invalid_argument("quantile table: unsupported schema_version " + version.dump());
    }
    const auto& m = doc.at("metadata");
    TableMetadata meta;
    meta.replications = m.at("M").get<std::size_t>();
    meta.master_seed = m.at("master_seed").get<std::uint64_t>();
    meta.estimator = m.at("estimator").get<std::string>();
    meta.created_at = m.value("created_at", std::string());
    if (m.contains("domain_config")) meta.domain_config = m.at("domain_config");

    std::vector<QuantileEntry> entries;
    for (const auto& e : doc.at("entries")) {
      const Family family = parse_family(e.at("family").get<std::string>());
      entries.push_back({
          DistributionSpec::from_json(family, e.at("params")),
          e.at("n").get<std::size_t>(),
          e.at("c").get<double>(),
          parse_side(e.at("side").get<std::string>()),
          parse_domain(e.value("domain", std::string("raw"))),
          e.at("value").get<double>(),
      });
    }
    return QuantileTable(std::move(meta), std::move(entries));
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("quantile table: malformed JSON content: ") +
                                ex.what());
  }
}

void QuantileTable::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

QuantileTable QuantileTable::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw std::invalid_argument("quantile table " + path.string() + ": " + ex.what());
  }
  return from_json(doc);
}

std::vector<double> estimate_null_distribution(const DistributionSpec& spec, std::size_t n,
                                               std::size_t replications, const RngStream& base,
                                               unsigned threads) {
  if (n < 2) throw std::invalid_argument("null distribution needs n >= 2");
  if (replications < kMinReplications) {
    throw std::invalid_argument("at least " + std::to_string(kMinReplications) +
                                " replications are required, got " +
                                std::to_string(replications));
  }
  std::vector<double> out(replications);
  parallel_blocks(replications, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buffer(n);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng = base.substream(base.stream_id() + i);
      draw_into(spec, buffer, rng);
      out[i] = modified_greenwood(buffer).value;
    }
  });
  return out;
}

double empirical_quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("empirical_quantile: p must lie in (0, 1), got " +
                                format_double(p));
  }
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return empirical_quantile_sorted(sorted, p);
}

std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

QuantileTable build_quantile_table(std::span<const QuantileRequest> requests,
                                   std::size_t replications, const RngStream& base,
                                   unsigned threads) {
  if (replications < kMinReplications) {
    throw std::invalid_argument("at least " + std::to_string(kMinReplications) +
                                " replications are required, got " +
                                std::to_string(replications));
  }
  // Group requests by (shape, n); reject duplicates before simulating.
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> groups;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    if (r.n < 2) throw std::invalid_argument("quantile request with n < 2");
    check_c(r.c);
    const std::string shape = r.spec.shape_key();
    if (!seen.insert(entry_key(shape, r.n, r.c, r.side, Domain::raw)).second) {
      throw std::invalid_argument("duplicate quantile request " +
                                  describe_key(r.spec, r.n, r.c, r.side, Domain::raw));
    }
    groups[{shape, r.n}].push_back(i);
  }

  std::vector<QuantileEntry> entries(requests.size());
  for (const auto& [key, members] : groups) {
    const auto& first = requests[members.front()];
    const std::uint64_t offset = stable_hash(key.first + "|" + std::to_string(key.second)) << 32;
    const RngStream group_base = base.substream(base.stream_id() + offset);
    auto values = estimate_null_distribution(first.spec, key.second, replications, group_base,
                                             threads);
    std::sort(values.begin(), values.end());
    for (std::size_t i : members) {
      const auto& r = requests[i];
      entries[i] = {r.spec, r.n, r.c, r.side, Domain::raw,
                    empirical_quantile_sorted(values, tail_probability_level(r.c, r.side))};
    }
  }

  TableMetadata meta;
  meta.replications = replications;
  meta.master_seed = base.master_seed();
  meta.created_at = utc_timestamp();
  return QuantileTable(std::move(meta), std::move(entries));
}

}  // namespace greenwood
