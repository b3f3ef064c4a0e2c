// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "greenwood/power.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "greenwood/io.hpp"
#include "greenwood/parallel.hpp"

namespace greenwood {

namespace {

constexpr std::string_view kCsvHeader = "family,param,n,replications,rejection_rate";

std::string format_parameter(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

nlohmann::json json_parameter(double v) {
  if (std::isinf(v)) return format_parameter(v);
  return v;
}

double parse_double(std::string_view text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a count: '" + std::string(text) + "'");
  }
  return v;
}

template <class T>
bool strictly_monotone(const std::vector<T>& v) {
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    up = up && v[i] > v[i - 1];
    down = down && v[i] < v[i - 1];
  }
  return up || down;
}

void validate_config(const PowerStudyConfig& config) {
  validate(config.test);
  if (config.replications < kMinPowerReplications) {
    throw std::invalid_argument("power studies need at least " +
                                std::to_string(kMinPowerReplications) + " replications, got " +
                                std::to_string(config.replications));
  }
  if (config.parameter_grid.empty()) throw std::invalid_argument("parameter grid is empty");
  if (config.sample_sizes.empty()) throw std::invalid_argument("sample-size list is empty");
  if (!strictly_monotone(config.parameter_grid)) {
    throw std::invalid_argument("parameter grid must be strictly monotone");
  }
  if (!strictly_monotone(config.sample_sizes)) {
    throw std::invalid_argument("sample sizes must be strictly monotone");
  }
  for (std::size_t n : config.sample_sizes) {
    if (n < 2) throw std::invalid_argument("sample sizes must be >= 2");
  }
  if (config.sample_sizes.size() > 256 || config.parameter_grid.size() > (1u << 23)) {
    throw std::invalid_argument("grid too large for the stream layout");
  }
  if (config.replications >= (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("too many replications for the stream layout");
  }
  // Parses every grid value up front so a bad value fails before simulating.
  for (double p : config.parameter_grid) {
    DistributionSpec::with_tail_parameter(config.data_family, p);
  }
}

}  // namespace

nlohmann::json PowerStudyConfig::to_json() const {
  nlohmann::json grid = nlohmann::json::array();
  for (double p : parameter_grid) grid.push_back(json_parameter(p));
  nlohmann::json out = {
      {"test", test_kind_tag(test.kind)},
      {"null", null_boundary(test).describe()},
      {"c", test.c},
      {"domain", domain_tag(test.domain)},
      {"data_family", family_tag(data_family)},
      {"parameter_grid", std::move(grid)},
      {"sample_sizes", sample_sizes},
      {"replications", replications},
      {"master_seed", master_seed},
  };
  if (test.table) {
    out["table"] = {{"M", test.table->metadata().replications},
                    {"master_seed", test.table->metadata().master_seed},
                    {"estimator", test.table->metadata().estimator}};
  }
  return out;
}

PowerCurve run_power_study(const PowerStudyConfig& config) {
  validate_config(config);
  require_coverage(config.test, config.sample_sizes);

  const std::size_t grid = config.parameter_grid.size();
  const std::size_t sizes = config.sample_sizes.size();
  const std::size_t reps = config.replications;

  std::vector<DistributionSpec> specs;
  for (double p : config.parameter_grid) {
    specs.push_back(DistributionSpec::with_tail_parameter(config.data_family, p));
  }
  std::vector<std::vector<double>> thresholds;
  for (std::size_t n : config.sample_sizes) thresholds.push_back(thresholds_for(config.test, n));

  const std::size_t total = grid * sizes * reps;
  std::vector<unsigned char> rejected(total, 0);
  parallel_blocks(total, config.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buffer;
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t r = idx % reps;
      const std::size_t k = (idx / reps) % sizes;
      const std::size_t g = idx / (reps * sizes);
      buffer.resize(config.sample_sizes[k]);
      RngStream rng(config.master_seed, (std::uint64_t{g} << 40) | (std::uint64_t{k} << 32) | r);
      draw_into(specs[g], buffer, rng);
      const double s = test_statistic(config.test.kind, buffer);
      rejected[idx] = decide(config.test.kind, s, thresholds[k]) ? 1 : 0;
    }
  });

  PowerCurve curve;
  curve.family = config.data_family;
  curve.config = config.to_json();
  for (std::size_t g = 0; g < grid; ++g) {
    for (std::size_t k = 0; k < sizes; ++k) {
      std::size_t count = 0;
      const std::size_t offset = (g * sizes + k) * reps;
      for (std::size_t r = 0; r < reps; ++r) count += rejected[offset + r];
      curve.points.push_back({config.parameter_grid[g], config.sample_sizes[k],
                              static_cast<double>(count) / static_cast<double>(reps), reps});
    }
  }
  return curve;
}

double size_check(const TestSpec& test, std::size_t n, std::size_t replications,
                  const RngStream& rng, unsigned threads) {
  if (replications == 0) throw std::invalid_argument("size_check needs at least 1 replication");
  validate(test);
  const std::size_t sizes[] = {n};
  require_coverage(test, sizes);
  const auto thresholds = thresholds_for(test, n);
  const DistributionSpec null = null_boundary(test);
  std::vector<unsigned char> rejected(replications, 0);
  parallel_blocks(replications, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buffer(n);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream stream = rng.substream(rng.stream_id() + i);
      draw_into(null, buffer, stream);
      rejected[i] = decide(test.kind, test_statistic(test.kind, buffer), thresholds) ? 1 : 0;
    }
  });
  std::size_t count = 0;
  for (unsigned char r : rejected) count += r;
  return static_cast<double>(count) / static_cast<double>(replications);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path out = csv_path;
  out.replace_extension(".json");
  if (out == csv_path) out += ".sidecar.json";
  return out;
}

void export_curve(const PowerCurve& curve, const std::filesystem::path& csv_path) {
  std::string csv(kCsvHeader);
  csv += '\n';
  const std::string family(family_tag(curve.family));
  for (const auto& p : curve.points) {
    csv += family + ',' + format_parameter(p.parameter) + ',' + std::to_string(p.n) + ',' +
           std::to_string(p.replications) + ',' + format_double(p.rejection_rate) + '\n';
  }
  nlohmann::json sidecar = {{"family", family}, {"config", curve.config}};
  write_file_atomic(sidecar_path(csv_path), sidecar.dump(2) + "\n");
  write_file_atomic(csv_path, csv);
}

PowerCurve import_curve(const std::filesystem::path& csv_path) {
  PowerCurve curve;
  const auto side = sidecar_path(csv_path);
  bool family_known = false;
  if (std::filesystem::exists(side)) {
    const auto doc = nlohmann::json::parse(read_file(side));
    curve.family = parse_family(doc.at("family").get<std::string>());
    curve.config = doc.value("config", nlohmann::json());
    family_known = true;
  }
  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument(csv_path.string() + ": missing or wrong CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 5) {
      throw std::invalid_argument(csv_path.string() + ": expected 5 fields in '" + line + "'");
    }
    const Family family = parse_family(fields[0]);
    if (family_known && family != curve.family) {
      throw std::invalid_argument(csv_path.string() + ": mixed families");
    }
    curve.family = family;
    family_known = true;
    curve.points.push_back({parse_double(fields[1]), parse_count(fields[2]),
                            parse_double(fields[4]), parse_count(fields[3])});
  }
  return curve;
}

}  // namespace greenwood
