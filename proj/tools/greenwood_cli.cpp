// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// greenwood command-line tool.
//
// Exit codes: 0 success (a rejection is a result, not an error), 1 runtime
// error such as unreadable input, 2 argument or table-coverage error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenwood/critical.hpp"
#include "greenwood/distributions.hpp"
#include "greenwood/hypothesis.hpp"
#include "greenwood/io.hpp"
#include "greenwood/parallel.hpp"
#include "greenwood/power.hpp"
#include "greenwood/signal.hpp"

namespace fs = std::filesystem;
using namespace greenwood;
using nlohmann::json;

namespace {

// Argument problems detected after parsing.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed input files.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "infinity") return INFINITY;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + text + "'");
  }
  if (used != text.size() || std::isnan(v)) throw UsageError("not a number: '" + text + "'");
  return v;
}

// "a,b,c" or "start:stop:step".
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("range must be start:stop:step, got '" + text + "'");
    const double a = parse_number(parts[0]);
    const double b = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0) || !std::isfinite(a) || !std::isfinite(b) || b < a) {
      throw UsageError("invalid range '" + text + "'");
    }
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 100000) throw UsageError("range '" + text + "' has too many points");
    for (std::size_t k = 0; k < count; ++k) {
      out.push_back(std::round((a + static_cast<double>(k) * step) * 1e12) / 1e12);
    }
    return out;
  }
  for (const auto& item : split(text, ',')) {
    if (!item.empty()) out.push_back(parse_number(item));
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_grid(text)) {
    if (!(v >= 1) || v != std::floor(v) || v > 1e12) {
      throw UsageError("sample sizes must be positive integers, got '" + text + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

DistributionSpec make_spec(const std::string& family_text, std::optional<double> param) {
  const Family family = parse_family(family_text);
  if (family == Family::gaussian) {
    if (param) throw UsageError("the gaussian family takes no --param");
    return DistributionSpec::gaussian();
  }
  if (!param) {
    throw UsageError("--param is required for family " + std::string(family_tag(family)));
  }
  return DistributionSpec::with_tail_parameter(family, *param);
}

std::shared_ptr<const QuantileTable> load_table(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  try {
    return std::make_shared<const QuantileTable>(QuantileTable::from_json(json::parse(text)));
  } catch (const std::exception& e) {
    throw InputError("cannot load quantile table " + path + ": " + e.what());
  }
}

Signal load_signal(const std::string& path, std::optional<double> fs_override) {
  try {
    Signal s = read_signal(path, fs_override.value_or(1.0));
    if (fs_override) s.sample_rate = *fs_override;
    return s;
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

void emit(const json& doc, const std::string& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

json describe_table(const std::string& path, const QuantileTable& table) {
  return {{"path", path},
          {"M", table.metadata().replications},
          {"master_seed", table.metadata().master_seed},
          {"estimator", table.metadata().estimator}};
}

// Shared options.
struct Common {
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool quick = false;
};

void add_threads(CLI::App* cmd, Common& common) {
  cmd->add_option("--threads", common.threads,
                  "worker threads (0: GREENWOOD_THREADS or all cores); never changes results");
}

// quantiles ----------------------------------------------------------------

struct QuantilesArgs {
  Common common;
  std::string family;
  std::optional<double> param;
  std::string n;
  std::string c = "0.05";
  std::string side = "upper";
  std::optional<std::size_t> reps;
  std::string domain = "raw";
  std::string out;
  SpectrogramConfig tf;
};

int cmd_quantiles(const QuantilesArgs& a) {
  const DistributionSpec spec = make_spec(a.family, a.param);
  const auto sizes = parse_sizes(a.n);
  const auto levels = parse_grid(a.c);
  if (sizes.empty()) throw UsageError("--n must list at least one sample size");
  if (levels.empty()) throw UsageError("--c must list at least one level");
  const std::size_t reps =
      a.reps.value_or(a.common.quick ? kQuickReplications : kDefaultReplications);
  if (reps < kMinReplications) {
    throw UsageError("--reps must be at least " + std::to_string(kMinReplications));
  }
  std::vector<Side> sides;
  if (a.side == "both") {
    sides = {Side::lower, Side::upper};
  } else {
    sides = {parse_side(a.side)};
  }
  std::vector<QuantileRequest> requests;
  for (std::size_t n : sizes) {
    for (double c : levels) {
      for (Side s : sides) requests.push_back({spec, n, c, s});
    }
  }
  const RngStream base(a.common.seed, 0);
  const unsigned threads = resolve_threads(a.common.threads);
  json echo = {{"command", "quantiles"}, {"family", family_tag(spec.family())},
               {"spec", spec.describe()},  {"n", sizes},
               {"c", levels},              {"side", a.side},
               {"M", reps},                {"seed", a.common.seed},
               {"threads", threads},       {"domain", a.domain},
               {"out", a.out}};
  QuantileTable table;
  if (parse_domain(a.domain) == Domain::spectrogram) {
    if (sizes.size() != 1) {
      throw UsageError("spectrogram-domain tables take exactly one --n (the frame count)");
    }
    SpectrogramConfig cfg = a.tf;
    cfg.frames = sizes.front();
    cfg.validate();
    echo["spectrogram"] = cfg.to_json();
    std::cerr << echo.dump() << "\n";
    table = build_spectrogram_null_table(requests, cfg, reps, base, threads);
  } else {
    std::cerr << echo.dump() << "\n";
    table = build_quantile_table(requests, reps, base, threads);
  }
  table.save(a.out);
  std::cerr << "wrote " << table.size() << " entries to " << a.out << "\n";
  return 0;
}

// test ---------------------------------------------------------------------

struct TestArgs {
  std::string kind = "MG2";
  std::string input;
  std::string table;
  double c = kDefaultSignificance;
  std::string null_family = "gaussian";
  std::optional<double> null_param;
  std::string domain = "raw";
  std::optional<double> fs;
  std::string out;
};

int cmd_test(const TestArgs& a) {
  const TestKind kind = parse_test_kind(a.kind);
  std::shared_ptr<const QuantileTable> table;
  if (is_mg_test(kind)) {
    if (a.table.empty()) throw UsageError("--table is required for " + a.kind);
    table = load_table(a.table);
  }
  auto spec = TestSpec::make(kind, table, a.c, make_spec(a.null_family, a.null_param));
  spec.domain = parse_domain(a.domain);
  validate(spec);
  const Signal sample = load_signal(a.input, a.fs);
  const TestOutcome outcome = apply_test(spec, sample.samples);
  json doc = outcome.to_json();
  doc["config"] = {{"command", "test"}, {"input", a.input}, {"test", test_kind_tag(kind)},
                   {"c", a.c},          {"domain", a.domain}};
  if (table) doc["config"]["table"] = describe_table(a.table, *table);
  emit(doc, a.out);
  return 0;
}

// power --------------------------------------------------------------------

struct PowerArgs {
  Common common;
  std::string kind = "MG2";
  std::string table;
  double c = kDefaultSignificance;
  std::string null_family = "gaussian";
  std::optional<double> null_param;
  std::string family = "stable";
  std::string grid;
  std::string n;
  std::optional<std::size_t> reps;
  std::string out;
};

int cmd_power(const PowerArgs& a) {
  const TestKind kind = parse_test_kind(a.kind);
  PowerStudyConfig config;
  config.data_family = parse_family(a.family);
  config.parameter_grid = parse_grid(a.grid);
  config.sample_sizes = parse_sizes(a.n);
  config.replications =
      a.reps.value_or(a.common.quick ? kQuickPowerReplications : kDefaultPowerReplications);
  config.master_seed = a.common.seed;
  config.threads = resolve_threads(a.common.threads);
  if (config.parameter_grid.empty()) throw UsageError("--grid must list at least one value");
  if (config.sample_sizes.empty()) throw UsageError("--n must list at least one sample size");
  std::shared_ptr<const QuantileTable> table;
  if (is_mg_test(kind)) {
    if (a.table.empty()) throw UsageError("--table is required for " + a.kind);
    table = load_table(a.table);
  }
  config.test = TestSpec::make(kind, table, a.c, make_spec(a.null_family, a.null_param));
  std::cerr << config.to_json().dump() << "\n";
  PowerCurve curve = run_power_study(config);
  curve.config["command"] = "power";
  if (table) curve.config["table"]["path"] = a.table;
  export_curve(curve, a.out);
  std::cerr << "wrote " << curve.points.size() << " rows to " << a.out << " and "
            << sidecar_path(a.out).string() << "\n";
  return 0;
}

// analyze ------------------------------------------------------------------

struct AnalyzeArgs {
  Common common;
  std::string kind = "MG2";
  std::string input;
  std::string table;
  std::string mode = "time";
  double c = kDefaultSignificance;
  std::string null_family = "gaussian";
  std::optional<double> null_param;
  std::size_t segment = 1000;
  std::optional<double> fs;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const TestKind kind = parse_test_kind(a.kind);
  if (a.mode != "time" && a.mode != "tf") throw UsageError("--mode must be time or tf");
  std::shared_ptr<const QuantileTable> table;
  if (is_mg_test(kind)) {
    if (a.table.empty()) throw UsageError("--table is required for " + a.kind);
    table = load_table(a.table);
  }
  auto spec = TestSpec::make(kind, table, a.c, make_spec(a.null_family, a.null_param));
  const unsigned threads = resolve_threads(a.common.threads);
  json echo = {{"command", "analyze"}, {"input", a.input}, {"mode", a.mode},
               {"test", test_kind_tag(kind)}, {"c", a.c}, {"threads", threads}};
  if (table) echo["table"] = describe_table(a.table, *table);

  BatchReport report;
  if (a.mode == "time") {
    validate(spec);
    const Signal signal = load_signal(a.input, a.fs);
    echo["segment_length"] = a.segment;
    echo["sample_rate"] = signal.sample_rate;
    const auto units = segment_signal(signal.samples, a.segment);
    report = batch_test(units, spec, threads);
  } else {
    if (!is_mg_test(kind)) {
      throw UsageError("time-frequency analysis needs an MG test with a spectrogram-null table");
    }
    const auto& dc = table->metadata().domain_config;
    if (!dc.is_object() || dc.value("domain", "") != "spectrogram") {
      throw CoverageError(
          "time-frequency mode needs a spectrogram-null quantile table (build one with "
          "'quantiles --domain spectrogram'); spectrogram rows are not distributed like the raw "
          "null, so raw-domain quantiles would give invalid decisions");
    }
    const SpectrogramConfig cfg = SpectrogramConfig::from_json(dc);
    spec.domain = Domain::spectrogram;
    validate(spec);
    const Signal signal = load_signal(a.input, a.fs ? a.fs : std::optional<double>(cfg.sample_rate));
    if (signal.sample_rate != cfg.sample_rate) {
      throw UsageError("signal sample rate " + format_double(signal.sample_rate) +
                       " Hz differs from the table's " + format_double(cfg.sample_rate) + " Hz");
    }
    const auto spectro = spectrogram(signal, cfg.window(), cfg.overlap, threads,
                                     cfg.window_description(), cfg.nfft);
    const auto rows = frequency_rows(spectro, cfg.f_min, cfg.f_max);
    echo["spectrogram"] = cfg.to_json();
    echo["frames"] = spectro.frames;
    echo["rows"] = rows.size();
    report = batch_test_rows(rows, spec, threads);
  }
  report.config = echo;
  emit(report.to_json(), a.out);
  std::cerr << "rejected " << report.rejections << " of " << report.units.size() << " units ("
            << format_double(report.rejection_percentage) << "%)\n";
  return 0;
}

// spectrogram --------------------------------------------------------------

struct SpectrogramArgs {
  Common common;
  std::string input;
  std::size_t window = 2000;
  double beta = 5.0;
  std::size_t overlap = 0;
  std::size_t nfft = 0;
  std::optional<double> fs;
  std::string out;
  std::string axes;
};

int cmd_spectrogram(const SpectrogramArgs& a) {
  const Signal signal = load_signal(a.input, a.fs);
  const auto window = kaiser_window(a.window, a.beta);
  const auto spec = spectrogram(signal, window, a.overlap, resolve_threads(a.common.threads),
                                "kaiser(" + std::to_string(a.window) + "," +
                                    format_double(a.beta) + ")",
                                a.nfft);
  const fs::path axes = a.axes.empty() ? fs::path(a.out).replace_extension(".json") : fs::path(a.axes);
  if (axes == fs::path(a.out)) throw UsageError("--axes must differ from --out");
  write_spectrogram(a.out, axes, spec);
  std::cerr << "wrote " << spec.bins << " x " << spec.frames << " spectrogram to " << a.out
            << " (axes " << axes.string() << ")\n";
  return 0;
}

void add_null_options(CLI::App* cmd, std::string& family, std::optional<double>& param) {
  cmd->add_option("--null", family, "null family for MG1, MG2 and the two-sided test")
      ->capture_default_str();
  cmd->add_option("--null-param", param, "tail parameter of the null family");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greenwood: modified Greenwood statistic tests for heavy tails"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "greenwood 0.1.0");

  QuantilesArgs qa;
  auto* q = app.add_subcommand("quantiles", "build a Monte Carlo quantile table");
  q->add_option("--family", qa.family, "null family: gaussian, stable, student-t, gpd")
      ->required();
  q->add_option("--param", qa.param, "tail parameter (alpha, nu or gamma; inf allowed for nu)");
  q->add_option("--n", qa.n, "sample sizes, comma list or start:stop:step")->required();
  q->add_option("--c", qa.c, "tail probabilities, comma list")->capture_default_str();
  q->add_option("--side", qa.side, "upper, lower or both")->capture_default_str();
  q->add_option("--reps", qa.reps, "Monte Carlo replications M (default 100000, 10000 with --quick)");
  q->add_flag("--quick", qa.common.quick, "desk-scale run");
  q->add_option("--seed", qa.common.seed, "master seed")->capture_default_str();
  q->add_option("--domain", qa.domain, "raw or spectrogram")->capture_default_str();
  q->add_option("--window", qa.tf.window_length, "spectrogram domain: window length")
      ->capture_default_str();
  q->add_option("--nfft", qa.tf.nfft, "spectrogram domain: DFT length (0: window length)")
      ->capture_default_str();
  q->add_option("--beta", qa.tf.kaiser_beta, "spectrogram domain: Kaiser beta")
      ->capture_default_str();
  q->add_option("--overlap", qa.tf.overlap, "spectrogram domain: window overlap")
      ->capture_default_str();
  q->add_option("--fs", qa.tf.sample_rate, "spectrogram domain: sample rate in Hz")
      ->capture_default_str();
  q->add_option("--fmin", qa.tf.f_min, "spectrogram domain: lowest row frequency in Hz")
      ->capture_default_str();
  q->add_option("--fmax", qa.tf.f_max, "spectrogram domain: highest row frequency in Hz")
      ->capture_default_str();
  q->add_option("--out", qa.out, "output table JSON")->required();
  add_threads(q, qa.common);

  TestArgs ta;
  auto* t = app.add_subcommand("test", "test one sample and print the outcome JSON");
  t->add_option("--test", ta.kind, "MG1, MG2, MG3, MG4, MG-two-sided, JB, KS")
      ->capture_default_str();
  t->add_option("--input", ta.input, "sample file (CSV or greenwood binary)")->required();
  t->add_option("--table", ta.table, "quantile table JSON (MG tests)");
  t->add_option("--c", ta.c, "significance level")->capture_default_str();
  add_null_options(t, ta.null_family, ta.null_param);
  t->add_option("--domain", ta.domain, "table domain: raw or spectrogram")->capture_default_str();
  t->add_option("--fs", ta.fs, "sample rate for CSV input");
  t->add_option("--out", ta.out, "output JSON (default standard output)");

  PowerArgs pa;
  auto* p = app.add_subcommand("power", "run a power study and write CSV plus JSON sidecar");
  p->add_option("--test", pa.kind, "MG1, MG2, MG3, MG4, MG-two-sided, JB, KS")
      ->capture_default_str();
  p->add_option("--table", pa.table, "quantile table JSON (MG tests)");
  p->add_option("--c", pa.c, "significance level")->capture_default_str();
  add_null_options(p, pa.null_family, pa.null_param);
  p->add_option("--family", pa.family, "alternative family: stable, student-t, gpd")
      ->capture_default_str();
  p->add_option("--grid", pa.grid, "tail parameters, comma list or start:stop:step")->required();
  p->add_option("--n", pa.n, "sample sizes, comma list")->required();
  p->add_option("--reps", pa.reps, "replications R (default 2000, 500 with --quick)");
  p->add_flag("--quick", pa.common.quick, "desk-scale run");
  p->add_option("--seed", pa.common.seed, "master seed")->capture_default_str();
  p->add_option("--out", pa.out, "output CSV; the sidecar goes next to it as .json")->required();
  add_threads(p, pa.common);

  AnalyzeArgs aa;
  auto* an = app.add_subcommand("analyze", "batch-test a signal by segments or spectrogram rows");
  an->add_option("--input", aa.input, "signal file (CSV or greenwood binary)")->required();
  an->add_option("--mode", aa.mode, "time (segments) or tf (spectrogram rows)")
      ->capture_default_str();
  an->add_option("--test", aa.kind, "MG test (or JB, KS in time mode)")->capture_default_str();
  an->add_option("--table", aa.table, "quantile table JSON; tf mode needs a spectrogram-null table");
  an->add_option("--c", aa.c, "significance level")->capture_default_str();
  add_null_options(an, aa.null_family, aa.null_param);
  an->add_option("--segment", aa.segment, "time mode: segment length")->capture_default_str();
  an->add_option("--fs", aa.fs, "sample rate for CSV input");
  an->add_option("--out", aa.out, "output report JSON (default standard output)");
  add_threads(an, aa.common);

  SpectrogramArgs sa;
  auto* s = app.add_subcommand("spectrogram", "write |STFT|^2 as a binary matrix plus JSON axes");
  s->add_option("--input", sa.input, "signal file (CSV or greenwood binary)")->required();
  s->add_option("--window", sa.window, "Kaiser window length")->capture_default_str();
  s->add_option("--beta", sa.beta, "Kaiser beta")->capture_default_str();
  s->add_option("--overlap", sa.overlap, "window overlap in samples")->capture_default_str();
  s->add_option("--nfft", sa.nfft, "DFT length, zero-padding each frame (0: window length)")
      ->capture_default_str();
  s->add_option("--fs", sa.fs, "sample rate for CSV input");
  s->add_option("--out", sa.out, "output matrix file")->required();
  s->add_option("--axes", sa.axes, "output axes JSON (default: --out with .json extension)");
  add_threads(s, sa.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*q) return cmd_quantiles(qa);
    if (*t) return cmd_test(ta);
    if (*p) return cmd_power(pa);
    if (*an) return cmd_analyze(aa);
    if (*s) return cmd_spectrogram(sa);
  } catch (const CoverageError& e) {
    std::cerr << "error: table coverage: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
