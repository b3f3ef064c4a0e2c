// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "greenwood/signal.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>

#include "greenwood/io.hpp"
#include "greenwood/parallel.hpp"
#include "greenwood/statistic.hpp"

namespace greenwood {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary signal files are little-endian; big-endian hosts are unsupported");

constexpr char kSignalMagic[8] = {'G', 'R', 'N', 'W', 'D', 'S', 'I', 'G'};
constexpr char kSpectrogramMagic[8] = {'G', 'R', 'N', 'W', 'D', 'S', 'P', 'C'};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// One r2c plan plus aligned buffers. The FFTW planner is not thread-safe,
// so plan creation and destruction are serialized; execution is not.
class FrameTransform {
 public:
  // A transform of `length` points; shorter frames are zero-padded.
  explicit FrameTransform(std::size_t length) : length_(length) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * length));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (length / 2 + 1)));
    if (!in_ || !out_) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(length), in_, out_, FFTW_ESTIMATE);
    if (!plan_) {
      release();
      throw std::runtime_error("FFTW could not create a plan");
    }
  }
  FrameTransform(const FrameTransform&) = delete;
  FrameTransform& operator=(const FrameTransform&) = delete;
  ~FrameTransform() { release(); }

  std::size_t bins() const noexcept { return length_ / 2 + 1; }

  // out[k] = |sum_m frame[m] window[m] e^{-2 pi i k m / n}|^2
  void power(const double* frame, std::span<const double> window, double* out, std::size_t stride) {
    const std::size_t w = window.size();
    for (std::size_t m = 0; m < w; ++m) in_[m] = frame[m] * window[m];
    std::fill(in_ + w, in_ + length_, 0.0);
    fftw_execute(plan_);
    for (std::size_t k = 0; k < bins(); ++k) {
      out[k * stride] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  void release() noexcept {
    std::lock_guard lock(planner_mutex());
    if (plan_) fftw_destroy_plan(plan_);
    if (in_) fftw_free(in_);
    if (out_) fftw_free(out_);
    plan_ = nullptr;
    in_ = nullptr;
    out_ = nullptr;
  }

  std::size_t length_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

void check_geometry(std::size_t length, std::size_t window, std::size_t overlap) {
  if (window == 0) throw std::invalid_argument("window must not be empty");
  if (window > length) {
    throw std::invalid_argument("window length " + std::to_string(window) +
                                " exceeds signal length " + std::to_string(length));
  }
  if (overlap >= window) throw std::invalid_argument("overlap must be smaller than the window");
}

std::vector<std::size_t> band_bins(std::span<const double> frequencies, double f_min,
                                   double f_max) {
  if (!(f_min < f_max)) throw std::invalid_argument("frequency band needs f_min < f_max");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < frequencies.size(); ++k) {
    if (frequencies[k] >= f_min && frequencies[k] <= f_max) out.push_back(k);
  }
  if (out.empty()) {
    throw std::invalid_argument("frequency band [" + format_double(f_min) + ", " +
                                format_double(f_max) + "] Hz contains no spectrogram bin");
  }
  return out;
}

std::vector<double> bin_frequencies(std::size_t nfft, double sample_rate) {
  std::vector<double> f(nfft / 2 + 1);
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
  }
  return f;
}

std::size_t resolve_nfft(std::size_t window, std::size_t nfft) {
  if (nfft == 0) return window;
  if (nfft < window) {
    throw std::invalid_argument("DFT length " + std::to_string(nfft) +
                                " is shorter than the window (" + std::to_string(window) + ")");
  }
  return nfft;
}

template <class T>
void append_raw(std::string& out, const T& v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <class T>
T read_raw(const std::string& data, std::size_t& pos, const std::string& what) {
  if (pos + sizeof(T) > data.size()) throw std::runtime_error(what + ": truncated file");
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

BatchReport run_batch(std::span<const std::span<const double>> units,
                      std::span<const double> frequencies, const TestSpec& test,
                      unsigned threads) {
  validate(test);
  if (units.empty()) throw std::invalid_argument("batch test needs at least one unit");
  std::set<std::size_t> lengths;
  for (const auto& u : units) lengths.insert(u.size());
  std::map<std::size_t, std::vector<double>> thresholds;
  for (std::size_t n : lengths) thresholds[n] = thresholds_for(test, n);

  BatchReport report;
  report.domain = test.domain == Domain::spectrogram ? "time-frequency" : "time";
  report.c = test.c;
  report.units.resize(units.size());
  parallel_for(units.size(), threads, [&](std::size_t i) {
    const auto& u = units[i];
    const double s = test_statistic(test.kind, u);
    report.units[i].index = i;
    if (!frequencies.empty()) report.units[i].frequency = frequencies[i];
    report.units[i].outcome = make_outcome(test, u.size(), s, thresholds.at(u.size()));
  });
  for (const auto& u : report.units) report.rejections += u.outcome.reject ? 1 : 0;
  report.rejection_percentage =
      100.0 * static_cast<double>(report.rejections) / static_cast<double>(units.size());
  return report;
}

double parse_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("'" + std::string(text) + "' is not a number");
  }
  return v;
}

}  // namespace

void Signal::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("signal needs at least 2 samples");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("sample rate must be positive");
  }
  for (double x : samples) {
    if (!std::isfinite(x)) throw std::invalid_argument("signal contains NaN or infinity");
  }
}

std::vector<double> kaiser_window(std::size_t length, double beta) {
  if (length == 0) throw std::invalid_argument("kaiser window length must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("kaiser beta must be >= 0");
  }
  std::vector<double> w(length, 1.0);
  if (length == 1 || beta == 0.0) return w;
  const double denom = std::cyl_bessel_i(0.0, beta);
  const double half = static_cast<double>(length - 1) / 2.0;
  for (std::size_t i = 0; i < (length + 1) / 2; ++i) {
    const double r = (static_cast<double>(i) - half) / half;
    const double v = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    w[i] = v;
    w[length - 1 - i] = v;
  }
  return w;
}

nlohmann::json Spectrogram::axes_json() const {
  return {{"bins", bins},
          {"frames", frames},
          {"frequencies_hz", frequencies},
          {"times_s", times},
          {"window", window},
          {"window_length", window_length},
          {"nfft", nfft},
          {"overlap", overlap},
          {"sample_rate", sample_rate},
          {"layout", "row-major, one row per frequency bin"}};
}

std::size_t frame_count(std::size_t length, std::size_t window, std::size_t overlap) {
  check_geometry(length, window, overlap);
  return (length - window) / (window - overlap) + 1;
}

Spectrogram spectrogram(const Signal& signal, std::span<const double> window, std::size_t overlap,
                        unsigned threads, std::string window_description, std::size_t nfft) {
  signal.validate();
  const std::size_t w = window.size();
  const std::size_t frames = frame_count(signal.samples.size(), w, overlap);
  const std::size_t hop = w - overlap;
  nfft = resolve_nfft(w, nfft);

  Spectrogram out;
  out.bins = nfft / 2 + 1;
  out.frames = frames;
  out.window_length = w;
  out.nfft = nfft;
  out.overlap = overlap;
  out.sample_rate = signal.sample_rate;
  out.window = std::move(window_description);
  out.frequencies = bin_frequencies(nfft, signal.sample_rate);
  out.times.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    out.times[f] = (static_cast<double>(f * hop) + static_cast<double>(w) / 2.0) /
                   signal.sample_rate;
  }
  out.magnitude_squared.assign(out.bins * frames, 0.0);
  parallel_blocks(frames, threads, [&](std::size_t begin, std::size_t end) {
    FrameTransform fft(nfft);
    for (std::size_t f = begin; f < end; ++f) {
      fft.power(signal.samples.data() + f * hop, window, out.magnitude_squared.data() + f, frames);
    }
  });
  return out;
}

double spectrogram_energy(const Spectrogram& spec) {
  const std::size_t w = spec.nfft;
  double total = 0.0;
  for (std::size_t k = 0; k < spec.bins; ++k) {
    const bool edge = k == 0 || (w % 2 == 0 && k == spec.bins - 1);
    const auto row = spec.row(k);
    total += (edge ? 1.0 : 2.0) * exact_sum(row);
  }
  return total / static_cast<double>(w);
}

std::vector<std::span<const double>> segment_signal(std::span<const double> samples,
                                                    std::size_t segment_length) {
  if (segment_length < 2) throw std::invalid_argument("segment length must be >= 2");
  if (segment_length > samples.size()) {
    throw std::invalid_argument("segment length " + std::to_string(segment_length) +
                                " exceeds signal length " + std::to_string(samples.size()));
  }
  std::vector<std::span<const double>> out;
  out.reserve(samples.size() / segment_length);
  for (std::size_t start = 0; start + segment_length <= samples.size(); start += segment_length) {
    out.push_back(samples.subspan(start, segment_length));
  }
  return out;
}

std::vector<FrequencyRow> frequency_rows(const Spectrogram& spec, double f_min, double f_max) {
  std::vector<FrequencyRow> rows;
  for (std::size_t k : band_bins(spec.frequencies, f_min, f_max)) {
    rows.push_back({spec.frequencies[k], k, spec.row(k)});
  }
  return rows;
}

nlohmann::json BatchReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& u : units) {
    nlohmann::json j = {{"index", u.index}};
    if (domain == "time-frequency") j["frequency_hz"] = u.frequency;
    j["n"] = u.outcome.n;
    j["statistic"] = u.outcome.statistic;
    j["thresholds"] = u.outcome.thresholds;
    j["reject"] = u.outcome.reject;
    list.push_back(std::move(j));
  }
  nlohmann::json out = {
      {"domain", domain},
      {"c", c},
      {"test", units.empty() ? std::string() : std::string(test_kind_tag(units[0].outcome.kind))},
      {"unit_count", units.size()},
      {"rejections", rejections},
      {"rejection_percentage", rejection_percentage},
      {"units", std::move(list)},
  };
  if (!config.is_null()) out["config"] = config;
  return out;
}

BatchReport batch_test(std::span<const std::span<const double>> units, const TestSpec& test,
                       unsigned threads) {
  return run_batch(units, {}, test, threads);
}

BatchReport batch_test_rows(std::span<const FrequencyRow> rows, const TestSpec& test,
                            unsigned threads) {
  if (test.domain != Domain::spectrogram) {
    throw std::invalid_argument(
        "spectrogram rows need a spectrogram-domain null table; raw-sample critical values "
        "do not apply to spectrogram rows");
  }
  std::vector<std::span<const double>> units;
  std::vector<double> freqs;
  for (const auto& r : rows) {
    units.push_back(r.values);
    freqs.push_back(r.frequency);
  }
  return run_batch(units, freqs, test, threads);
}

std::string SpectrogramConfig::window_description() const {
  if (kaiser_beta == 0.0) return "rectangular(" + std::to_string(window_length) + ")";
  return "kaiser(" + std::to_string(window_length) + "," + format_double(kaiser_beta) + ")";
}

void SpectrogramConfig::validate() const {
  if (window_length < 2) throw std::invalid_argument("window length must be >= 2");
  if (overlap >= window_length) throw std::invalid_argument("overlap must be < window length");
  resolve_nfft(window_length, nfft);
  if (!(kaiser_beta >= 0.0)) throw std::invalid_argument("kaiser beta must be >= 0");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (frames < 2) throw std::invalid_argument("spectrogram rows need at least 2 frames");
  band_bins(bin_frequencies(fft_length(), sample_rate), f_min, f_max);
}

nlohmann::json SpectrogramConfig::to_json() const {
  return {{"window_length", window_length}, {"nfft", nfft}, {"kaiser_beta", kaiser_beta},
          {"overlap", overlap},             {"sample_rate", sample_rate},
          {"f_min", f_min},                 {"f_max", f_max},
          {"frames", frames}};
}

SpectrogramConfig SpectrogramConfig::from_json(const nlohmann::json& doc) {
  SpectrogramConfig c;
  c.window_length = doc.at("window_length").get<std::size_t>();
  c.nfft = doc.value("nfft", std::size_t{0});
  c.kaiser_beta = doc.at("kaiser_beta").get<double>();
  c.overlap = doc.at("overlap").get<std::size_t>();
  c.sample_rate = doc.at("sample_rate").get<double>();
  c.f_min = doc.at("f_min").get<double>();
  c.f_max = doc.at("f_max").get<double>();
  c.frames = doc.at("frames").get<std::size_t>();
  return c;
}

QuantileTable build_spectrogram_null_table(std::span<const QuantileRequest> requests,
                                           const SpectrogramConfig& config,
                                           std::size_t replications, const RngStream& base,
                                           unsigned threads) {
  config.validate();
  if (replications < kMinReplications) {
    throw std::invalid_argument("at least " + std::to_string(kMinReplications) +
                                " replications are required, got " +
                                std::to_string(replications));
  }
  const std::vector<double> window = config.window();
  const std::vector<std::size_t> bins =
      band_bins(bin_frequencies(config.fft_length(), config.sample_rate), config.f_min,
                config.f_max);
  const std::size_t rows = bins.size();
  const std::size_t frames = config.frames;
  const std::size_t length = config.signal_length();
  const std::size_t hop = config.hop();
  const std::size_t signals = (replications + rows - 1) / rows;

  std::map<std::string, std::vector<std::size_t>> groups;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    if (r.n != 0 && r.n != frames) {
      throw std::invalid_argument("spectrogram request n=" + std::to_string(r.n) +
                                  " differs from the configured row length " +
                                  std::to_string(frames));
    }
    const std::string key = describe_key(r.spec, frames, r.c, r.side, Domain::spectrogram);
    if (!seen.insert(key).second) throw std::invalid_argument("duplicate quantile request " + key);
    groups[r.spec.shape_key()].push_back(i);
  }

  std::vector<QuantileEntry> entries(requests.size());
  for (const auto& [shape, members] : groups) {
    const DistributionSpec& spec = requests[members.front()].spec;
    const std::uint64_t offset =
        stable_hash("spectrogram|" + shape + "|" + config.to_json().dump()) << 32;
    const RngStream group = base.substream(base.stream_id() + offset);
    std::vector<double> values(signals * rows);
    parallel_blocks(signals, threads, [&](std::size_t begin, std::size_t end) {
      FrameTransform fft(config.fft_length());
      std::vector<double> x(length);
      std::vector<double> power(fft.bins());
      std::vector<double> band(rows * frames);
      for (std::size_t j = begin; j < end; ++j) {
        RngStream rng = group.substream(group.stream_id() + j);
        draw_into(spec, x, rng);
        for (std::size_t f = 0; f < frames; ++f) {
          fft.power(x.data() + f * hop, window, power.data(), 1);
          for (std::size_t r = 0; r < rows; ++r) band[r * frames + f] = power[bins[r]];
        }
        for (std::size_t r = 0; r < rows; ++r) {
          values[j * rows + r] =
              modified_greenwood(std::span<const double>(band).subspan(r * frames, frames)).value;
        }
      }
    });
    values.resize(replications);
    std::sort(values.begin(), values.end());
    for (std::size_t i : members) {
      const auto& r = requests[i];
      entries[i] = {r.spec, frames, r.c, r.side, Domain::spectrogram,
                    empirical_quantile_sorted(values, tail_probability_level(r.c, r.side))};
    }
  }

  TableMetadata meta;
  meta.replications = replications;
  meta.master_seed = base.master_seed();
  meta.created_at = utc_timestamp();
  meta.domain_config = config.to_json();
  meta.domain_config["domain"] = "spectrogram";
  meta.domain_config["rows_per_signal"] = rows;
  return QuantileTable(std::move(meta), std::move(entries));
}

void write_signal_binary(const std::filesystem::path& path, const Signal& signal) {
  std::string data(kSignalMagic, sizeof(kSignalMagic));
  append_raw(data, static_cast<std::uint64_t>(signal.samples.size()));
  append_raw(data, signal.sample_rate);
  data.append(reinterpret_cast<const char*>(signal.samples.data()),
              signal.samples.size() * sizeof(double));
  write_file_atomic(path, data);
}

void write_signal_csv(const std::filesystem::path& path, const Signal& signal) {
  std::string data;
  for (double x : signal.samples) data += format_double(x) + '\n';
  write_file_atomic(path, data);
}

Signal read_signal(const std::filesystem::path& path, double csv_sample_rate) {
  const std::string data = read_file(path);
  Signal s;
  if (data.size() >= sizeof(kSignalMagic) &&
      std::memcmp(data.data(), kSignalMagic, sizeof(kSignalMagic)) == 0) {
    std::size_t pos = sizeof(kSignalMagic);
    const auto count = read_raw<std::uint64_t>(data, pos, path.string());
    s.sample_rate = read_raw<double>(data, pos, path.string());
    if (data.size() - pos != count * sizeof(double)) {
      throw std::runtime_error(path.string() + ": sample count does not match file size");
    }
    s.samples.resize(count);
    std::memcpy(s.samples.data(), data.data() + pos, count * sizeof(double));
    return s;
  }
  s.sample_rate = csv_sample_rate;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view field(line);
    if (const auto comma = field.find(','); comma != std::string_view::npos) {
      field = field.substr(0, comma);
    }
    if (field.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      s.samples.push_back(parse_number(field));
    } catch (const std::invalid_argument&) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": not a number: '" + std::string(field) + "'");
    }
  }
  return s;
}

void write_spectrogram(const std::filesystem::path& path, const std::filesystem::path& axes_path,
                       const Spectrogram& spec) {
  std::string data(kSpectrogramMagic, sizeof(kSpectrogramMagic));
  append_raw(data, static_cast<std::uint64_t>(spec.bins));
  append_raw(data, static_cast<std::uint64_t>(spec.frames));
  data.append(reinterpret_cast<const char*>(spec.magnitude_squared.data()),
              spec.magnitude_squared.size() * sizeof(double));
  write_file_atomic(axes_path, spec.axes_json().dump(2) + "\n");
  write_file_atomic(path, data);
}

Spectrogram read_spectrogram(const std::filesystem::path& path,
                             const std::filesystem::path& axes_path) {
  const std::string data = read_file(path);
  if (data.size() < sizeof(kSpectrogramMagic) ||
      std::memcmp(data.data(), kSpectrogramMagic, sizeof(kSpectrogramMagic)) != 0) {
    throw std::runtime_error(path.string() + ": not a spectrogram file");
  }
  std::size_t pos = sizeof(kSpectrogramMagic);
  Spectrogram s;
  s.bins = read_raw<std::uint64_t>(data, pos, path.string());
  s.frames = read_raw<std::uint64_t>(data, pos, path.string());
  if (data.size() - pos != s.bins * s.frames * sizeof(double)) {
    throw std::runtime_error(path.string() + ": matrix size does not match file size");
  }
  s.magnitude_squared.resize(s.bins * s.frames);
  std::memcpy(s.magnitude_squared.data(), data.data() + pos, s.magnitude_squared.size() * 8);
  const auto axes = nlohmann::json::parse(read_file(axes_path));
  s.frequencies = axes.at("frequencies_hz").get<std::vector<double>>();
  s.times = axes.at("times_s").get<std::vector<double>>();
  s.window = axes.at("window").get<std::string>();
  s.window_length = axes.at("window_length").get<std::size_t>();
  s.nfft = axes.value("nfft", s.window_length);
  s.overlap = axes.at("overlap").get<std::size_t>();
  s.sample_rate = axes.at("sample_rate").get<double>();
  return s;
}

}  // namespace greenwood
