// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwood/critical.hpp"
#include "greenwood/hypothesis.hpp"
#include "greenwood/rng.hpp"

namespace greenwood {

struct Signal {
  std::vector<double> samples;
  double sample_rate = 1.0;  // Hz

  /// Throws std::invalid_argument: length < 2, non-finite samples or rate.
  void validate() const;
};

/// Symmetric Kaiser window I0(beta sqrt(1 - r^2)) / I0(beta), r in [-1, 1].
/// Throws std::invalid_argument for length 0 or beta < 0.
std::vector<double> kaiser_window(std::size_t length, double beta);

/// |STFT|^2 over non-negative frequency bins, stored row-major with one
/// row per frequency bin, so a row is one contiguous time series.
struct Spectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> magnitude_squared;  // bins * frames
  std::vector<double> frequencies;        // Hz, size bins
  std::vector<double> times;              // s, frame centres, size frames
  std::size_t window_length = 0;
  std::size_t nfft = 0;  // DFT length; bins = nfft / 2 + 1
  std::size_t overlap = 0;
  double sample_rate = 1.0;
  std::string window;

  double at(std::size_t bin, std::size_t frame) const {
    return magnitude_squared[bin * frames + frame];
  }
  std::span<const double> row(std::size_t bin) const {
    return std::span<const double>(magnitude_squared).subspan(bin * frames, frames);
  }
  nlohmann::json axes_json() const;
};

/// Frame count floor((len - window) / hop) + 1 with hop = window - overlap.
std::size_t frame_count(std::size_t length, std::size_t window, std::size_t overlap);

/// Windowed DFT per frame, magnitude squared, bins 0..nfft/2 at k fs / nfft.
/// nfft = 0 means the window length; a longer nfft zero-pads each frame.
/// Throws std::invalid_argument on an empty window, a window longer than the
/// signal, overlap >= window length, or 0 < nfft < window length.
Spectrogram spectrogram(const Signal& signal, std::span<const double> window,
                        std::size_t overlap, unsigned threads = 0,
                        std::string window_description = "custom", std::size_t nfft = 0);

/// Sum over frames of the one-sided Parseval energy
/// (|X_0|^2 + 2 sum_interior |X_k|^2 + |X_{nfft/2}|^2) / nfft. With a rectangular
/// window this equals the energy of the samples covered by frames.
double spectrogram_energy(const Spectrogram& spec);

/// Non-overlapping views of `segment_length` samples; the remainder is
/// dropped. Throws std::invalid_argument if segment_length < 2 or exceeds
/// the signal length.
std::vector<std::span<const double>> segment_signal(std::span<const double> samples,
                                                    std::size_t segment_length);

struct FrequencyRow {
  double frequency = 0.0;
  std::size_t bin = 0;
  std::span<const double> values;  // view into the spectrogram
};

/// Rows whose bin frequency lies in [f_min, f_max]. Throws
/// std::invalid_argument if f_min >= f_max or the band holds no bin.
std::vector<FrequencyRow> frequency_rows(const Spectrogram& spec, double f_min, double f_max);

struct BatchUnit {
  std::size_t index = 0;
  double frequency = 0.0;  // time-frequency units only
  TestOutcome outcome;
};

struct BatchReport {
  std::string domain;  // "time" or "time-frequency"
  double c = kDefaultSignificance;
  std::vector<BatchUnit> units;
  std::size_t rejections = 0;
  double rejection_percentage = 0.0;
  nlohmann::json config;

  nlohmann::json to_json() const;
};

/// Applies `test` to every unit. Thresholds for each distinct unit length
/// are resolved before any unit is tested (CoverageError on a gap).
BatchReport batch_test(std::span<const std::span<const double>> units, const TestSpec& test,
                       unsigned threads = 0);

/// Same for spectrogram rows. The test must carry a spectrogram-domain
/// table: raw-sample critical values do not apply to spectrogram rows.
BatchReport batch_test_rows(std::span<const FrequencyRow> rows, const TestSpec& test,
                            unsigned threads = 0);

/// Everything that shapes the null distribution of a spectrogram row.
struct SpectrogramConfig {
  std::size_t window_length = 2000;
  std::size_t nfft = 0;  // 0: window length
  double kaiser_beta = 5.0;
  std::size_t overlap = 0;
  double sample_rate = 1.0;
  double f_min = 0.0;
  double f_max = 0.5;
  std::size_t frames = 0;  // row length n

  std::size_t hop() const noexcept { return window_length - overlap; }
  std::size_t fft_length() const noexcept { return nfft == 0 ? window_length : nfft; }
  std::size_t signal_length() const noexcept { return (frames - 1) * hop() + window_length; }
  std::vector<double> window() const { return kaiser_window(window_length, kaiser_beta); }
  std::string window_description() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;

  nlohmann::json to_json() const;
  static SpectrogramConfig from_json(const nlohmann::json& doc);
  friend bool operator==(const SpectrogramConfig&, const SpectrogramConfig&) = default;
};

/// Null quantiles of S_n over in-band spectrogram rows: simulate signals of
/// config.signal_length() samples from each request's spec, pool the S_n of
/// their in-band rows until `replications` values are collected. Signal j
/// of a group uses stream base + group offset + j. Entries carry
/// Domain::spectrogram and n = config.frames; the config is recorded as
/// metadata.domain_config.
QuantileTable build_spectrogram_null_table(std::span<const QuantileRequest> requests,
                                           const SpectrogramConfig& config,
                                           std::size_t replications, const RngStream& base,
                                           unsigned threads = 0);

// --- files -----------------------------------------------------------------

/// Binary layout: "GRNWDSIG", u64 count, f64 sample rate, count f64 (LE).
void write_signal_binary(const std::filesystem::path& path, const Signal& signal);
/// One value per line.
void write_signal_csv(const std::filesystem::path& path, const Signal& signal);
/// Detects the binary header; otherwise parses single-column CSV (an
/// optional non-numeric header line is skipped) with `csv_sample_rate`.
Signal read_signal(const std::filesystem::path& path, double csv_sample_rate = 1.0);

/// "GRNWDSPC", u64 rows (bins), u64 cols (frames), row-major f64 (LE);
/// axes go to `axes_path` as JSON.
void write_spectrogram(const std::filesystem::path& path, const std::filesystem::path& axes_path,
                       const Spectrogram& spec);
Spectrogram read_spectrogram(const std::filesystem::path& path,
                             const std::filesystem::path& axes_path);

}  // namespace greenwood
