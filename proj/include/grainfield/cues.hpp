#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grainfield/audio_buffer.hpp"
#include "grainfield/fft.hpp"
#include "grainfield/gammatone.hpp"
#include "grainfield/parallel.hpp"

namespace grainfield {

inline constexpr double kDefaultBlockSeconds = 0.085;
inline constexpr double kDefaultMaxLagSeconds = 0.001;
inline constexpr double kSilenceMeanSquare = 1e-8;  // -80 dBFS

struct CueFrame {
  std::size_t block_index = 0;
  bool silent = false;
  // Per band; empty when silent.
  std::vector<double> ic;
  std::vector<double> itd_s;
  std::vector<double> ild_db;
  std::vector<double> xi_left_db;   // band power per sample, dB
  std::vector<double> xi_right_db;

  bool operator==(const CueFrame&) const = default;
};

struct CueSummary {
  std::vector<double> band_center_hz;
  std::vector<double> mean_ic;
  std::vector<double> std_itd_s;
  std::vector<double> std_ild_db;
  std::vector<double> mean_xi_left_db;
  std::optional<std::vector<double>> delta_spectrum_db;
  std::size_t frames = 0;

  std::size_t bands() const noexcept { return band_center_hz.size(); }
};

// Bank sized for a block: FFT length is the next power of two >= 2 * block.
inline GammatoneBank make_cue_bank(int sample_rate, double block_s = kDefaultBlockSeconds,
                                   const GammatoneConfig& cfg = {}) {
  const std::size_t block = to_samples(block_s, sample_rate);
  if (block < 2) throw ParameterError("analysis block must span at least two samples");
  return GammatoneBank(sample_rate, next_pow2(2 * block), cfg);
}

namespace detail {

inline double to_db(double power) { return 10.0 * std::log10(std::max(power, 1e-300)); }

// Peak of r over lags -m..m (r indexed circularly), refined by a parabola
// through the neighbors when they lie inside the range.
inline double refined_argmax(const double* r, std::size_t n, long m) {
  auto at = [&](long tau) { return r[tau >= 0 ? tau : static_cast<long>(n) + tau]; };
  long best = -m;
  for (long tau = -m + 1; tau <= m; ++tau) {
    if (at(tau) > at(best)) best = tau;
  }
  double shift = 0.0;
  if (best > -m && best < m) {
    const double a = at(best - 1), b = at(best), c = at(best + 1);
    const double den = a - 2.0 * b + c;
    if (den < 0.0) shift = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  return static_cast<double>(best) + shift;
}

}  // namespace detail

// Interaural cues of one block pair in every band. The cross-correlation
// R[tau] is the inverse transform of w^2 conj(X_L) X_R; positive ITD means the
// right ear lags.
inline CueFrame analyze_block(std::span<const double> left, std::span<const double> right,
                              const GammatoneBank& bank,
                              double max_lag_s = kDefaultMaxLagSeconds) {
  if (left.size() != right.size()) throw ParameterError("blocks must have equal length");
  const std::size_t n = bank.fft_size();
  if (left.empty() || left.size() > n) {
    throw ParameterError("block length must be in [1, FFT size of the bank]");
  }
  const int sr = bank.sample_rate();
  CueFrame frame;
  if (mean_square(left) < kSilenceMeanSquare || mean_square(right) < kSilenceMeanSquare) {
    frame.silent = true;
    return frame;
  }
  const long m = std::min(static_cast<long>(to_samples(max_lag_s, sr)),
                          static_cast<long>(n / 2 - 1));

  RealFft fft(n);
  const std::size_t bins = fft.bins();
  RealArray time(n);
  ComplexArray xl(bins), xr(bins), cross(bins);
  std::copy(left.begin(), left.end(), time.data());
  fft.forward(time, xl);
  time.zero();
  std::copy(right.begin(), right.end(), time.data());
  fft.forward(time, xr);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double per_sample = 1.0 / static_cast<double>(left.size());
  const std::size_t bands = bank.size();
  frame.ic.resize(bands);
  frame.itd_s.resize(bands);
  frame.ild_db.resize(bands);
  frame.xi_left_db.resize(bands);
  frame.xi_right_db.resize(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    const auto& w = bank.window(b);
    double pl = 0.0, pr = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double w2 = w[k] * w[k];
      const double mult = (k == 0 || 2 * k == n) ? 1.0 : 2.0;  // two-sided sum
      pl += mult * w2 * std::norm(xl[k]);
      pr += mult * w2 * std::norm(xr[k]);
      cross[k] = w2 * std::conj(xl[k]) * xr[k];
    }
    pl *= inv_n;
    pr *= inv_n;
    fft.inverse(cross, time);
    double peak = 0.0;
    for (long tau = -m; tau <= m; ++tau) {
      const double v = time[tau >= 0 ? static_cast<std::size_t>(tau) : n - static_cast<std::size_t>(-tau)];
      peak = std::max(peak, std::abs(v) * inv_n);
    }
    const double norm = std::sqrt(pl * pr);
    frame.ic[b] = norm > 0.0 ? std::clamp(peak / norm, 0.0, 1.0) : 0.0;
    frame.itd_s[b] = detail::refined_argmax(time.data(), n, m) / static_cast<double>(sr);
    frame.ild_db[b] = detail::to_db(pl) - detail::to_db(pr);
    frame.xi_left_db[b] = detail::to_db(pl * per_sample);
    frame.xi_right_db[b] = detail::to_db(pr * per_sample);
  }
  return frame;
}

// Consecutive non-overlapping rectangular blocks; a trailing partial block is dropped.
template <std::floating_point Sample>
std::vector<CueFrame> analyze_signal(const BasicAudioBuffer<Sample>& stereo,
                                     const GammatoneBank& bank,
                                     double block_s = kDefaultBlockSeconds,
                                     double max_lag_s = kDefaultMaxLagSeconds) {
  if (stereo.channels() != 2) throw ParameterError("cue analysis needs a 2-channel signal");
  if (stereo.sample_rate() != bank.sample_rate()) {
    throw ParameterError("signal rate does not match the gammatone bank rate");
  }
  const std::size_t block = to_samples(block_s, stereo.sample_rate());
  if (block < 2) throw ParameterError("analysis block must span at least two samples");
  if (2 * block > bank.fft_size()) {
    throw ParameterError("bank FFT size must be at least twice the block length");
  }
  const std::size_t count = stereo.frames() / block;
  if (count == 0) throw ParameterError("signal is shorter than one analysis block");
  std::vector<CueFrame> frames(count);
  const auto l = stereo.channel(0);
  const auto r = stereo.channel(1);
  parallel_for(count, [&](std::size_t i) {
    std::vector<double> bl(l.begin() + i * block, l.begin() + (i + 1) * block);
    std::vector<double> br(r.begin() + i * block, r.begin() + (i + 1) * block);
    frames[i] = analyze_block(std::span<const double>(bl), std::span<const double>(br), bank,
                              max_lag_s);
    frames[i].block_index = i;
  });
  return frames;
}

// Adds delta_spectrum = mean xi_L - reference mean xi_L.
inline void attach_reference(CueSummary& s, const CueSummary& reference) {
  if (reference.bands() != s.bands()) {
    throw DataError("reference has " + std::to_string(reference.bands()) + " bands, expected " +
                    std::to_string(s.bands()));
  }
  std::vector<double> d(s.bands());
  for (std::size_t b = 0; b < d.size(); ++b) {
    d[b] = s.mean_xi_left_db[b] - reference.mean_xi_left_db[b];
  }
  s.delta_spectrum_db = std::move(d);
}

// Temporal mean IC, population sigma of ITD and ILD, mean left spectrum over
// non-silent frames.
inline CueSummary summarize(const std::vector<CueFrame>& frames,
                            const std::vector<double>& band_center_hz,
                            const CueSummary* reference = nullptr) {
  std::vector<const CueFrame*> voiced;
  for (const auto& f : frames) {
    if (!f.silent) voiced.push_back(&f);
  }
  if (voiced.empty()) throw DataError("no voiced frames");
  const std::size_t bands = band_center_hz.size();
  for (const auto* f : voiced) {
    if (f->ic.size() != bands) throw DataError("frame band count does not match the bank");
  }
  const double count = static_cast<double>(voiced.size());
  CueSummary s;
  s.band_center_hz = band_center_hz;
  s.frames = voiced.size();
  s.mean_ic.resize(bands);
  s.std_itd_s.resize(bands);
  s.std_ild_db.resize(bands);
  s.mean_xi_left_db.resize(bands);
  auto mean_and_std = [&](auto field, std::size_t b, double& mean, double& sd) {
    double acc = 0.0;
    for (const auto* f : voiced) acc += ((*f).*field)[b];
    mean = acc / count;
    double var = 0.0;
    for (const auto* f : voiced) {
      const double d = ((*f).*field)[b] - mean;
      var += d * d;
    }
    sd = std::sqrt(var / count);
  };
  for (std::size_t b = 0; b < bands; ++b) {
    double mean = 0.0, sd = 0.0;
    mean_and_std(&CueFrame::ic, b, s.mean_ic[b], sd);
    mean_and_std(&CueFrame::itd_s, b, mean, s.std_itd_s[b]);
    mean_and_std(&CueFrame::ild_db, b, mean, s.std_ild_db[b]);
    mean_and_std(&CueFrame::xi_left_db, b, s.mean_xi_left_db[b], sd);
  }
  if (reference) attach_reference(s, *reference);
  return s;
}

inline CueSummary summarize(const std::vector<CueFrame>& frames, const GammatoneBank& bank,
                            const CueSummary* reference = nullptr) {
  return summarize(frames, bank.centers(), reference);
}

// Band-wise mean of several summaries (e.g. over seeds). Delta spectra are
// averaged only when every input carries one.
inline CueSummary average_summaries(const std::vector<CueSummary>& all) {
  if (all.empty()) throw DataError("no summaries to average");
  CueSummary out;
  out.band_center_hz = all.front().band_center_hz;
  const std::size_t bands = out.bands();
  out.mean_ic.assign(bands, 0.0);
  out.std_itd_s.assign(bands, 0.0);
  out.std_ild_db.assign(bands, 0.0);
  out.mean_xi_left_db.assign(bands, 0.0);
  bool with_delta = true;
  for (const auto& s : all) {
    if (s.bands() != bands) throw DataError("summaries differ in band count");
    with_delta = with_delta && s.delta_spectrum_db.has_value();
    out.frames += s.frames;
  }
  if (with_delta) out.delta_spectrum_db = std::vector<double>(bands, 0.0);
  const double k = static_cast<double>(all.size());
  for (const auto& s : all) {
    for (std::size_t b = 0; b < bands; ++b) {
      out.mean_ic[b] += s.mean_ic[b] / k;
      out.std_itd_s[b] += s.std_itd_s[b] / k;
      out.std_ild_db[b] += s.std_ild_db[b] / k;
      out.mean_xi_left_db[b] += s.mean_xi_left_db[b] / k;
      if (with_delta) (*out.delta_spectrum_db)[b] += (*s.delta_spectrum_db)[b] / k;
    }
  }
  return out;
}

// Mean of `values` over bands whose centers lie in [lo_hz, hi_hz].
inline double band_average(const std::vector<double>& centers, const std::vector<double>& values,
                           double lo_hz, double hi_hz) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < centers.size(); ++b) {
    if (centers[b] >= lo_hz && centers[b] <= hi_hz) {
      acc += values[b];
      ++n;
    }
  }
  if (n == 0) throw ParameterError("no bands in the requested range");
  return acc / static_cast<double>(n);
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": '" + s + "' is not a number");
  }
}

}  // namespace detail

// Columns: band_center_hz, mean_ic, std_itd_us, std_ild_db, mean_xi_left_db and,
// when a reference is attached, delta_spectrum_db.
inline std::string summary_to_csv(const CueSummary& s) {
  std::string out = "band_center_hz,mean_ic,std_itd_us,std_ild_db,mean_xi_left_db";
  if (s.delta_spectrum_db) out += ",delta_spectrum_db";
  out += '\n';
  for (std::size_t b = 0; b < s.bands(); ++b) {
    out += detail::fmt(s.band_center_hz[b]) + ',' + detail::fmt(s.mean_ic[b]) + ',' +
           detail::fmt(s.std_itd_s[b] * 1e6) + ',' + detail::fmt(s.std_ild_db[b]) + ',' +
           detail::fmt(s.mean_xi_left_db[b]);
    if (s.delta_spectrum_db) out += ',' + detail::fmt((*s.delta_spectrum_db)[b]);
    out += '\n';
  }
  return out;
}

inline CueSummary summary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("summary CSV is empty");
  const auto header = detail::split_csv_line(line);
  const std::vector<std::string> required = {"band_center_hz", "mean_ic", "std_itd_us",
                                             "std_ild_db", "mean_xi_left_db"};
  std::vector<std::size_t> col;
  for (const auto& name : required) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("summary CSV lacks column '" + name + "'");
    col.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  auto delta_it = std::find(header.begin(), header.end(), "delta_spectrum_db");
  CueSummary s;
  if (delta_it != header.end()) s.delta_spectrum_db.emplace();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("summary CSV row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    const std::string where = "summary CSV row " + std::to_string(row);
    s.band_center_hz.push_back(detail::parse_double(cells[col[0]], where));
    s.mean_ic.push_back(detail::parse_double(cells[col[1]], where));
    s.std_itd_s.push_back(detail::parse_double(cells[col[2]], where) * 1e-6);
    s.std_ild_db.push_back(detail::parse_double(cells[col[3]], where));
    s.mean_xi_left_db.push_back(detail::parse_double(cells[col[4]], where));
    if (s.delta_spectrum_db) {
      s.delta_spectrum_db->push_back(
          detail::parse_double(cells[static_cast<std::size_t>(delta_it - header.begin())], where));
    }
  }
  return s;
}

// One row per voiced frame and band.
inline std::string frames_to_csv(const std::vector<CueFrame>& frames,
                                 const std::vector<double>& band_center_hz) {
  std::string out = "block_index,band_center_hz,ic,itd_us,ild_db,xi_left_db,xi_right_db\n";
  for (const auto& f : frames) {
    if (f.silent) continue;
    for (std::size_t b = 0; b < f.ic.size(); ++b) {
      out += std::to_string(f.block_index) + ',' + detail::fmt(band_center_hz[b]) + ',' +
             detail::fmt(f.ic[b]) + ',' + detail::fmt(f.itd_s[b] * 1e6) + ',' +
             detail::fmt(f.ild_db[b]) + ',' + detail::fmt(f.xi_left_db[b]) + ',' +
             detail::fmt(f.xi_right_db[b]) + '\n';
    }
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw DataError("failed writing " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace grainfield
