#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "grainfield/errors.hpp"

namespace grainfield {

// Glasberg-Moore equivalent rectangular bandwidth in Hz.
inline double erb_hz(double f) { return 24.7 * (4.37 * f / 1000.0 + 1.0); }

// ERB-rate (number of ERBs below f).
inline double erb_rate(double f) { return 21.4 * std::log10(4.37 * f / 1000.0 + 1.0); }

inline double erb_rate_to_hz(double e) {
  return (std::pow(10.0, e / 21.4) - 1.0) * 1000.0 / 4.37;
}

struct GammatoneConfig {
  double f_low_hz = 50.0;
  double f_high_hz = 20250.0;  // 50 Hz .. 20.25 kHz at 1/8 ERB gives 320 bands
  double erb_step = 0.125;
  double erb_width = 1.0;  // bandwidth in ERBs at the center frequency

  bool operator==(const GammatoneConfig&) const = default;
};

// Zero-phase magnitude windows on the bins 0..fft_size/2 of a real FFT.
class GammatoneBank {
 public:
  GammatoneBank(int sample_rate, std::size_t fft_size, const GammatoneConfig& cfg = {})
      : sample_rate_(sample_rate), fft_size_(fft_size), config_(cfg) {
    if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
    if (fft_size < 2) throw ParameterError("FFT size must be at least 2");
    const double nyquist = sample_rate / 2.0;
    if (!(cfg.f_low_hz > 0.0 && cfg.f_low_hz < cfg.f_high_hz && cfg.f_high_hz < nyquist)) {
      throw ParameterError("gammatone range must satisfy 0 < f_low < f_high < Nyquist");
    }
    if (!(cfg.erb_step > 0.0) || !(cfg.erb_width > 0.0)) {
      throw ParameterError("ERB step and width must be positive");
    }
    const double e0 = erb_rate(cfg.f_low_hz);
    const double span = erb_rate(cfg.f_high_hz) - e0;
    const auto count = static_cast<std::size_t>(std::floor(span / cfg.erb_step + 1e-9)) + 1;
    const std::size_t bins = fft_size / 2 + 1;
    const double df = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
    centers_.reserve(count);
    windows_.reserve(count);
    for (std::size_t b = 0; b < count; ++b) {
      const double fc = erb_rate_to_hz(e0 + static_cast<double>(b) * cfg.erb_step);
      centers_.push_back(fc);
      std::vector<double> w(bins);
      for (std::size_t k = 0; k < bins; ++k) w[k] = magnitude(fc, static_cast<double>(k) * df);
      windows_.push_back(std::move(w));
    }
  }

  std::size_t size() const noexcept { return centers_.size(); }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t fft_size() const noexcept { return fft_size_; }
  const GammatoneConfig& config() const noexcept { return config_; }
  const std::vector<double>& centers() const noexcept { return centers_; }
  double center(std::size_t b) const { return centers_.at(b); }
  const std::vector<double>& window(std::size_t b) const { return windows_.at(b); }

  // Magnitude of a 4th-order gammatone at frequency f, peak 1 at fc.
  double magnitude(double fc, double f) const {
    const double bw = 1.019 * erb_hz(fc) * config_.erb_width;
    const double x = (f - fc) / bw;
    const double d = 1.0 + x * x;
    return 1.0 / (d * d);
  }

 private:
  int sample_rate_;
  std::size_t fft_size_;
  GammatoneConfig config_;
  std::vector<double> centers_;
  std::vector<std::vector<double>> windows_;
};

inline GammatoneBank build_gammatone_bank(int sample_rate, std::size_t fft_size,
                                          const GammatoneConfig& cfg = {}) {
  return GammatoneBank(sample_rate, fft_size, cfg);
}

}  // namespace grainfield
