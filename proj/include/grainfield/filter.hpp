#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "grainfield/audio_buffer.hpp"

namespace grainfield {

enum class FilterKind { ButterworthLowpass };

struct FilterSpec {
  FilterKind kind = FilterKind::ButterworthLowpass;
  int order = 12;
  double cutoff_hz = 1800.0;

  void validate(int sample_rate) const {
    if (order <= 0 || order % 2 != 0) {
      throw ParameterError("filter order must be a positive even number");
    }
    if (!(cutoff_hz > 0.0)) throw ParameterError("filter cutoff must be positive");
    if (cutoff_hz >= 0.5 * sample_rate) {
      throw ParameterError("filter cutoff must be below Nyquist (" +
                           std::to_string(0.5 * sample_rate) + " Hz)");
    }
  }

  bool operator==(const FilterSpec&) const = default;
};

// Butterworth lowpass as a parallel bank of second-order sections obtained by
// impulse invariance from the analog prototype, normalized to unit DC gain.
class ButterworthLowpass {
 public:
  struct Section {
    double b0, b1, a1, a2;
  };

  ButterworthLowpass(const FilterSpec& spec, int sample_rate)
      : spec_(spec), sample_rate_(sample_rate) {
    spec.validate(sample_rate);
    using std::numbers::pi;
    const int n = spec.order;
    const double wc = 2.0 * pi * spec.cutoff_hz;
    const double T = 1.0 / sample_rate;

    std::vector<std::complex<double>> poles(n);
    for (int k = 0; k < n; ++k) {
      const double theta = pi * (2.0 * k + n + 1) / (2.0 * n);
      poles[k] = wc * std::complex<double>(std::cos(theta), std::sin(theta));
    }
    // Pole k pairs with its conjugate n-1-k.
    for (int k = 0; k < n / 2; ++k) {
      std::complex<double> residue = std::pow(wc, n);
      for (int j = 0; j < n; ++j) {
        if (j != k) residue /= (poles[k] - poles[j]);
      }
      const std::complex<double> a = std::exp(poles[k] * T);
      Section s{};
      s.b0 = T * 2.0 * residue.real();
      s.b1 = -T * 2.0 * (residue * std::conj(a)).real();
      s.a1 = -2.0 * a.real();
      s.a2 = std::norm(a);
      sections_.push_back(s);
    }
    // Remove the small DC error left by aliasing.
    const double dc = std::abs(response(0.0));
    for (auto& s : sections_) {
      s.b0 /= dc;
      s.b1 /= dc;
    }
  }

  const std::vector<Section>& sections() const noexcept { return sections_; }
  const FilterSpec& spec() const noexcept { return spec_; }

  std::complex<double> response(double freq_hz) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = 0.0;
    for (const auto& s : sections_) h += (s.b0 + s.b1 * z1) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
  }

  double magnitude_db(double freq_hz) const {
    return 20.0 * std::log10(std::abs(response(freq_hz)));
  }

  // Ideal analog Butterworth magnitude in dB.
  static double analog_magnitude_db(double freq_hz, double cutoff_hz, int order) {
    return -10.0 * std::log10(1.0 + std::pow(freq_hz / cutoff_hz, 2.0 * order));
  }

  template <std::floating_point Sample>
  std::vector<Sample> process(std::span<const Sample> x) const {
    std::vector<double> acc(x.size(), 0.0);
    for (const auto& s : sections_) {
      double z1 = 0.0, z2 = 0.0;  // transposed direct form II state
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double in = x[i];
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = -s.a2 * out;
        acc[i] += out;
      }
    }
    return std::vector<Sample>(acc.begin(), acc.end());
  }

 private:
  FilterSpec spec_;
  int sample_rate_;
  std::vector<Section> sections_;
};

template <std::floating_point Sample>
BasicAudioBuffer<Sample> apply_lowpass(const BasicAudioBuffer<Sample>& buffer,
                                       const FilterSpec& spec) {
  const ButterworthLowpass filter(spec, buffer.sample_rate());
  std::vector<std::vector<Sample>> out;
  out.reserve(buffer.channels());
  for (std::size_t c = 0; c < buffer.channels(); ++c) {
    out.push_back(filter.process(buffer.channel(c)));
  }
  return BasicAudioBuffer<Sample>(std::move(out), buffer.sample_rate());
}

}  // namespace grainfield
