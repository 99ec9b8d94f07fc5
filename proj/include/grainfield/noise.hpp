#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "grainfield/audio_buffer.hpp"
#include "grainfield/fft.hpp"
#include "grainfield/random.hpp"

namespace grainfield {

inline constexpr double kDefaultRms = 0.1;  // -20 dBFS
inline constexpr double kPinkLowHz = 20.0;

// Pink noise by spectral shaping: complex Gaussian bins scaled by 1/sqrt(f)
// from kPinkLowHz up to Nyquist, zero below, inverse transform, RMS set to
// `target_rms`. The transform length is the next power of two; the first n
// samples are kept.
template <std::floating_point Sample = float>
BasicAudioBuffer<Sample> generate_pink_noise_samples(std::size_t n, int sample_rate,
                                                     std::uint64_t seed,
                                                     double target_rms = kDefaultRms) {
  if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
  if (n == 0) throw ParameterError("pink noise needs at least one sample");

  const std::size_t nfft = next_pow2(std::max<std::size_t>(n, 2));
  RealFft fft(nfft);
  ComplexArray spec(fft.bins());
  RealArray time(nfft);

  Rng rng(seed);
  const double df = static_cast<double>(sample_rate) / static_cast<double>(nfft);
  for (std::size_t k = 1; k < fft.bins(); ++k) {
    const double f = df * static_cast<double>(k);
    const double scale = f < kPinkLowHz ? 0.0 : 1.0 / std::sqrt(f);
    const double re = rng.normal();
    const double im = rng.normal();
    spec[k] = (k == nfft / 2) ? Complex(re * scale, 0.0) : Complex(re, im) * scale;
  }
  fft.inverse(spec, time);

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += time[i] * time[i];
  const double current = std::sqrt(acc / static_cast<double>(n));
  const double gain = current > 0.0 ? target_rms / current : 0.0;

  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<Sample>(time[i] * gain);
  return BasicAudioBuffer<Sample>::mono(std::move(out), sample_rate);
}

template <std::floating_point Sample = float>
BasicAudioBuffer<Sample> generate_pink_noise(double duration_s, int sample_rate,
                                             std::uint64_t seed,
                                             double target_rms = kDefaultRms) {
  if (!(duration_s > 0.0)) throw ParameterError("pink noise duration must be positive");
  if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
  const std::size_t n = to_samples(duration_s, sample_rate);
  if (n == 0) throw ParameterError("pink noise duration is shorter than one sample");
  return generate_pink_noise_samples<Sample>(n, sample_rate, seed, target_rms);
}

}  // namespace grainfield
