#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "grainfield/fft.hpp"
#include "grainfield/hrir.hpp"

namespace grainfield {

// Parametric HRIR model used when no measured dataset is at hand: a rigid
// spherical head (one-pole/one-zero head shadow and Woodworth-style delay per
// ear) plus an elevation-dependent resonance near 8 kHz applied to both ears.
// All directions of a set share one gain so that the horizontal diffuse-field
// average ear energy is one.
struct SphericalHeadModel {
  double head_radius_m = 0.0875;
  double speed_of_sound = 343.0;
  double alpha_min = 0.1;
  double theta_min_deg = 150.0;
  double elevation_peak_hz = 8000.0;
  double elevation_peak_db = 12.0;  // at the zenith; scales with sin(elevation)
  double elevation_peak_q = 2.0;
  std::size_t ir_length = 256;
  std::size_t latency_samples = 32;
};

namespace detail {

inline std::complex<double> head_shadow(const SphericalHeadModel& m, double f, double theta) {
  const double w0 = m.speed_of_sound / m.head_radius_m;
  const double alpha = (1.0 + m.alpha_min / 2.0) +
                       (1.0 - m.alpha_min / 2.0) *
                           std::cos(theta / deg_to_rad(m.theta_min_deg) * std::numbers::pi);
  const std::complex<double> jw(0.0, 2.0 * std::numbers::pi * f);
  return (1.0 + alpha * jw / (2.0 * w0)) / (1.0 + jw / (2.0 * w0));
}

// Extra path length to an ear at angle theta from its axis, offset so the
// ipsilateral extreme is zero.
inline double ear_delay_s(const SphericalHeadModel& m, double theta) {
  const double a_c = m.head_radius_m / m.speed_of_sound;
  const double t = theta < std::numbers::pi / 2 ? -a_c * std::cos(theta)
                                                 : a_c * (theta - std::numbers::pi / 2);
  return t + a_c;
}

inline std::complex<double> elevation_peak(const SphericalHeadModel& m, double f, double el_deg) {
  const double gain_db = m.elevation_peak_db * std::max(0.0, std::sin(deg_to_rad(el_deg)));
  if (gain_db == 0.0) return 1.0;
  const double A = std::pow(10.0, gain_db / 40.0);
  const double wc = 2.0 * std::numbers::pi * m.elevation_peak_hz;
  const std::complex<double> s(0.0, 2.0 * std::numbers::pi * f);
  const double q = m.elevation_peak_q;
  return (s * s + s * (A * wc / q) + wc * wc) / (s * s + s * (wc / (A * q)) + wc * wc);
}

inline std::vector<double> design_ear(const SphericalHeadModel& m, int sample_rate,
                                      double theta, double el_deg) {
  const std::size_t n = next_pow2(4 * m.ir_length);
  RealFft fft(n);
  ComplexArray spec(fft.bins());
  RealArray time(n);
  const double nyq = 0.5 * sample_rate;
  const double delay =
      static_cast<double>(m.latency_samples) / sample_rate + ear_delay_s(m, theta);
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    // Raised-cosine taper over the top 15 % of the band limits delay ringing.
    double taper = 1.0;
    if (f > 0.85 * nyq) taper = 0.5 * (1.0 + std::cos(std::numbers::pi * (f - 0.85 * nyq) / (0.15 * nyq)));
    std::complex<double> h = head_shadow(m, f, theta) * elevation_peak(m, f, el_deg) * taper;
    h *= std::polar(1.0, -2.0 * std::numbers::pi * f * delay);
    if (k == n / 2) h = h.real();
    spec[k] = h / static_cast<double>(n);
  }
  fft.inverse(spec, time);
  std::vector<double> ir(time.data(), time.data() + m.ir_length);
  const std::size_t fade = m.ir_length / 8;
  for (std::size_t i = 0; i < fade; ++i) {
    const double g = 0.5 * (1.0 + std::cos(std::numbers::pi * (i + 1) / (fade + 1)));
    ir[m.ir_length - fade + i] *= g;
  }
  return ir;
}

}  // namespace detail

// Unnormalized HRIR pair for one direction.
inline HrirEntry synthesize_hrir(const SphericalHeadModel& m, const Direction& dir,
                                 int sample_rate) {
  const auto v = dir.unit_vector();
  // Left ear axis is +y.
  const double theta_left = std::acos(std::clamp(v[1], -1.0, 1.0));
  const double theta_right = std::acos(std::clamp(-v[1], -1.0, 1.0));
  HrirEntry e;
  e.direction = dir;
  e.left = detail::design_ear(m, sample_rate, theta_left, dir.elevation_deg());
  e.right = detail::design_ear(m, sample_rate, theta_right, dir.elevation_deg());
  return e;
}

// Gain that makes the mean ear energy over a 1-degree horizontal ring one.
inline double diffuse_field_gain(const SphericalHeadModel& m, int sample_rate) {
  double acc = 0.0;
  for (int az = 0; az < 360; ++az) {
    const auto e = synthesize_hrir(m, Direction(az, 0.0), sample_rate);
    for (double v : e.left) acc += v * v;
    for (double v : e.right) acc += v * v;
  }
  return 1.0 / std::sqrt(acc / 720.0);
}

inline HrirSet synthesize_hrir_set(const SphericalHeadModel& m,
                                   const std::vector<Direction>& directions, int sample_rate) {
  const double g = diffuse_field_gain(m, sample_rate);
  std::vector<HrirEntry> entries;
  entries.reserve(directions.size());
  for (const auto& d : directions) {
    auto e = synthesize_hrir(m, d, sample_rate);
    for (auto& v : e.left) v *= g;
    for (auto& v : e.right) v *= g;
    entries.push_back(std::move(e));
  }
  return HrirSet(std::move(entries), sample_rate);
}

}  // namespace grainfield
