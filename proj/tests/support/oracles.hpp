#pragma once

// Reference implementations used to check the library. They are written
// independently of the library code paths (no shared FFT, ranking or
// geometry helpers) and favour clarity over speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

// Full linear convolution, direct sum.
inline std::vector<double> dense_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  }
  return y;
}

// Iterative radix-2 complex FFT (n must be a power of two).
inline void fft_inplace(std::vector<cd>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const cd wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// One-sided Welch PSD (Hann segments, 50 % overlap); returns density per bin.
inline std::vector<double> welch_psd(const std::vector<double>& x, double sample_rate,
                                     std::size_t nfft) {
  std::vector<double> win(nfft);
  double wpow = 0.0;
  for (std::size_t i = 0; i < nfft; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / nfft);
    wpow += win[i] * win[i];
  }
  std::vector<double> psd(nfft / 2 + 1, 0.0);
  std::size_t segments = 0;
  std::vector<cd> buf(nfft);
  for (std::size_t start = 0; start + nfft <= x.size(); start += nfft / 2) {
    for (std::size_t i = 0; i < nfft; ++i) buf[i] = x[start + i] * win[i];
    fft_inplace(buf);
    for (std::size_t k = 0; k < psd.size(); ++k) psd[k] += std::norm(buf[k]);
    ++segments;
  }
  for (double& v : psd) v /= static_cast<double>(segments) * wpow * sample_rate;
  return psd;
}

// Mean PSD density over [lo, hi).
inline double band_density(const std::vector<double>& psd, double sample_rate, std::size_t nfft,
                           double lo, double hi) {
  const double df = sample_rate / static_cast<double>(nfft);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < psd.size(); ++k) {
    const double f = k * df;
    if (f >= lo && f < hi) {
      acc += psd[k];
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}

// |H(f)| of a discrete impulse response by direct DTFT evaluation, in dB.
inline double dtft_magnitude_db(const std::vector<double>& h, double f, double sample_rate) {
  cd acc(0.0, 0.0);
  const double w = 2.0 * std::numbers::pi * f / sample_rate;
  for (std::size_t n = 0; n < h.size(); ++n) acc += h[n] * std::polar(1.0, -w * static_cast<double>(n));
  return 20.0 * std::log10(std::abs(acc));
}

inline double butterworth_db(double f, double fc, int order) {
  return -10.0 * std::log10(1.0 + std::pow(f / fc, 2.0 * order));
}

// Angle between two directions via the vector cross/dot form.
inline double angle_rad(double az1_deg, double el1_deg, double az2_deg, double el2_deg) {
  auto vec = [](double az, double el) {
    const double a = az * std::numbers::pi / 180.0, e = el * std::numbers::pi / 180.0;
    return std::array<double, 3>{std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e)};
  };
  const auto u = vec(az1_deg, el1_deg), v = vec(az2_deg, el2_deg);
  const std::array<double, 3> c = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                                   u[0] * v[1] - u[1] * v[0]};
  const double cross = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::atan2(cross, dot);
}

// Trapezoidal mean of f over [0, 1] with n intervals.
template <typename F>
double trapezoid_mean(F f, std::size_t n) {
  double acc = 0.5 * (f(0.0) + f(1.0));
  for (std::size_t i = 1; i < n; ++i) acc += f(static_cast<double>(i) / static_cast<double>(n));
  return acc / static_cast<double>(n);
}

struct SignFlipP {
  double greater;  // P(W+ >= observed)
  double less;     // P(W+ <= observed)
  double two_sided;
};

// Exhaustive sign-flip distribution of the signed-rank statistic. Ranks are
// assigned by counting (average rank for equal magnitudes).
inline SignFlipP wilcoxon_sign_flip(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++below;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = static_cast<double>(below) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) observed += rank[i];
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  std::uint64_t ge = 0, le = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) w += rank[i];
    }
    if (w >= observed - 1e-9) ++ge;
    if (w <= observed + 1e-9) ++le;
  }
  SignFlipP p;
  p.greater = static_cast<double>(ge) / static_cast<double>(total);
  p.less = static_cast<double>(le) / static_cast<double>(total);
  p.two_sided = std::min(1.0, 2.0 * std::min(p.greater, p.less));
  return p;
}

// Holm adjustment written directly from its definition:
// p_adj(i) = max over j with p_j <= p_i of min(1, (m - rank_j + 1) p_j).
inline std::vector<double> holm(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> rank(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] < p[i] || (p[j] == p[i] && j < i)) ++r;
    }
    rank[i] = r;  // 0-based position in ascending order
  }
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (rank[j] <= rank[i]) {
        best = std::max(best, std::min(1.0, static_cast<double>(m - rank[j]) * p[j]));
      }
    }
    out[i] = best;
  }
  return out;
}

}  // namespace oracle
