#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grainfield/audio_buffer.hpp"
#include "grainfield/grain.hpp"
#include "grainfield/parallel.hpp"

namespace grainfield {

struct FirTap {
  double lag_s = 0.0;
  std::size_t channel = 0;
  double coefficient = 1.0;

  bool operator==(const FirTap&) const = default;
};

struct FirTapSet {
  std::vector<FirTap> taps;

  // sqrt(sum h^2); zero for an empty or all-zero set.
  double normalization() const {
    double acc = 0.0;
    for (const auto& t : taps) acc += t.coefficient * t.coefficient;
    return std::sqrt(acc);
  }

  bool operator==(const FirTapSet&) const = default;
};

// Unit window and zero read offset turn every grain into a unit tap at its onset.
inline FirTapSet reduce_schedule_to_fir(const GrainSchedule& schedule) {
  FirTapSet set;
  set.taps.reserve(schedule.events.size());
  for (const auto& e : schedule.events) set.taps.push_back({e.onset_s, e.target, 1.0});
  return set;
}

// y_j(t) = (1/G) sum over taps on j of h * x(t - lag). Lags are rounded to the
// nearest sample (half up). Output length is N + the largest lag.
template <std::floating_point Sample>
BasicAudioBuffer<Sample> apply_sparse_fir(const BasicAudioBuffer<Sample>& source,
                                          const FirTapSet& taps, std::size_t num_channels) {
  if (source.channels() != 1) throw ParameterError("FIR source must be mono");
  if (num_channels == 0) throw ParameterError("FIR output needs at least one channel");
  const int sr = source.sample_rate();
  std::vector<std::vector<std::size_t>> lags(num_channels);
  std::vector<std::vector<double>> coefs(num_channels);
  std::size_t max_lag = 0;
  for (const auto& t : taps.taps) {
    if (t.channel >= num_channels) {
      throw ParameterError("tap channel " + std::to_string(t.channel) + " out of range (" +
                           std::to_string(num_channels) + " channels)");
    }
    if (!std::isfinite(t.lag_s) || t.lag_s < 0.0) {
      throw ParameterError("tap lags must be finite and non-negative");
    }
    const std::size_t lag = to_samples(t.lag_s, sr);
    lags[t.channel].push_back(lag);
    coefs[t.channel].push_back(t.coefficient);
    max_lag = std::max(max_lag, lag);
  }
  const double g = taps.normalization();
  const double inv = g > 0.0 ? 1.0 / g : 0.0;
  const auto x = source.channel(0);
  const std::size_t total = x.size() + max_lag;
  std::vector<std::vector<Sample>> out(num_channels);
  parallel_for(num_channels, [&](std::size_t c) {
    std::vector<double> acc(total, 0.0);
    for (std::size_t k = 0; k < lags[c].size(); ++k) {
      const double h = coefs[c][k] * inv;
      double* dst = acc.data() + lags[c][k];
      for (std::size_t n = 0; n < x.size(); ++n) dst[n] += h * static_cast<double>(x[n]);
    }
    out[c].assign(acc.begin(), acc.end());
  });
  return BasicAudioBuffer<Sample>(std::move(out), sr);
}

inline nlohmann::json to_json(const FirTapSet& set) {
  nlohmann::json taps = nlohmann::json::array();
  for (const auto& t : set.taps) {
    taps.push_back({{"lag_s", t.lag_s}, {"channel", t.channel}, {"h", t.coefficient}});
  }
  return {{"normalization", set.normalization()}, {"taps", taps}};
}

inline FirTapSet fir_tap_set_from_json(const nlohmann::json& j) {
  FirTapSet set;
  for (const auto& t : j.at("taps")) {
    set.taps.push_back({t.at("lag_s").get<double>(), t.at("channel").get<std::size_t>(),
                        t.at("h").get<double>()});
  }
  return set;
}

}  // namespace grainfield
