#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "grainfield/errors.hpp"

namespace grainfield {

inline constexpr int kDefaultSampleRate = 48000;

// Planar multichannel signal with a fixed sample rate. Every channel has the
// same number of frames. `Sample` is the storage precision; processing that
// needs headroom accumulates in double and casts on construction.
template <std::floating_point Sample>
class BasicAudioBuffer {
 public:
  using value_type = Sample;

  BasicAudioBuffer() = default;

  BasicAudioBuffer(std::size_t channels, std::size_t frames, int sample_rate)
      : sample_rate_(sample_rate),
        channels_(channels, std::vector<Sample>(frames, Sample{0})) {
    if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
    if (channels == 0) throw ParameterError("buffer needs at least one channel");
  }

  BasicAudioBuffer(std::vector<std::vector<Sample>> channels, int sample_rate)
      : sample_rate_(sample_rate), channels_(std::move(channels)) {
    if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
    if (channels_.empty()) throw ParameterError("buffer needs at least one channel");
    for (const auto& ch : channels_) {
      if (ch.size() != channels_.front().size()) {
        throw ParameterError("all channels must have the same length");
      }
    }
  }

  static BasicAudioBuffer mono(std::vector<Sample> samples, int sample_rate) {
    std::vector<std::vector<Sample>> chans;
    chans.push_back(std::move(samples));
    return BasicAudioBuffer(std::move(chans), sample_rate);
  }

  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t channels() const noexcept { return channels_.size(); }
  std::size_t frames() const noexcept {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  double duration() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(frames()) / sample_rate_ : 0.0;
  }
  bool empty() const noexcept { return frames() == 0; }

  std::span<const Sample> channel(std::size_t i) const { return channels_.at(i); }
  std::span<Sample> channel(std::size_t i) { return channels_.at(i); }

  const std::vector<std::vector<Sample>>& data() const noexcept { return channels_; }

  template <std::floating_point Other>
  BasicAudioBuffer<Other> as() const {
    std::vector<std::vector<Other>> out;
    out.reserve(channels_.size());
    for (const auto& ch : channels_) out.emplace_back(ch.begin(), ch.end());
    return BasicAudioBuffer<Other>(std::move(out), sample_rate_);
  }

  bool operator==(const BasicAudioBuffer&) const = default;

 private:
  int sample_rate_ = kDefaultSampleRate;
  std::vector<std::vector<Sample>> channels_;
};

using AudioBuffer = BasicAudioBuffer<float>;

// Seconds to whole samples, rounding half up.
inline std::size_t to_samples(double seconds, int sample_rate) {
  const double s = std::floor(seconds * sample_rate + 0.5);
  return s <= 0.0 ? 0 : static_cast<std::size_t>(s);
}

template <std::floating_point Sample>
double mean_square(std::span<const Sample> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (Sample v : x) acc += static_cast<double>(v) * v;
  return acc / static_cast<double>(x.size());
}

// RMS over all channels and frames together.
template <std::floating_point Sample>
double rms(const BasicAudioBuffer<Sample>& buf) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < buf.channels(); ++c) {
    for (Sample v : buf.channel(c)) acc += static_cast<double>(v) * v;
    n += buf.frames();
  }
  return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace grainfield
