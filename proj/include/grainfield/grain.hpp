#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grainfield/audio_buffer.hpp"
#include "grainfield/layout.hpp"
#include "grainfield/random.hpp"

namespace grainfield {

enum class WindowKind { Hann, Rect };

inline std::string to_string(WindowKind k) { return k == WindowKind::Hann ? "hann" : "rect"; }

inline WindowKind parse_window(const std::string& s) {
  if (s == "hann") return WindowKind::Hann;
  if (s == "rect") return WindowKind::Rect;
  throw ParameterError("unknown window kind '" + s + "' (expected hann or rect)");
}

struct SynthesisParams {
  double delta_t_s = 0.005;   // time between grain onsets
  double grain_len_s = 0.25;  // grain length L
  double seed_range_s = 5.0;  // read offsets drawn from [0, Q]
  double jitter_frac = 0.01;  // onset jitter bound as a fraction of delta_t
  WindowKind window = WindowKind::Hann;
  double duration_s = 2.0;
  std::uint64_t rng_seed = 1;

  // Average number of simultaneously active grains, L / delta_t.
  double overlap() const { return grain_len_s / delta_t_s; }

  void validate() const {
    if (!(delta_t_s > 0.0)) throw ParameterError("delta_t must be positive");
    if (!(grain_len_s > 0.0)) throw ParameterError("grain length must be positive");
    if (!(seed_range_s >= 0.0)) throw ParameterError("seed range must be non-negative");
    if (!(jitter_frac >= 0.0 && jitter_frac <= 1.0)) {
      throw ParameterError("jitter fraction must lie in [0, 1]");
    }
    if (!(duration_s > 0.0)) throw ParameterError("duration must be positive");
  }

  // Checks Q <= N - L against a source of `source_duration_s` seconds.
  void validate_for_source(double source_duration_s) const {
    validate();
    if (seed_range_s + grain_len_s > source_duration_s + 1e-9) {
      throw ParameterError("source buffer too short: need N >= Q + L (" +
                           std::to_string(seed_range_s + grain_len_s) + " s), have " +
                           std::to_string(source_duration_s) + " s");
    }
  }

  bool operator==(const SynthesisParams&) const = default;
};

struct GrainEvent {
  double onset_s = 0.0;      // tau_l
  double seed_s = 0.0;       // q_l, read offset into the source
  std::size_t target = 0;    // index into the schedule's assignment subset
  std::size_t grid_index = 0;  // l, the unjittered grid slot

  bool operator==(const GrainEvent&) const = default;
};

struct GrainSchedule {
  std::vector<GrainEvent> events;
  SynthesisParams params;
  DirectionSubset assignment;
};

// Window sampled at t = n / sr for n in [0, round(L * sr)); the hann window is
// sin^2(pi n / N) so w(0) = w(L) = 0.
inline std::vector<double> make_window(WindowKind kind, double grain_len_s, int sample_rate) {
  if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
  const std::size_t n = to_samples(grain_len_s, sample_rate);
  if (n < 2) throw ParameterError("grain must span at least two samples");
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      w[i] = s * s;
    }
  }
  return w;
}

inline double window_power(const std::vector<double>& w) {
  double acc = 0.0;
  for (double v : w) acc += v * v;
  return acc / static_cast<double>(w.size());
}

// Overlap and window compensation: sqrt(L / delta_t) * sqrt(mean(w^2)), with
// the mean taken over the sampled window so render and gain cancel exactly.
inline double compensation_gain(const SynthesisParams& p, int sample_rate = kDefaultSampleRate) {
  p.validate();
  const auto w = make_window(p.window, p.grain_len_s, sample_rate);
  return std::sqrt(p.grain_len_s / p.delta_t_s) * std::sqrt(window_power(w));
}

// Periodic onsets l * delta_t for l * delta_t < duration, each jittered
// uniformly within +/- jitter_frac * delta_t and clamped to [0, duration].
// Per event the stream draws jitter, then seed, then target.
inline GrainSchedule schedule_grains(const SynthesisParams& params,
                                     const DirectionSubset& assignment) {
  params.validate();
  if (assignment.empty()) throw ParameterError("grain assignment subset is empty");
  GrainSchedule sched;
  sched.params = params;
  sched.assignment = assignment;

  const auto count =
      static_cast<std::size_t>(std::ceil(params.duration_s / params.delta_t_s - 1e-9));
  sched.events.reserve(count);
  Rng rng(params.rng_seed);
  const double bound = params.jitter_frac * params.delta_t_s;
  for (std::size_t l = 0; l < count; ++l) {
    GrainEvent e;
    e.grid_index = l;
    double onset = static_cast<double>(l) * params.delta_t_s;
    if (bound > 0.0) onset += rng.uniform(-bound, bound);
    e.onset_s = std::clamp(onset, 0.0, params.duration_s);
    e.seed_s = rng.uniform(0.0, params.seed_range_s);
    e.target = static_cast<std::size_t>(rng.below(assignment.size()));
    sched.events.push_back(e);
  }
  std::stable_sort(sched.events.begin(), sched.events.end(),
                   [](const GrainEvent& a, const GrainEvent& b) { return a.onset_s < b.onset_s; });
  return sched;
}

// --- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const SynthesisParams& p) {
  return {{"delta_t_s", p.delta_t_s},     {"grain_len_s", p.grain_len_s},
          {"seed_range_s", p.seed_range_s}, {"jitter_frac", p.jitter_frac},
          {"window", to_string(p.window)}, {"duration_s", p.duration_s},
          {"rng_seed", p.rng_seed}};
}

inline SynthesisParams synthesis_params_from_json(const nlohmann::json& j) {
  SynthesisParams p;
  p.delta_t_s = j.at("delta_t_s").get<double>();
  p.grain_len_s = j.at("grain_len_s").get<double>();
  p.seed_range_s = j.at("seed_range_s").get<double>();
  p.jitter_frac = j.at("jitter_frac").get<double>();
  p.window = parse_window(j.at("window").get<std::string>());
  p.duration_s = j.at("duration_s").get<double>();
  p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return p;
}

inline nlohmann::json to_json(const DirectionSubset& s) {
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    members.push_back({{"label", s.labels[i]},
                       {"az", s.directions[i].azimuth_deg()},
                       {"el", s.directions[i].elevation_deg()}});
  }
  return {{"name", s.name}, {"members", members}};
}

inline DirectionSubset direction_subset_from_json(const nlohmann::json& j) {
  DirectionSubset s;
  s.name = j.at("name").get<std::string>();
  for (const auto& m : j.at("members")) {
    s.labels.push_back(m.at("label").get<std::string>());
    s.directions.emplace_back(m.at("az").get<double>(), m.at("el").get<double>());
  }
  return s;
}

inline nlohmann::json to_json(const GrainSchedule& s) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : s.events) {
    events.push_back({{"onset_s", e.onset_s},
                      {"seed_s", e.seed_s},
                      {"target", e.target},
                      {"grid_index", e.grid_index}});
  }
  return {{"params", to_json(s.params)}, {"assignment", to_json(s.assignment)},
          {"events", events}};
}

inline GrainSchedule grain_schedule_from_json(const nlohmann::json& j) {
  GrainSchedule s;
  s.params = synthesis_params_from_json(j.at("params"));
  s.assignment = direction_subset_from_json(j.at("assignment"));
  for (const auto& e : j.at("events")) {
    GrainEvent ev;
    ev.onset_s = e.at("onset_s").get<double>();
    ev.seed_s = e.at("seed_s").get<double>();
    ev.target = e.at("target").get<std::size_t>();
    ev.grid_index = e.at("grid_index").get<std::size_t>();
    s.events.push_back(ev);
  }
  return s;
}

}  // namespace grainfield
