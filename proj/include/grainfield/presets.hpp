#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grainfield/filter.hpp"
#include "grainfield/grain.hpp"
#include "grainfield/hrir.hpp"
#include "grainfield/layout.hpp"
#include "grainfield/noise.hpp"
#include "grainfield/render.hpp"
#include "grainfield/wav.hpp"

namespace grainfield {

inline constexpr double kPresetSourceSeconds = 10.0;

struct SourceSpec {
  enum class Kind { Pink, File };
  Kind kind = Kind::Pink;
  std::string path;            // File: resolved against the sample directory
  std::uint64_t seed = 1;      // Pink: generator seed
  double duration_s = kPresetSourceSeconds;  // Pink: buffer length N

  bool operator==(const SourceSpec&) const = default;
};

struct StimulusCondition {
  std::string id;
  std::string trial;
  SourceSpec source;
  std::optional<FilterSpec> lowpass;
  SynthesisParams params;
  std::string subset;

  double duration_s() const { return params.duration_s; }
  bool operator==(const StimulusCondition&) const = default;
};

// Sample files referenced by the presets; supplied by the user, never bundled.
inline constexpr const char* kVocalSample = "sqam_track48.wav";
inline constexpr const char* kConcreteSample = "concret_ph.wav";

namespace detail {

inline SynthesisParams preset_params(double dt_ms, double len_ms) {
  SynthesisParams p;
  p.delta_t_s = dt_ms / 1000.0;
  p.grain_len_s = len_ms / 1000.0;
  p.seed_range_s = 5.0;
  p.jitter_frac = 0.01;
  p.window = WindowKind::Hann;
  p.duration_s = 2.0;
  p.rng_seed = 1;
  return p;
}

inline std::string ms_label(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", ms);
  std::string s = buf;
  for (auto& ch : s) {
    if (ch == '.') ch = 'p';
  }
  return s;
}

inline SourceSpec file_source(const char* path) {
  SourceSpec s;
  s.kind = SourceSpec::Kind::File;
  s.path = path;
  return s;
}

inline FilterSpec preset_lowpass() { return FilterSpec{FilterKind::ButterworthLowpass, 12, 1800.0}; }

}  // namespace detail

// Experiment I. Trials 1-4: delta_t in {100, 20, 5, 1} ms x {L1 (2D), L1L2L3
// (3D)} for pink noise and a vocal sample at L = 0.5 ms and 250 ms. Trial 5:
// {SP, QP, L1, L1L2L3} x {broadband, 1.8 kHz lowpass} at L = 250 ms, 1 ms.
inline std::vector<StimulusCondition> preset_experiment1() {
  std::vector<StimulusCondition> out;
  struct Trial {
    const char* id;
    SourceSpec source;
    double len_ms;
  };
  const Trial trials[] = {{"exp1.t1", SourceSpec{}, 0.5},
                          {"exp1.t2", SourceSpec{}, 250.0},
                          {"exp1.t3", detail::file_source(kVocalSample), 0.5},
                          {"exp1.t4", detail::file_source(kVocalSample), 250.0}};
  for (const auto& t : trials) {
    for (const char* subset : {"L1", "L1L2L3"}) {
      for (double dt : {100.0, 20.0, 5.0, 1.0}) {
        StimulusCondition c;
        c.trial = t.id;
        c.id = std::string(t.id) + "." + (std::string(subset) == "L1" ? "2D" : "3D") + ".dt" +
               detail::ms_label(dt);
        c.source = t.source;
        c.params = detail::preset_params(dt, t.len_ms);
        c.subset = subset;
        out.push_back(c);
      }
    }
  }
  for (const char* subset : {"SP", "QP", "L1", "L1L2L3"}) {
    for (bool lp : {false, true}) {
      StimulusCondition c;
      c.trial = "exp1.t5";
      c.id = std::string("exp1.t5.") + subset + (lp ? ".lp" : ".bb");
      c.params = detail::preset_params(1.0, 250.0);
      c.subset = subset;
      if (lp) c.lowpass = detail::preset_lowpass();
      out.push_back(c);
    }
  }
  return out;
}

// Experiment II at L = 250 ms, delta_t = 5 ms, for pink noise and a concrete
// music sample. IIa: eight subsets, broadband. IIb: L1, L2L3 and L3 broadband
// and lowpass, plus the SP and ZEN anchors.
inline std::vector<StimulusCondition> preset_experiment2() {
  std::vector<StimulusCondition> out;
  const std::pair<const char*, SourceSpec> sources[] = {
      {"pink", SourceSpec{}}, {"concret", detail::file_source(kConcreteSample)}};
  for (const auto& [tag, src] : sources) {
    for (const char* subset : {"L1", "L2", "L3", "L1L2", "L2L3", "L1L2L3", "SP", "ZEN"}) {
      StimulusCondition c;
      c.trial = "exp2.iia";
      c.id = std::string("exp2.iia.") + tag + "." + subset;
      c.source = src;
      c.params = detail::preset_params(5.0, 250.0);
      c.subset = subset;
      out.push_back(c);
    }
  }
  for (const auto& [tag, src] : sources) {
    for (const char* subset : {"L1", "L2L3", "L3"}) {
      for (bool lp : {false, true}) {
        StimulusCondition c;
        c.trial = "exp2.iib";
        c.id = std::string("exp2.iib.") + tag + "." + subset + (lp ? ".lp" : ".bb");
        c.source = src;
        c.params = detail::preset_params(5.0, 250.0);
        c.subset = subset;
        if (lp) c.lowpass = detail::preset_lowpass();
        out.push_back(c);
      }
    }
    for (const char* subset : {"SP", "ZEN"}) {
      StimulusCondition c;
      c.trial = "exp2.iib";
      c.id = std::string("exp2.iib.") + tag + "." + subset + ".bb";
      c.source = src;
      c.params = detail::preset_params(5.0, 250.0);
      c.subset = subset;
      out.push_back(c);
    }
  }
  return out;
}

inline const std::vector<std::string>& preset_trial_ids() {
  static const std::vector<std::string> ids = {"exp1.t1", "exp1.t2", "exp1.t3", "exp1.t4",
                                               "exp1.t5", "exp2.iia", "exp2.iib"};
  return ids;
}

// All conditions grouped by trial id.
inline std::map<std::string, std::vector<StimulusCondition>> preset_bundles() {
  std::map<std::string, std::vector<StimulusCondition>> out;
  for (auto& c : preset_experiment1()) out[c.trial].push_back(c);
  for (auto& c : preset_experiment2()) out[c.trial].push_back(c);
  return out;
}

inline std::vector<StimulusCondition> preset_trial(const std::string& id) {
  auto bundles = preset_bundles();
  auto it = bundles.find(id);
  if (it == bundles.end()) throw ParameterError("unknown preset trial '" + id + "'");
  return it->second;
}

inline nlohmann::json to_json(const SourceSpec& s) {
  if (s.kind == SourceSpec::Kind::Pink) {
    return {{"kind", "pink"}, {"seed", s.seed}, {"duration_s", s.duration_s}};
  }
  return {{"kind", "file"}, {"path", s.path}};
}

inline SourceSpec source_spec_from_json(const nlohmann::json& j) {
  SourceSpec s;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "pink") {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.duration_s = j.at("duration_s").get<double>();
  } else if (kind == "file") {
    s.kind = SourceSpec::Kind::File;
    s.path = j.at("path").get<std::string>();
  } else {
    throw ParameterError("unknown source kind '" + kind + "'");
  }
  return s;
}

inline nlohmann::json to_json(const FilterSpec& f) {
  return {{"kind", "butterworth-lowpass"}, {"order", f.order}, {"cutoff_hz", f.cutoff_hz}};
}

inline FilterSpec filter_spec_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() != "butterworth-lowpass") {
    throw ParameterError("unknown filter kind '" + j.at("kind").get<std::string>() + "'");
  }
  return FilterSpec{FilterKind::ButterworthLowpass, j.at("order").get<int>(),
                    j.at("cutoff_hz").get<double>()};
}

inline nlohmann::json to_json(const StimulusCondition& c) {
  return {{"id", c.id},
          {"trial", c.trial},
          {"source", to_json(c.source)},
          {"lowpass", c.lowpass ? to_json(*c.lowpass) : nlohmann::json(nullptr)},
          {"params", to_json(c.params)},
          {"subset", c.subset}};
}

inline StimulusCondition stimulus_condition_from_json(const nlohmann::json& j) {
  StimulusCondition c;
  c.id = j.at("id").get<std::string>();
  c.trial = j.at("trial").get<std::string>();
  c.source = source_spec_from_json(j.at("source"));
  if (j.contains("lowpass") && !j["lowpass"].is_null()) {
    c.lowpass = filter_spec_from_json(j["lowpass"]);
  }
  c.params = synthesis_params_from_json(j.at("params"));
  c.subset = j.at("subset").get<std::string>();
  return c;
}

// {"<trial id>": [condition, ...], ...}; ids must be unique within a trial.
inline nlohmann::json bundles_to_json(
    const std::map<std::string, std::vector<StimulusCondition>>& bundles) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [trial, conds] : bundles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : conds) arr.push_back(to_json(c));
    out[trial] = arr;
  }
  return out;
}

inline std::map<std::string, std::vector<StimulusCondition>> bundles_from_json(
    const nlohmann::json& j) {
  std::map<std::string, std::vector<StimulusCondition>> out;
  for (const auto& [trial, arr] : j.items()) {
    std::set<std::string> ids;
    for (const auto& item : arr) {
      auto c = stimulus_condition_from_json(item);
      if (!ids.insert(c.id).second) {
        throw DataError("duplicate condition id '" + c.id + "' in trial " + trial);
      }
      out[trial].push_back(std::move(c));
    }
  }
  return out;
}

// Mono source buffer of a condition, lowpass applied when requested.
// Multichannel sample files are averaged to mono.
inline AudioBuffer load_condition_source(const StimulusCondition& c,
                                         const std::filesystem::path& sample_dir = {},
                                         int sample_rate = kDefaultSampleRate) {
  AudioBuffer src;
  if (c.source.kind == SourceSpec::Kind::Pink) {
    src = generate_pink_noise(c.source.duration_s, sample_rate, c.source.seed);
  } else {
    const auto path = sample_dir.empty() ? std::filesystem::path(c.source.path)
                                         : sample_dir / c.source.path;
    const auto file = read_wav(path);
    if (file.sample_rate() != sample_rate) {
      throw ParameterError(path.string() + ": sample rate " + std::to_string(file.sample_rate()) +
                           " Hz, expected " + std::to_string(sample_rate) + " Hz");
    }
    std::vector<float> mono(file.frames(), 0.0f);
    for (std::size_t i = 0; i < file.frames(); ++i) {
      double acc = 0.0;
      for (std::size_t ch = 0; ch < file.channels(); ++ch) acc += file.channel(ch)[i];
      mono[i] = static_cast<float>(acc / static_cast<double>(file.channels()));
    }
    src = AudioBuffer::mono(std::move(mono), sample_rate);
  }
  if (c.lowpass) src = apply_lowpass(src, *c.lowpass);
  return src;
}

// Discrete render (one channel per subset member) or, with `hrirs`, binaural.
inline AudioBuffer render_condition(const StimulusCondition& c, const SpeakerLayout& layout,
                                    const HrirSet* hrirs = nullptr,
                                    const std::filesystem::path& sample_dir = {}) {
  const int sr = hrirs ? hrirs->sample_rate() : kDefaultSampleRate;
  const AudioBuffer src = load_condition_source(c, sample_dir, sr);
  const auto subset = make_subset(c.subset, layout);
  const auto schedule = schedule_grains(c.params, subset);
  return hrirs ? render_binaural(src, schedule, *hrirs) : render_discrete(src, schedule);
}

}  // namespace grainfield
