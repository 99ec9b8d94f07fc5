// grainfield command-line tool: render, analyze, reference, presets, stats,
// hrir-synth and replay. Every command that writes a directory also writes the
// config.json that reproduces it via `grainfield replay`.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grainfield.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grainfield;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct HrirChoice {
  std::string manifest;  // path to an HRIR manifest; empty selects the spherical-head model
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HrirChoice, manifest)

struct RenderArgs {
  std::string source = "pink";
  std::uint64_t source_seed = 1;
  double source_dur_s = kPresetSourceSeconds;
  double dt_ms = 5.0;
  double len_ms = 250.0;
  double q_s = 5.0;
  double jitter = 0.01;
  std::string window = "hann";
  double dur_s = 2.0;
  std::uint64_t seed = 1;
  std::string subset = "L1";
  double lowpass_hz = 0.0;
  int lowpass_order = 12;
  bool binaural = false;
  HrirChoice hrir;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RenderArgs, source, source_seed, source_dur_s, dt_ms, len_ms,
                                   q_s, jitter, window, dur_s, seed, subset, lowpass_hz,
                                   lowpass_order, binaural, hrir)

struct AnalyzeArgs {
  std::string input;
  std::string reference;
  double block_ms = kDefaultBlockSeconds * 1000.0;
  double max_lag_ms = kDefaultMaxLagSeconds * 1000.0;
  double f_low_hz = GammatoneConfig{}.f_low_hz;
  double f_high_hz = GammatoneConfig{}.f_high_hz;
  double erb_step = GammatoneConfig{}.erb_step;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AnalyzeArgs, input, reference, block_ms, max_lag_ms, f_low_hz,
                                   f_high_hz, erb_step)

struct ReferenceArgs {
  HrirChoice hrir;
  double dur_s = 5.0;
  std::uint64_t seed = 1;
  double block_ms = kDefaultBlockSeconds * 1000.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReferenceArgs, hrir, dur_s, seed, block_ms)

struct PresetRenderArgs {
  std::string trial;
  bool binaural = false;
  HrirChoice hrir;
  std::string sample_dir;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PresetRenderArgs, trial, binaural, hrir, sample_dir)

struct StatsArgs {
  std::string ratings;
  std::string contrasts;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StatsArgs, ratings, contrasts)

struct HrirSynthArgs {
  std::string set = "all";  // ring360 | cube25 | all
  int sample_rate = kDefaultSampleRate;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HrirSynthArgs, set, sample_rate)

void write_config(const fs::path& out, const std::string& command, const json& args) {
  json doc = {{"tool", "grainfield"}, {"version", kToolVersion}, {"command", command},
              {"args", args}};
  write_text(out / "config.json", doc.dump(2) + "\n");
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw ParameterError("--out is required");
  fs::create_directories(out);
  return fs::path(out);
}

HrirSet resolve_hrirs(const HrirChoice& choice, const std::vector<Direction>& needed,
                      int sample_rate = kDefaultSampleRate) {
  if (!choice.manifest.empty()) return load_hrir_manifest(choice.manifest);
  return synthesize_hrir_set(SphericalHeadModel{}, needed, sample_rate);
}

std::vector<Direction> ring360() {
  return make_subset("RING360", builtin_layout_cube25()).directions;
}

StimulusCondition condition_from(const RenderArgs& a) {
  StimulusCondition c;
  c.id = "render";
  c.trial = "cli";
  if (a.source == "pink") {
    c.source.kind = SourceSpec::Kind::Pink;
    c.source.seed = a.source_seed;
    c.source.duration_s = a.source_dur_s;
  } else {
    c.source.kind = SourceSpec::Kind::File;
    c.source.path = a.source;
  }
  if (a.lowpass_hz > 0.0) {
    c.lowpass = FilterSpec{FilterKind::ButterworthLowpass, a.lowpass_order, a.lowpass_hz};
  }
  c.params.delta_t_s = a.dt_ms / 1000.0;
  c.params.grain_len_s = a.len_ms / 1000.0;
  c.params.seed_range_s = a.q_s;
  c.params.jitter_frac = a.jitter;
  c.params.window = parse_window(a.window);
  c.params.duration_s = a.dur_s;
  c.params.rng_seed = a.seed;
  c.subset = a.subset;
  return c;
}

void run_render(const RenderArgs& a, const fs::path& out) {
  const auto layout = builtin_layout_cube25();
  const auto cond = condition_from(a);
  const auto subset = make_subset(cond.subset, layout);
  std::optional<HrirSet> hrirs;
  if (a.binaural) hrirs = resolve_hrirs(a.hrir, subset.directions);
  const int sr = hrirs ? hrirs->sample_rate() : kDefaultSampleRate;
  const auto source = load_condition_source(cond, {}, sr);
  const auto schedule = schedule_grains(cond.params, subset);
  const auto rendered =
      hrirs ? render_binaural(source, schedule, *hrirs) : render_discrete(source, schedule);
  write_wav(rendered, out / "render.wav");
  write_text(out / "schedule.json", to_json(schedule).dump(1) + "\n");
  write_config(out, "render", a);
  std::printf("wrote %s (%zu channels, %zu frames)\n", (out / "render.wav").c_str(),
              rendered.channels(), rendered.frames());
}

void run_analyze(const AnalyzeArgs& a, const fs::path& out) {
  if (a.input.empty()) throw ParameterError("--in is required");
  const auto signal = read_wav(a.input);
  if (signal.channels() != 2) {
    throw ParameterError("analyze needs a stereo WAV, got " + std::to_string(signal.channels()) +
                         " channel(s)");
  }
  GammatoneConfig cfg;
  cfg.f_low_hz = a.f_low_hz;
  cfg.f_high_hz = a.f_high_hz;
  cfg.erb_step = a.erb_step;
  const double block_s = a.block_ms / 1000.0;
  const auto bank = make_cue_bank(signal.sample_rate(), block_s, cfg);
  const auto frames = analyze_signal(signal, bank, block_s, a.max_lag_ms / 1000.0);
  std::optional<CueSummary> reference;
  if (!a.reference.empty()) reference = summary_from_csv(read_text(a.reference));
  const auto summary = summarize(frames, bank, reference ? &*reference : nullptr);
  write_text(out / "frames.csv", frames_to_csv(frames, bank.centers()));
  write_text(out / "summary.csv", summary_to_csv(summary));
  write_config(out, "analyze", a);
  std::printf("analyzed %zu blocks (%zu voiced) in %zu bands\n", frames.size(), summary.frames,
              bank.size());
}

void run_reference(const ReferenceArgs& a, const fs::path& out) {
  const auto hrirs = resolve_hrirs(a.hrir, ring360());
  const auto ref = simulate_diffuse_reference(hrirs, a.dur_s, a.seed);
  const double block_s = a.block_ms / 1000.0;
  const auto bank = make_cue_bank(ref.sample_rate(), block_s);
  const auto summary = summarize(analyze_signal(ref, bank, block_s), bank);
  write_wav(ref, out / "reference.wav");
  write_text(out / "summary.csv", summary_to_csv(summary));
  write_config(out, "reference", a);
  std::printf("wrote %s (%.3f s)\n", (out / "reference.wav").c_str(), ref.duration());
}

void run_presets_render(const PresetRenderArgs& a, const fs::path& out) {
  const auto layout = builtin_layout_cube25();
  const auto conditions = preset_trial(a.trial);
  std::optional<HrirSet> shared;
  if (a.binaural && !a.hrir.manifest.empty()) shared = load_hrir_manifest(a.hrir.manifest);
  json listing = json::array();
  for (const auto& c : conditions) {
    std::optional<HrirSet> own;
    const HrirSet* hrirs = nullptr;
    if (a.binaural) {
      if (shared) {
        hrirs = &*shared;
      } else {
        own = resolve_hrirs(a.hrir, make_subset(c.subset, layout).directions);
        hrirs = &*own;
      }
    }
    const auto rendered = render_condition(c, layout, hrirs, a.sample_dir);
    write_wav(rendered, out / (c.id + ".wav"));
    listing.push_back(to_json(c));
    std::printf("%s: %zu channels\n", c.id.c_str(), rendered.channels());
  }
  write_text(out / "conditions.json", listing.dump(2) + "\n");
  write_config(out, "presets-render", a);
}

void run_stats(const StatsArgs& a, const std::optional<fs::path>& out) {
  if (a.ratings.empty() || a.contrasts.empty()) {
    throw ParameterError("--ratings and --contrasts are required");
  }
  const auto table = rating_table_from_csv(read_text(a.ratings));
  json doc;
  try {
    doc = json::parse(read_text(a.contrasts));
  } catch (const json::parse_error& e) {
    throw DataError(a.contrasts + ": " + e.what());
  }
  const auto csv = contrast_results_to_csv(reanalyze_ratings(table, contrast_families_from_json(doc)));
  if (out) {
    write_text(*out / "pvalues.csv", csv);
    write_config(*out, "stats", a);
  } else {
    std::cout << csv;
  }
}

void run_hrir_synth(const HrirSynthArgs& a, const fs::path& out) {
  std::vector<Direction> dirs;
  const auto layout = builtin_layout_cube25();
  auto add = [&](const std::vector<Direction>& more) {
    for (const auto& d : more) {
      if (std::find(dirs.begin(), dirs.end(), d) == dirs.end()) dirs.push_back(d);
    }
  };
  if (a.set == "ring360" || a.set == "all") add(ring360());
  if (a.set == "cube25" || a.set == "all") add(layout.directions());
  if (a.set == "all") {
    for (const char* s : {"SP", "QP", "ZEN"}) add(make_subset(s, layout).directions);
  }
  if (dirs.empty()) throw ParameterError("unknown HRIR set '" + a.set + "' (ring360, cube25, all)");
  const auto set = synthesize_hrir_set(SphericalHeadModel{}, dirs, a.sample_rate);
  write_hrir_manifest(set, out / "manifest.json");
  write_config(out, "hrir-synth", a);
  std::printf("wrote %zu HRIR pairs to %s\n", set.size(), (out / "manifest.json").c_str());
}

void run_replay(const std::string& config_path, const fs::path& out) {
  json doc;
  try {
    doc = json::parse(read_text(config_path));
  } catch (const json::parse_error& e) {
    throw DataError(config_path + ": " + e.what());
  }
  const auto command = doc.at("command").get<std::string>();
  const auto& args = doc.at("args");
  if (command == "render") return run_render(args.get<RenderArgs>(), out);
  if (command == "analyze") return run_analyze(args.get<AnalyzeArgs>(), out);
  if (command == "reference") return run_reference(args.get<ReferenceArgs>(), out);
  if (command == "presets-render") return run_presets_render(args.get<PresetRenderArgs>(), out);
  if (command == "stats") return run_stats(args.get<StatsArgs>(), out);
  if (command == "hrir-synth") return run_hrir_synth(args.get<HrirSynthArgs>(), out);
  throw DataError(config_path + ": unknown command '" + command + "'");
}

void add_hrir_option(CLI::App* cmd, HrirChoice& choice) {
  cmd->add_option("--hrir", choice.manifest,
                  "HRIR manifest JSON; without it a spherical-head model is synthesized");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grainfield: spatial granular synthesis and binaural cue analysis"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides GRAINFIELD_THREADS)")
      ->check(CLI::NonNegativeNumber);

  std::string out;
  RenderArgs render;
  auto* c_render = app.add_subcommand("render", "Render a granular stimulus");
  c_render->add_option("--source", render.source, "'pink' or a mono WAV path")
      ->capture_default_str();
  c_render->add_option("--source-seed", render.source_seed, "Pink noise seed")->capture_default_str();
  c_render->add_option("--source-dur-s", render.source_dur_s, "Pink source length N in seconds")
      ->capture_default_str();
  c_render->add_option("--dt-ms", render.dt_ms, "Time between grains in milliseconds")
      ->capture_default_str();
  c_render->add_option("--len-ms", render.len_ms, "Grain length L in milliseconds")
      ->capture_default_str();
  c_render->add_option("--q-s", render.q_s, "Seed range Q in seconds")->capture_default_str();
  c_render->add_option("--jitter", render.jitter, "Onset jitter as a fraction of dt")
      ->capture_default_str();
  c_render->add_option("--window", render.window, "hann or rect")->capture_default_str();
  c_render->add_option("--dur-s", render.dur_s, "Output duration in seconds")->capture_default_str();
  c_render->add_option("--seed", render.seed, "Scheduling seed")->capture_default_str();
  c_render->add_option("--subset", render.subset, "SP QP L1 L2 L3 L1L2 L2L3 L1L2L3 ZEN RING360")
      ->capture_default_str();
  c_render->add_option("--lowpass-hz", render.lowpass_hz, "Butterworth lowpass cutoff (0 = off)")
      ->capture_default_str();
  c_render->add_option("--lowpass-order", render.lowpass_order, "Butterworth order (even)")
      ->capture_default_str();
  c_render->add_flag("--binaural", render.binaural, "Render to two ears via HRIRs");
  add_hrir_option(c_render, render.hrir);
  c_render->add_option("--out", out, "Output directory")->required();

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Interaural cues of a stereo WAV");
  c_analyze->add_option("--in", analyze.input, "Stereo WAV")->required();
  c_analyze->add_option("--reference", analyze.reference, "Reference summary CSV for delta spectra");
  c_analyze->add_option("--block-ms", analyze.block_ms, "Analysis block length in milliseconds")
      ->capture_default_str();
  c_analyze->add_option("--max-lag-ms", analyze.max_lag_ms, "Cross-correlation lag bound")
      ->capture_default_str();
  c_analyze->add_option("--f-low", analyze.f_low_hz, "Lowest band center (Hz)")->capture_default_str();
  c_analyze->add_option("--f-high", analyze.f_high_hz, "Upper band limit (Hz)")->capture_default_str();
  c_analyze->add_option("--erb-step", analyze.erb_step, "Band spacing in ERB")->capture_default_str();
  c_analyze->add_option("--out", out, "Output directory")->required();

  ReferenceArgs reference;
  auto* c_reference = app.add_subcommand("reference", "Simulate the horizontal diffuse-field reference");
  add_hrir_option(c_reference, reference.hrir);
  c_reference->add_option("--dur-s", reference.dur_s, "Duration in seconds")->capture_default_str();
  c_reference->add_option("--seed", reference.seed, "Noise seed")->capture_default_str();
  c_reference->add_option("--block-ms", reference.block_ms, "Analysis block length")
      ->capture_default_str();
  c_reference->add_option("--out", out, "Output directory")->required();

  auto* c_presets = app.add_subcommand("presets", "List or render experiment presets");
  c_presets->require_subcommand(1);
  bool list_json = false;
  auto* c_list = c_presets->add_subcommand("list", "List preset trial ids");
  c_list->add_flag("--json", list_json, "Print all bundles as JSON");
  PresetRenderArgs preset;
  auto* c_prender = c_presets->add_subcommand("render", "Render every condition of a trial");
  c_prender->add_option("trial", preset.trial, "Trial id, e.g. exp1.t5")->required();
  c_prender->add_flag("--binaural", preset.binaural, "Render binaurally");
  add_hrir_option(c_prender, preset.hrir);
  c_prender->add_option("--sample-dir", preset.sample_dir, "Directory holding sample files");
  c_prender->add_option("--out", out, "Output directory")->required();

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Wilcoxon + Holm re-analysis of rating data");
  c_stats->add_option("--ratings", stats.ratings, "CSV participant,condition,rating")->required();
  c_stats->add_option("--contrasts", stats.contrasts, "Contrast families JSON")->required();
  c_stats->add_option("--out", out, "Output directory (default: CSV to stdout)");

  HrirSynthArgs synth;
  auto* c_synth = app.add_subcommand("hrir-synth", "Write a spherical-head HRIR manifest");
  c_synth->add_option("--set", synth.set, "ring360, cube25 or all")->capture_default_str();
  c_synth->add_option("--rate", synth.sample_rate, "Sample rate")->capture_default_str();
  c_synth->add_option("--out", out, "Output directory")->required();

  std::string config_path;
  auto* c_replay = app.add_subcommand("replay", "Re-run the command recorded in a config.json");
  c_replay->add_option("--config", config_path, "config.json of an earlier run")->required();
  c_replay->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (threads > 0) set_worker_count(threads);

  try {
    if (*c_render) {
      run_render(render, prepare_out(out));
    } else if (*c_analyze) {
      run_analyze(analyze, prepare_out(out));
    } else if (*c_reference) {
      run_reference(reference, prepare_out(out));
    } else if (*c_presets) {
      if (*c_list) {
        if (list_json) {
          std::cout << bundles_to_json(preset_bundles()).dump(2) << '\n';
        } else {
          const auto bundles = preset_bundles();
          for (const auto& id : preset_trial_ids()) {
            std::printf("%-9s %zu conditions\n", id.c_str(), bundles.at(id).size());
          }
        }
      } else {
        run_presets_render(preset, prepare_out(out));
      }
    } else if (*c_stats) {
      run_stats(stats, out.empty() ? std::nullopt : std::optional<fs::path>(prepare_out(out)));
    } else if (*c_synth) {
      run_hrir_synth(synth, prepare_out(out));
    } else if (*c_replay) {
      run_replay(config_path, prepare_out(out));
    }
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const StatisticsError& e) {
    std::fprintf(stderr, "statistics error: %s\n", e.what());
    return 4;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
