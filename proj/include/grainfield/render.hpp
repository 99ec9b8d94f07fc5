#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "grainfield/convolver.hpp"
#include "grainfield/grain.hpp"
#include "grainfield/hrir.hpp"
#include "grainfield/layout.hpp"
#include "grainfield/parallel.hpp"

namespace grainfield {

struct RenderOptions {
  // Replaces the overlap compensation gain when set.
  std::optional<double> gain;
};

namespace detail {

struct PlacedGrain {
  std::size_t onset;  // samples
  std::size_t seed;   // samples
  std::size_t slot;   // output channel or HRIR index
};

struct GrainPlan {
  std::vector<PlacedGrain> grains;  // non-decreasing onsets
  std::vector<double> window;
  double inv_gain = 1.0;
  std::size_t duration_samples = 0;
};

template <std::floating_point Sample>
GrainPlan plan_grains(const BasicAudioBuffer<Sample>& source, const GrainSchedule& schedule,
                      const std::vector<std::size_t>& slot_of_target,
                      const RenderOptions& options) {
  if (source.channels() != 1) throw ParameterError("grain source must be mono");
  const auto& p = schedule.params;
  p.validate_for_source(source.duration());
  const int sr = source.sample_rate();
  GrainPlan plan;
  plan.window = make_window(p.window, p.grain_len_s, sr);
  const double g = options.gain ? *options.gain : compensation_gain(p, sr);
  if (!(g > 0.0)) throw ParameterError("render gain must be positive");
  plan.inv_gain = 1.0 / g;
  plan.duration_samples = to_samples(p.duration_s, sr);
  plan.grains.reserve(schedule.events.size());
  for (const auto& e : schedule.events) {
    if (e.target >= slot_of_target.size()) {
      throw ScheduleError("grain target " + std::to_string(e.target) + " out of range (" +
                          std::to_string(slot_of_target.size()) + " targets)");
    }
    plan.grains.push_back({std::min(to_samples(e.onset_s, sr), plan.duration_samples),
                           to_samples(e.seed_s, sr), slot_of_target[e.target]});
  }
  return plan;
}

// Adds the part of grain g that falls in [begin, begin + out.size()).
template <std::floating_point Sample>
void add_grain(const GrainPlan& plan, const PlacedGrain& g, std::span<const Sample> x,
               std::size_t begin, std::span<double> out) {
  const std::size_t len = plan.window.size();
  const std::size_t lo = std::max(begin, g.onset);
  const std::size_t hi = std::min(begin + out.size(), g.onset + len);
  for (std::size_t t = lo; t < hi; ++t) {
    const std::size_t n = t - g.onset;
    const std::size_t src = g.seed + n;
    if (src >= x.size()) break;  // x(t) = 0 outside the buffer
    out[t - begin] += plan.window[n] * static_cast<double>(x[src]) * plan.inv_gain;
  }
}

template <std::floating_point Sample>
BasicAudioBuffer<Sample> render_to_channels(const BasicAudioBuffer<Sample>& source,
                                            const GrainSchedule& schedule,
                                            const std::vector<std::size_t>& channel_of_target,
                                            std::size_t channels, const RenderOptions& options) {
  const GrainPlan plan = plan_grains(source, schedule, channel_of_target, options);
  const std::size_t total = plan.duration_samples + plan.window.size();
  std::vector<std::vector<std::size_t>> per_channel(channels);
  for (std::size_t i = 0; i < plan.grains.size(); ++i) {
    per_channel[plan.grains[i].slot].push_back(i);
  }
  std::vector<std::vector<Sample>> out(channels);
  const auto x = source.channel(0);
  parallel_for(channels, [&](std::size_t c) {
    std::vector<double> acc(total, 0.0);
    for (std::size_t i : per_channel[c]) add_grain(plan, plan.grains[i], x, 0, std::span(acc));
    out[c].assign(acc.begin(), acc.end());
  });
  return BasicAudioBuffer<Sample>(std::move(out), source.sample_rate());
}

}  // namespace detail

// One output channel per member of the schedule's assignment subset. Each grain
// adds w(t - tau) x(t - tau + q) / G to its channel only.
template <std::floating_point Sample>
BasicAudioBuffer<Sample> render_discrete(const BasicAudioBuffer<Sample>& source,
                                         const GrainSchedule& schedule,
                                         const RenderOptions& options = {}) {
  const std::size_t j = schedule.assignment.size();
  if (j == 0) throw ParameterError("schedule has an empty assignment subset");
  std::vector<std::size_t> identity(j);
  for (std::size_t i = 0; i < j; ++i) identity[i] = i;
  return detail::render_to_channels(source, schedule, identity, j, options);
}

// Renders onto every channel of `layout`; subset members are matched to layout
// channels by name.
template <std::floating_point Sample>
BasicAudioBuffer<Sample> render_discrete(const BasicAudioBuffer<Sample>& source,
                                         const GrainSchedule& schedule,
                                         const SpeakerLayout& layout,
                                         const RenderOptions& options = {}) {
  std::vector<std::size_t> map;
  for (const auto& label : schedule.assignment.labels) {
    try {
      map.push_back(layout.index_of(label));
    } catch (const ParameterError&) {
      throw ScheduleError("grain target '" + label + "' is not a channel of the layout");
    }
  }
  return detail::render_to_channels(source, schedule, map, layout.size(), options);
}

// Each grain is convolved with the HRIR pair nearest to its target direction.
// Output length is duration + L + ir_length samples.
template <std::floating_point Sample>
BasicAudioBuffer<Sample> render_binaural(const BasicAudioBuffer<Sample>& source,
                                         const GrainSchedule& schedule, const HrirSet& hrirs,
                                         const RenderOptions& options = {}) {
  if (hrirs.sample_rate() != source.sample_rate()) {
    throw ParameterError("HRIR sample rate " + std::to_string(hrirs.sample_rate()) +
                         " does not match source rate " + std::to_string(source.sample_rate()));
  }
  std::vector<std::size_t> hrir_of_target;
  for (const auto& d : schedule.assignment.directions) {
    hrir_of_target.push_back(nearest_direction(hrirs, d));
  }
  const detail::GrainPlan plan = detail::plan_grains(source, schedule, hrir_of_target, options);
  const std::size_t grain_len = plan.window.size();
  const std::size_t bus_len = plan.duration_samples + grain_len;
  const std::size_t total = bus_len + hrirs.ir_length();

  detail::BinauralConvolver conv(hrirs);
  {
    std::vector<std::size_t> used;
    for (const auto& g : plan.grains) used.push_back(g.slot);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    conv.prepare(used);
  }

  const std::size_t hop = conv.hop();
  const std::size_t nblocks = (bus_len + hop - 1) / hop;
  std::vector<std::vector<double>> out_l(nblocks), out_r(nblocks);
  const auto x = source.channel(0);
  const auto& grains = plan.grains;

  parallel_for(nblocks, [&](std::size_t b) {
    const std::size_t begin = b * hop;
    const std::size_t end = begin + hop;
    // Grains overlapping [begin, end): onset < end and onset + len > begin.
    auto first = std::partition_point(grains.begin(), grains.end(), [&](const auto& g) {
      return g.onset + grain_len <= begin;
    });
    auto last = std::partition_point(first, grains.end(),
                                     [&](const auto& g) { return g.onset < end; });
    std::vector<std::size_t> active;
    for (auto it = first; it != last; ++it) {
      if (it->onset + grain_len > begin) active.push_back(static_cast<std::size_t>(it - grains.begin()));
    }
    std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t c) {
      return grains[a].slot < grains[c].slot;
    });
    auto blk = conv.make_block();
    std::size_t i = 0;
    while (i < active.size()) {
      const std::size_t slot = grains[active[i]].slot;
      blk.segment.zero();
      std::span<double> seg(blk.segment.data(), hop);
      for (; i < active.size() && grains[active[i]].slot == slot; ++i) {
        detail::add_grain(plan, grains[active[i]], x, begin, seg);
      }
      conv.add_segment(blk, slot);
    }
    conv.finish(blk, out_l[b], out_r[b]);
  });

  std::vector<double> left(total, 0.0), right(total, 0.0);
  detail::overlap_add(out_l, hop, left);
  detail::overlap_add(out_r, hop, right);
  std::vector<std::vector<Sample>> chans(2);
  chans[0].assign(left.begin(), left.end());
  chans[1].assign(right.begin(), right.end());
  return BasicAudioBuffer<Sample>(std::move(chans), source.sample_rate());
}

}  // namespace grainfield
