#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "grainfield/convolver.hpp"
#include "grainfield/hrir.hpp"
#include "grainfield/noise.hpp"
#include "grainfield/parallel.hpp"
#include "grainfield/random.hpp"

namespace grainfield {

// Horizontal diffuse field: independent pink noise from each of 360 directions
// convolved with that direction's HRIR pair and summed. Each noise runs
// ir_length - 1 samples ahead so the returned signal is steady state. The sum
// is scaled to an RMS of 0.1.
inline AudioBuffer simulate_diffuse_reference(const HrirSet& hrirs, double duration_s,
                                              std::uint64_t seed) {
  if (hrirs.size() != 360) {
    throw ParameterError("diffuse reference needs 360 HRIR directions, got " +
                         std::to_string(hrirs.size()));
  }
  for (const auto& e : hrirs.entries()) {
    if (e.direction.elevation_deg() != 0.0) {
      throw ParameterError("diffuse reference needs horizontal (0 deg elevation) directions");
    }
  }
  if (!(duration_s > 0.0)) throw ParameterError("duration must be positive");
  const int sr = hrirs.sample_rate();
  const std::size_t n = to_samples(duration_s, sr);
  if (n == 0) throw ParameterError("duration is shorter than one sample");
  const std::size_t ir = hrirs.ir_length();
  const std::size_t src_len = n + ir - 1;

  detail::BinauralConvolver conv(hrirs);
  const std::size_t hop = conv.hop();
  const std::size_t nblocks = (src_len + hop - 1) / hop;
  std::vector<detail::BinauralConvolver::Block> blocks;
  blocks.reserve(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) blocks.push_back(conv.make_block());

  // Directions are processed in chunks to bound memory; every hop accumulates
  // directions in ascending order regardless of chunking or threads.
  constexpr std::size_t kChunk = 24;
  for (std::size_t first = 0; first < hrirs.size(); first += kChunk) {
    const std::size_t count = std::min(kChunk, hrirs.size() - first);
    std::vector<std::size_t> used(count);
    for (std::size_t i = 0; i < count; ++i) used[i] = first + i;
    conv.prepare(used);
    std::vector<std::vector<double>> noise(count);
    parallel_for(count, [&](std::size_t i) {
      const auto buf = generate_pink_noise_samples<double>(src_len, sr, mix_seed(seed, first + i));
      noise[i] = buf.data().front();
    });
    parallel_for(nblocks, [&](std::size_t b) {
      auto& blk = blocks[b];
      const std::size_t begin = b * hop;
      const std::size_t end = std::min(begin + hop, src_len);
      for (std::size_t i = 0; i < count; ++i) {
        blk.segment.zero();
        for (std::size_t t = begin; t < end; ++t) blk.segment[t - begin] = noise[i][t];
        conv.add_segment(blk, first + i);
      }
    });
  }

  std::vector<std::vector<double>> out_l(nblocks), out_r(nblocks);
  parallel_for(nblocks, [&](std::size_t b) { conv.finish(blocks[b], out_l[b], out_r[b]); });
  std::vector<double> left(src_len + ir - 1, 0.0), right(src_len + ir - 1, 0.0);
  detail::overlap_add(out_l, hop, left);
  detail::overlap_add(out_r, hop, right);

  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    acc += left[ir - 1 + t] * left[ir - 1 + t] + right[ir - 1 + t] * right[ir - 1 + t];
  }
  const double current = std::sqrt(acc / static_cast<double>(2 * n));
  const double gain = current > 0.0 ? kDefaultRms / current : 0.0;
  std::vector<std::vector<float>> chans(2, std::vector<float>(n));
  for (std::size_t t = 0; t < n; ++t) {
    chans[0][t] = static_cast<float>(left[ir - 1 + t] * gain);
    chans[1][t] = static_cast<float>(right[ir - 1 + t] * gain);
  }
  return AudioBuffer(std::move(chans), sr);
}

}  // namespace grainfield
