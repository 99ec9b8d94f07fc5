#pragma once

#include <cstddef>
#include <vector>

#include "grainfield/fft.hpp"
#include "grainfield/hrir.hpp"
#include "grainfield/parallel.hpp"

namespace grainfield::detail {

// Uniformly partitioned overlap-add for many mono sources, each filtered by one
// HRIR pair and summed into two ears. Input is cut into hops of `hop()` samples;
// every hop is transformed, multiplied by the cached HRTF pair of its source and
// accumulated in the frequency domain. One inverse transform per hop and ear
// then yields `fft_size()` output samples starting at the hop's offset.
class BinauralConvolver {
 public:
  explicit BinauralConvolver(const HrirSet& set, std::size_t hop = 2048)
      : set_(&set),
        hop_(hop),
        fft_(next_pow2(hop + set.ir_length() - 1)),
        left_(set.size()),
        right_(set.size()) {}

  std::size_t hop() const noexcept { return hop_; }
  std::size_t fft_size() const noexcept { return fft_.size(); }
  std::size_t bins() const noexcept { return fft_.bins(); }
  const RealFft& fft() const noexcept { return fft_; }

  // Computes HRTF spectra for the listed entries (others stay empty).
  void prepare(const std::vector<std::size_t>& used) {
    parallel_for(used.size(), [&](std::size_t u) {
      const std::size_t i = used[u];
      if (left_[i].size()) return;
      left_[i] = transform(set_->entries()[i].left);
      right_[i] = transform(set_->entries()[i].right);
    });
  }

  // Scratch for one hop: zero the segment, fill the first hop() samples, then
  // call add_segment once per source.
  struct Block {
    RealArray segment;
    ComplexArray spectrum;
    ComplexArray acc_left;
    ComplexArray acc_right;
    bool touched = false;
  };

  Block make_block() const {
    return Block{RealArray(fft_.size()), ComplexArray(bins()), ComplexArray(bins()),
                 ComplexArray(bins()), false};
  }

  void add_segment(Block& b, std::size_t hrir_index) const {
    fft_.forward(b.segment, b.spectrum);
    const auto& hl = left_[hrir_index];
    const auto& hr = right_[hrir_index];
    for (std::size_t k = 0; k < bins(); ++k) {
      b.acc_left[k] += b.spectrum[k] * hl[k];
      b.acc_right[k] += b.spectrum[k] * hr[k];
    }
    b.touched = true;
  }

  // Inverse transforms the accumulators into `left`/`right` (fft_size each).
  void finish(Block& b, std::vector<double>& left, std::vector<double>& right) const {
    left.assign(fft_.size(), 0.0);
    right.assign(fft_.size(), 0.0);
    if (!b.touched) return;
    const double scale = 1.0 / static_cast<double>(fft_.size());
    fft_.inverse(b.acc_left, b.segment);
    for (std::size_t i = 0; i < fft_.size(); ++i) left[i] = b.segment[i] * scale;
    fft_.inverse(b.acc_right, b.segment);
    for (std::size_t i = 0; i < fft_.size(); ++i) right[i] = b.segment[i] * scale;
  }

 private:
  ComplexArray transform(const std::vector<double>& ir) const {
    RealArray t(fft_.size());
    for (std::size_t i = 0; i < ir.size(); ++i) t[i] = ir[i];
    ComplexArray out(bins());
    fft_.forward(t, out);
    return out;
  }

  const HrirSet* set_;
  std::size_t hop_;
  RealFft fft_;
  std::vector<ComplexArray> left_;
  std::vector<ComplexArray> right_;
};

// Adds per-hop outputs (each fft_size long, hop h apart) into `out` in hop order.
inline void overlap_add(const std::vector<std::vector<double>>& blocks, std::size_t hop,
                        std::vector<double>& out) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t start = b * hop;
    for (std::size_t i = 0; i < blocks[b].size() && start + i < out.size(); ++i) {
      out[start + i] += blocks[b][i];
    }
  }
}

}  // namespace grainfield::detail
