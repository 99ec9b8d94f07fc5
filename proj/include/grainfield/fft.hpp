#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>

#include "grainfield/errors.hpp"

namespace grainfield {

using Complex = std::complex<double>;

// Heap array allocated with fftw_malloc so every buffer handed to a plan has
// the alignment the plan was created for.
template <typename T>
class FftwArray {
 public:
  FftwArray() = default;
  explicit FftwArray(std::size_t n) : size_(n) {
    if (n) {
      data_ = static_cast<T*>(fftw_malloc(sizeof(T) * n));
      if (!data_) throw std::bad_alloc();
      for (std::size_t i = 0; i < n; ++i) data_[i] = T{};
    }
  }
  FftwArray(const FftwArray&) = delete;
  FftwArray& operator=(const FftwArray&) = delete;
  FftwArray(FftwArray&& o) noexcept : data_(o.data_), size_(o.size_) {
    o.data_ = nullptr;
    o.size_ = 0;
  }
  FftwArray& operator=(FftwArray&& o) noexcept {
    if (this != &o) {
      fftw_free(data_);
      data_ = o.data_;
      size_ = o.size_;
      o.data_ = nullptr;
      o.size_ = 0;
    }
    return *this;
  }
  ~FftwArray() { fftw_free(data_); }

  T* data() noexcept { return data_; }
  const T* data() const noexcept { return data_; }
  std::size_t size() const noexcept { return size_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }
  std::span<T> span() noexcept { return {data_, size_}; }
  std::span<const T> span() const noexcept { return {data_, size_}; }
  void zero() noexcept {
    for (std::size_t i = 0; i < size_; ++i) data_[i] = T{};
  }

 private:
  T* data_ = nullptr;
  std::size_t size_ = 0;
};

using RealArray = FftwArray<double>;
using ComplexArray = FftwArray<Complex>;

// Real-input FFT of fixed size n. Plans are cached process-wide; execution is
// thread-safe. Unnormalized in both directions (inverse(forward(x)) == n * x).
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n < 2) throw ParameterError("FFT size must be at least 2");
    plans_ = plans_for(n);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  // in: n reals, out: n/2+1 bins. Input is preserved.
  void forward(const RealArray& in, ComplexArray& out) const {
    check(in.size() >= n_ && out.size() >= bins());
    fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  // in: n/2+1 bins (destroyed), out: n reals.
  void inverse(ComplexArray& in, RealArray& out) const {
    check(in.size() >= bins() && out.size() >= n_);
    fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(in.data()),
                         out.data());
  }

 private:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
  };

  static void check(bool ok) {
    if (!ok) throw ParameterError("FFT buffer too small");
  }

  static std::shared_ptr<const Plans> plans_for(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const Plans>> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    RealArray re(n);
    ComplexArray cx(n / 2 + 1);
    auto plans = std::make_shared<Plans>();
    const int size = static_cast<int>(n);
    plans->forward = fftw_plan_dft_r2c_1d(
        size, re.data(), reinterpret_cast<fftw_complex*>(cx.data()), FFTW_ESTIMATE);
    plans->inverse = fftw_plan_dft_c2r_1d(
        size, reinterpret_cast<fftw_complex*>(cx.data()), re.data(), FFTW_ESTIMATE);
    if (!plans->forward || !plans->inverse) throw ParameterError("FFTW planning failed");
    // Plans live for the process lifetime.
    cache.emplace(n, plans);
    return plans;
  }

  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace grainfield
