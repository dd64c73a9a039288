#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "qtraj/grid.hpp"

namespace qtraj {

// Thin FFTW wrapper: in-place complex transforms over all axes or a single
// axis of a row-major field. Plans are created with FFTW_ESTIMATE (planning
// is deterministic, so repeated runs are bit-identical) and cached per shape.
class Fft {
 public:
  static void forward(const Grid& g, std::complex<double>* data) { all(g, data, FFTW_FORWARD); }

  static void inverse(const Grid& g, std::complex<double>* data) {
    all(g, data, FFTW_BACKWARD);
    scale(data, g.size(), 1.0 / static_cast<double>(g.size()));
  }

  static void forward_axis(const Grid& g, std::size_t axis, std::complex<double>* data) {
    one_axis(g, axis, data, FFTW_FORWARD);
  }

  static void inverse_axis(const Grid& g, std::size_t axis, std::complex<double>* data) {
    one_axis(g, axis, data, FFTW_BACKWARD);
    scale(data, g.size(), 1.0 / static_cast<double>(g.dim(axis)));
  }

 private:
  // (all-axes? -1 : axis, d0, d1, d2, d3, stride, direction)
  using Key = std::array<long long, 7>;

  static void scale(std::complex<double>* d, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) d[i] *= s;
  }

  static fftw_complex* cast(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

  static void all(const Grid& g, std::complex<double>* data, int dir) {
    std::array<int, 4> n{};
    Key key{-1, 0, 0, 0, 0, 0, dir};
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      n[a] = static_cast<int>(g.dim(a));
      key[1 + a] = n[a];
    }
    fftw_plan plan = cached(key, [&] {
      return fftw_plan_dft(static_cast<int>(g.ndim()), n.data(), cast(data), cast(data), dir,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
    });
    fftw_execute_dft(plan, cast(data), cast(data));
  }

  static void one_axis(const Grid& g, std::size_t axis, std::complex<double>* data, int dir) {
    const int n = static_cast<int>(g.dim(axis));
    const int stride = static_cast<int>(g.stride(axis));
    Key key{static_cast<long long>(axis), n, 0, 0, 0, stride, dir};
    // Lines along `axis` split into outer blocks; within a block the lines
    // are contiguous with distance 1 and stride `stride`.
    fftw_plan plan = cached(key, [&] {
      return fftw_plan_many_dft(1, &n, stride, cast(data), nullptr, stride, 1, cast(data),
                                nullptr, stride, 1, dir, FFTW_ESTIMATE | FFTW_UNALIGNED);
    });
    const std::size_t block = static_cast<std::size_t>(n) * static_cast<std::size_t>(stride);
    const std::size_t nblocks = g.size() / block;
    for (std::size_t b = 0; b < nblocks; ++b) {
      auto* p = cast(data + b * block);
      fftw_execute_dft(plan, p, p);
    }
  }

  template <class Make>
  static fftw_plan cached(const Key& key, Make make) {
    static std::map<Key, fftw_plan> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_plan p = make();
    cache.emplace(key, p);
    return p;
  }
};

}  // namespace qtraj
