#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qtraj/fft.hpp"
#include "qtraj/grid.hpp"
#include "qtraj/wavefield.hpp"

namespace qtraj {

enum class DerivMethod { spectral, central4 };

namespace detail {

// Multiplies the axis-transformed field by (ik)^order. Odd orders zero the
// Nyquist mode so real input stays real.
inline void apply_ik(const Grid& g, std::size_t axis, int order, std::complex<double>* hat) {
  const auto& ks = g.wavenumbers(axis);
  const std::size_t n = g.dim(axis);
  const bool zero_nyq = (order % 2 == 1) && (n % 2 == 0);
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    const std::size_t i = idx[axis];
    const double k = ks[i];
    cplx factor;
    if (zero_nyq && i == n / 2) {
      factor = 0.0;
    } else {
      factor = (order == 1) ? cplx(0.0, k) : cplx(-k * k, 0.0);
    }
    hat[flat] *= factor;
  }
}

inline std::size_t wrap_index(std::size_t i, long long d, std::size_t n) {
  long long j = static_cast<long long>(i) + d;
  const auto nn = static_cast<long long>(n);
  j %= nn;
  if (j < 0) j += nn;
  return static_cast<std::size_t>(j);
}

}  // namespace detail

// d^order/dq_axis^order of a complex field. The spectral method is exact for
// band-limited data; central4 is the standard five-point O(h^4) stencil with
// periodic index wrap (fields are assumed negligible at the rim otherwise).
inline std::vector<cplx> derivative(const Grid& g, std::span<const cplx> values,
                                    std::size_t axis, int order, DerivMethod method) {
  if (order != 1 && order != 2) throw ConfigError("derivative: order must be 1 or 2");
  if (axis >= g.ndim()) throw ConfigError("derivative: axis out of range");
  std::vector<cplx> out(values.begin(), values.end());
  if (method == DerivMethod::spectral) {
    Fft::forward_axis(g, axis, out.data());
    detail::apply_ik(g, axis, order, out.data());
    Fft::inverse_axis(g, axis, out.data());
    return out;
  }
  const double h = g.step(axis);
  const std::size_t n = g.dim(axis);
  const std::size_t s = g.stride(axis);
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    const std::size_t i = idx[axis];
    const std::size_t base = flat - i * s;
    const cplx fm2 = values[base + detail::wrap_index(i, -2, n) * s];
    const cplx fm1 = values[base + detail::wrap_index(i, -1, n) * s];
    const cplx fp1 = values[base + detail::wrap_index(i, +1, n) * s];
    const cplx fp2 = values[base + detail::wrap_index(i, +2, n) * s];
    if (order == 1) {
      out[flat] = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    } else {
      out[flat] = (-fp2 + 16.0 * fp1 - 30.0 * values[flat] + 16.0 * fm1 - fm2) / (12.0 * h * h);
    }
  }
  return out;
}

inline std::vector<double> derivative_real(const Grid& g, std::span<const double> values,
                                           std::size_t axis, int order, DerivMethod method) {
  std::vector<cplx> tmp(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) tmp[i] = values[i];
  const auto d = derivative(g, tmp, axis, order, method);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = d[i].real();
  return out;
}

// All first derivatives from a single forward transform.
inline std::vector<std::vector<cplx>> gradient_spectral(const Grid& g,
                                                        std::span<const cplx> values) {
  std::vector<cplx> hat(values.begin(), values.end());
  Fft::forward(g, hat.data());
  std::vector<std::vector<cplx>> out(g.ndim());
  std::array<std::size_t, 4> idx{};
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    out[a] = hat;
    const auto& ks = g.wavenumbers(a);
    const std::size_t n = g.dim(a);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
      const std::size_t i = idx[a];
      const cplx ik = (n % 2 == 0 && i == n / 2) ? cplx(0.0) : cplx(0.0, ks[i]);
      out[a][flat] *= ik;
    }
    Fft::inverse(g, out[a].data());
  }
  return out;
}

// Spectral Laplacian of a real field (single full round trip).
inline std::vector<double> laplacian_spectral(const Grid& g, std::span<const double> values) {
  std::vector<cplx> hat(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) hat[i] = values[i];
  Fft::forward(g, hat.data());
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    double k2 = 0.0;
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      const double k = g.wavenumbers(a)[idx[a]];
      k2 += k * k;
    }
    hat[flat] *= -k2;
  }
  Fft::inverse(g, hat.data());
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = hat[i].real();
  return out;
}

}  // namespace qtraj
