#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/fft.hpp"
#include "qtraj/grid.hpp"

namespace qtraj {

using cplx = std::complex<double>;

// Complex amplitude on a grid. Immutable by convention once published for a
// time step; the propagator produces a fresh field per step.
struct WaveField {
  std::shared_ptr<const Grid> grid;
  std::vector<cplx> values;
  double time = 0.0;
};

inline double norm2(const WaveField& f) {
  double s = 0.0;
  for (const cplx& v : f.values) s += std::norm(v);
  return s * f.grid->cell_volume();
}

inline double norm(const WaveField& f) { return std::sqrt(norm2(f)); }

inline void normalize(WaveField& f) {
  const double n = norm(f);
  if (!(n > 0.0)) throw PhysicsError("cannot normalize a zero field");
  const double s = 1.0 / n;
  for (cplx& v : f.values) v *= s;
}

inline void check_finite(const WaveField& f, const char* where = "wavefield") {
  for (const cplx& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw PhysicsError(std::string(where) + ": non-finite amplitude encountered");
}

// Gaussian wavepacket exp(-|q-c|^2/(4 sigma^2)) exp(i k0.(q-c)), unit L2 norm.
// |psi|^2 then has standard deviation sigma per axis.
inline WaveField init_gaussian(std::shared_ptr<const Grid> grid, std::span<const double> center,
                               std::span<const double> k0, double sigma) {
  const Grid& g = *grid;
  const std::size_t nd = g.ndim();
  if (center.size() != nd || k0.size() != nd)
    throw ConfigError("init_gaussian: center/k0 dimension mismatch");
  for (std::size_t a = 0; a < nd; ++a) {
    if (!(sigma > 3.0 * g.step(a)))
      throw ConfigError("init_gaussian: sigma under-resolved (need sigma > 3h)");
    if (!(std::abs(k0[a]) < 0.5 * g.kmax(a)))
      throw ConfigError("init_gaussian: k0 too close to the grid Nyquist wavenumber");
  }
  WaveField f{std::move(grid), std::vector<cplx>(g.size()), 0.0};
  std::array<std::size_t, 4> idx{};
  const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), nd));
    double r2 = 0.0, phase = 0.0;
    for (std::size_t a = 0; a < nd; ++a) {
      const double d = g.axis_coords(a)[idx[a]] - center[a];
      r2 += d * d;
      phase += k0[a] * d;
    }
    f.values[flat] = std::polar(std::exp(-r2 * inv4s2), phase);
  }
  normalize(f);
  return f;
}

// Multilinear interpolation of an arbitrary per-node array over the grid.
// Exact on nodes; periodic grids wrap, absorbing grids reject outside points.
template <class T>
T sample_grid(const Grid& g, std::span<const T> values, std::span<const double> p) {
  const std::size_t nd = g.ndim();
  std::array<std::size_t, 4> i0{};
  std::array<double, 4> frac{};
  for (std::size_t a = 0; a < nd; ++a) {
    const std::size_t n = g.dim(a);
    double x = p[a];
    if (g.boundary() == Boundary::periodic) {
      x = g.wrap(a, x);
      double u = (x - g.origin(a)) / g.step(a);
      std::size_t i = static_cast<std::size_t>(u);
      if (i >= n) i = n - 1;  // guard fp rounding at the seam
      i0[a] = i;
      frac[a] = u - static_cast<double>(i);
    } else {
      const double u = (x - g.origin(a)) / g.step(a);
      if (!(u >= 0.0 && u <= static_cast<double>(n - 1)))
        throw PhysicsError("sample: point outside box in absorbing mode");
      std::size_t i = static_cast<std::size_t>(u);
      if (i >= n - 1) i = n - 2;
      i0[a] = i;
      frac[a] = u - static_cast<double>(i);
    }
  }
  T acc{};
  const std::size_t ncorner = std::size_t{1} << nd;
  for (std::size_t c = 0; c < ncorner; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < nd; ++a) {
      const bool hi = (c >> a) & 1u;
      std::size_t ia = i0[a] + (hi ? 1 : 0);
      if (ia >= g.dim(a)) ia -= g.dim(a);  // periodic neighbour wrap
      w *= hi ? frac[a] : 1.0 - frac[a];
      flat += ia * g.stride(a);
    }
    if (w != 0.0) acc += values[flat] * w;
  }
  return acc;
}

inline cplx sample(const WaveField& f, std::span<const double> p) {
  return sample_grid<cplx>(*f.grid, f.values, p);
}

inline std::vector<double> expectation_position(const WaveField& f) {
  const Grid& g = *f.grid;
  std::vector<double> mean(g.ndim(), 0.0);
  double w = 0.0;
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const double rho = std::norm(f.values[flat]);
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    for (std::size_t a = 0; a < g.ndim(); ++a) mean[a] += rho * g.axis_coords(a)[idx[a]];
    w += rho;
  }
  for (double& m : mean) m /= w;
  return mean;
}

inline double position_std(const WaveField& f, std::size_t axis) {
  const Grid& g = *f.grid;
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const double rho = std::norm(f.values[flat]);
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    const double x = g.axis_coords(axis)[idx[axis]];
    w += rho;
    m1 += rho * x;
    m2 += rho * x * x;
  }
  m1 /= w;
  m2 /= w;
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

// Momentum expectation via the spectral representation.
inline std::vector<double> expectation_momentum(const WaveField& f) {
  const Grid& g = *f.grid;
  std::vector<cplx> hat(f.values);
  Fft::forward(g, hat.data());
  std::vector<double> mean(g.ndim(), 0.0);
  double w = 0.0;
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const double rho = std::norm(hat[flat]);
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    for (std::size_t a = 0; a < g.ndim(); ++a) mean[a] += rho * g.wavenumbers(a)[idx[a]];
    w += rho;
  }
  for (double& m : mean) m /= w;
  return mean;
}

inline double kinetic_energy(const WaveField& f) {
  const Grid& g = *f.grid;
  std::vector<cplx> hat(f.values);
  Fft::forward(g, hat.data());
  double e = 0.0, w = 0.0;
  std::array<std::size_t, 4> idx{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const double rho = std::norm(hat[flat]);
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    double k2 = 0.0;
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      const double k = g.wavenumbers(a)[idx[a]];
      k2 += k * k;
    }
    e += 0.5 * k2 * rho;
    w += rho;
  }
  return e / w;
}

inline double potential_energy(const WaveField& f, std::span<const double> v) {
  double e = 0.0, w = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double rho = std::norm(f.values[i]);
    e += v[i] * rho;
    w += rho;
  }
  return e / w;
}

}  // namespace qtraj
