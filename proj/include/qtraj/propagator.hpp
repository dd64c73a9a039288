#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/fft.hpp"
#include "qtraj/grid.hpp"
#include "qtraj/potentials.hpp"
#include "qtraj/wavefield.hpp"

namespace qtraj {

enum class Scheme { split_operator, cayley_adi };

struct PropagatorConfig {
  Scheme scheme = Scheme::split_operator;
  double dt = 0.1;
  bool imaginary_time = false;
  double solve_tolerance = 1e-10;  // residual guard for the tridiagonal solves
};

namespace detail {

// Thomas solve for tridiagonal (sub a, diag b, super c) x = d; overwrites d.
// With `cyclic` the corner couplings a[0] (row 0 -> last) and c[n-1]
// (last row -> 0) are folded in via Sherman-Morrison.
inline void solve_tridiagonal(std::span<const cplx> a, std::span<cplx> b,
                              std::span<const cplx> c, std::span<cplx> d, bool cyclic,
                              std::vector<cplx>& scratch) {
  const std::size_t n = b.size();
  auto plain = [&](std::span<cplx> diag, std::span<cplx> rhs) {
    // in-place forward elimination / back substitution
    for (std::size_t i = 1; i < n; ++i) {
      const cplx m = a[i] / diag[i - 1];
      diag[i] -= m * c[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / diag[i];
  };
  if (!cyclic) {
    plain(b, d);
    return;
  }
  // Sherman-Morrison with u = (gamma, 0, ..., c[n-1]), v = (1, 0, ..., a[0]/gamma)
  const cplx alpha = a[0], beta = c[n - 1];
  const cplx gamma = -b[0];
  scratch.assign(2 * n, cplx{});
  std::span<cplx> diag(scratch.data(), n);
  std::span<cplx> u(scratch.data() + n, n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = b[i];
  diag[0] -= gamma;
  diag[n - 1] -= alpha * beta / gamma;
  u[0] = gamma;
  u[n - 1] = beta;
  std::vector<cplx> diag2(diag.begin(), diag.end());
  plain(diag, d);
  plain(std::span<cplx>(diag2.data(), n), u);
  const cplx num = d[0] + alpha * d[n - 1] / gamma;
  const cplx den = 1.0 + u[0] + alpha * u[n - 1] / gamma;
  const cplx f = num / den;
  for (std::size_t i = 0; i < n; ++i) d[i] -= f * u[i];
}

}  // namespace detail

// Unitary propagation of wavefields under H = -laplacian/2 + V with two
// interchangeable schemes:
//   split_operator : Strang kinetic-potential-kinetic splitting, spectral.
//   cayley_adi     : Cayley form (1 + i H dt/2) psi' = (1 - i H dt/2) psi,
//                    factorised per axis into Numerov-compact tridiagonal
//                    solves with the potential split evenly across axes.
// Imaginary-time mode turns either scheme into a ground-state relaxation
// (renormalising after each step).
class Propagator {
 public:
  Propagator(std::shared_ptr<const Grid> grid, PotentialSpec potential, PropagatorConfig cfg)
      : grid_(std::move(grid)), potential_(std::move(potential)), cfg_(cfg) {
    // negative dt is legal in real time (used for time-reversal checks)
    if (cfg_.dt == 0.0) throw ConfigError("propagator: dt must be nonzero");
    if (cfg_.imaginary_time && cfg_.dt < 0.0)
      throw ConfigError("propagator: imaginary time needs dt > 0");
    const Grid& g = *grid_;
    validate(potential_, g.ndim());
    vfield_ = evaluate(potential_, g);

    double ekin_max = 0.0;
    for (std::size_t a = 0; a < g.ndim(); ++a) ekin_max += 0.5 * g.kmax(a) * g.kmax(a);
    accuracy_warning_ =
        (cfg_.scheme == Scheme::split_operator) && (std::abs(cfg_.dt) * ekin_max >= 0.5);

    if (cfg_.scheme == Scheme::split_operator) {
      kin_half_.resize(g.size());
      pot_full_.resize(g.size());
      std::array<std::size_t, 4> idx{};
      for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
        double k2 = 0.0;
        for (std::size_t a = 0; a < g.ndim(); ++a) {
          const double k = g.wavenumbers(a)[idx[a]];
          k2 += k * k;
        }
        if (cfg_.imaginary_time) {
          kin_half_[flat] = std::exp(-0.25 * k2 * cfg_.dt);
          pot_full_[flat] = std::exp(-vfield_[flat] * cfg_.dt);
        } else {
          kin_half_[flat] = std::polar(1.0, -0.25 * k2 * cfg_.dt);
          pot_full_[flat] = std::polar(1.0, -vfield_[flat] * cfg_.dt);
        }
      }
    }
    if (g.boundary() == Boundary::absorbing_mask) {
      mask_.resize(g.ndim());
      for (std::size_t a = 0; a < g.ndim(); ++a) {
        const std::size_t n = g.dim(a);
        mask_[a].assign(n, 1.0);
        const double rim = g.spec().mask_rim_fraction * g.length(a);
        if (rim <= 0.0) continue;
        const double lo = g.origin(a) + rim, hi = g.origin(a) + g.length(a) - rim;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = g.axis_coords(a)[i];
          double xi = 0.0;
          if (x < lo) xi = (lo - x) / rim;
          else if (x > hi) xi = (x - hi) / rim;
          if (xi > 0.0) {
            const double c = std::cos(0.5 * std::numbers::pi * std::min(xi, 1.0));
            mask_[a][i] = c * c;
          }
        }
      }
    }
  }

  const Grid& grid() const { return *grid_; }
  const PropagatorConfig& config() const { return cfg_; }
  const std::vector<double>& potential_field() const { return vfield_; }
  bool accuracy_warning() const { return accuracy_warning_; }

  double energy(const WaveField& f) const {
    return kinetic_energy(f) + potential_energy(f, vfield_);
  }

  // One step dt. Produces a fresh field; the input is never modified.
  WaveField step(const WaveField& f) const {
    if (f.grid.get() != grid_.get() && f.grid->size() != grid_->size())
      throw ConfigError("propagator: field grid mismatch");
    WaveField out{f.grid, f.values, f.time + (cfg_.imaginary_time ? 0.0 : cfg_.dt)};
    if (cfg_.scheme == Scheme::split_operator)
      step_split(out);
    else
      step_cayley(out);
    check_finite(out, "propagator step");
    if (grid_->boundary() == Boundary::absorbing_mask) apply_mask(out);
    if (cfg_.imaginary_time) normalize(out);
    return out;
  }

  using Observer = std::function<void(const WaveField&, std::size_t)>;

  // Applies `step` n times, invoking every observer after each step with the
  // new immutable field and the 1-based step index.
  WaveField run(WaveField f, std::size_t n_steps, std::span<const Observer> observers = {}) const {
    if (n_steps < 1) throw ConfigError("run: n_steps must be >= 1");
    for (std::size_t k = 1; k <= n_steps; ++k) {
      f = step(f);
      for (const auto& obs : observers) {
        try {
          obs(f, k);
        } catch (const std::exception& e) {
          throw PhysicsError("observer failed at step " + std::to_string(k) + ": " + e.what());
        }
      }
    }
    return f;
  }

 private:
  void step_split(WaveField& f) const {
    const Grid& g = *grid_;
    Fft::forward(g, f.values.data());
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= kin_half_[i];
    Fft::inverse(g, f.values.data());
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= pot_full_[i];
    Fft::forward(g, f.values.data());
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= kin_half_[i];
    Fft::inverse(g, f.values.data());
  }

  // Symmetrised sweep of half-step Cayley factors: axes 0..d-1 then d-1..0.
  void step_cayley(WaveField& f) const {
    const Grid& g = *grid_;
    const std::size_t d = g.ndim();
    for (std::size_t a = 0; a < d; ++a) cayley_axis(f, a);
    for (std::size_t a = d; a-- > 0;) cayley_axis(f, a);
  }

  void cayley_axis(WaveField& f, std::size_t axis) const {
    const Grid& g = *grid_;
    const std::size_t n = g.dim(axis);
    const std::size_t s = g.stride(axis);
    const std::size_t block = n * s;
    const std::size_t nblocks = g.size() / block;
    const bool cyclic = g.boundary() == Boundary::periodic;
    const double h = g.step(axis);
    // quarter step: Cayley parameter for a half-step factor
    const cplx theta = cfg_.imaginary_time ? cplx(0.25 * cfg_.dt, 0.0) : cplx(0.0, 0.25 * cfg_.dt);
    const double vsplit = 1.0 / static_cast<double>(g.ndim());
    const double kin = -0.5 / (h * h);

    std::vector<cplx> line(n), rhs(n), al(n), bl(n), cl(n), ar(n), br(n), cr(n);
    std::vector<double> vl(n);
    std::vector<cplx> scratch;
    for (std::size_t b = 0; b < nblocks; ++b) {
      for (std::size_t i = 0; i < s; ++i) {
        const std::size_t base = b * block + i;
        for (std::size_t j = 0; j < n; ++j) {
          line[j] = f.values[base + j * s];
          vl[j] = vfield_[base + j * s] * vsplit;
        }
        // A = M + theta (K + M V), B = M - theta (K + M V) with the Numerov
        // mass matrix M = (1,10,1)/12 and K the second-difference kinetic row.
        for (std::size_t j = 0; j < n; ++j) {
          const double vm = (j > 0) ? vl[j - 1] : (cyclic ? vl[n - 1] : 0.0);
          const double vp = (j + 1 < n) ? vl[j + 1] : (cyclic ? vl[0] : 0.0);
          const cplx ksub(kin, 0.0), kdia(-2.0 * kin, 0.0);
          const cplx msub(1.0 / 12.0, 0.0), mdia(10.0 / 12.0, 0.0);
          al[j] = msub + theta * (ksub + msub * vm);
          bl[j] = mdia + theta * (kdia + mdia * vl[j]);
          cl[j] = msub + theta * (ksub + msub * vp);
          ar[j] = msub - theta * (ksub + msub * vm);
          br[j] = mdia - theta * (kdia + mdia * vl[j]);
          cr[j] = msub - theta * (ksub + msub * vp);
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cplx fm = (j > 0) ? line[j - 1] : (cyclic ? line[n - 1] : cplx{});
          const cplx fp = (j + 1 < n) ? line[j + 1] : (cyclic ? line[0] : cplx{});
          rhs[j] = ar[j] * fm + br[j] * line[j] + cr[j] * fp;
        }
        std::vector<cplx> diag(bl);
        detail::solve_tridiagonal(al, diag, cl, rhs, cyclic, scratch);
        if (cfg_.solve_tolerance > 0.0) {
          double res = 0.0, scale = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const cplx xm = (j > 0) ? rhs[j - 1] : (cyclic ? rhs[n - 1] : cplx{});
            const cplx xp = (j + 1 < n) ? rhs[j + 1] : (cyclic ? rhs[0] : cplx{});
            const cplx ax = al[j] * xm + bl[j] * rhs[j] + cl[j] * xp;
            const cplx bv = [&] {
              const cplx fm = (j > 0) ? line[j - 1] : (cyclic ? line[n - 1] : cplx{});
              const cplx fp = (j + 1 < n) ? line[j + 1] : (cyclic ? line[0] : cplx{});
              return ar[j] * fm + br[j] * line[j] + cr[j] * fp;
            }();
            res += std::norm(ax - bv);
            scale += std::norm(bv);
          }
          if (!(res <= cfg_.solve_tolerance * cfg_.solve_tolerance * std::max(scale, 1e-300)))
            throw PhysicsError("cayley_adi: tridiagonal solve residual above tolerance");
        }
        for (std::size_t j = 0; j < n; ++j) f.values[base + j * s] = rhs[j];
      }
    }
  }

  void apply_mask(WaveField& f) const {
    const Grid& g = *grid_;
    std::array<std::size_t, 4> idx{};
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
      double m = 1.0;
      for (std::size_t a = 0; a < g.ndim(); ++a) m *= mask_[a][idx[a]];
      if (m != 1.0) f.values[flat] *= m;
    }
  }

  std::shared_ptr<const Grid> grid_;
  PotentialSpec potential_;
  PropagatorConfig cfg_;
  std::vector<double> vfield_;
  std::vector<cplx> kin_half_, pot_full_;
  std::vector<std::vector<double>> mask_;
  bool accuracy_warning_ = false;
};

struct RelaxationConfig {
  // coarse stage finds the state fast, the fine stage removes the O(dt^2)
  // splitting bias from the converged energy
  std::vector<double> dt_schedule{0.1, 0.02};
  double energy_tol = 1e-8;
  std::size_t max_iters = 50000;  // per stage
  Scheme scheme = Scheme::split_operator;
};

// Imaginary-time relaxation to the ground state of the given potential.
inline WaveField relax_ground_state(std::shared_ptr<const Grid> grid, const PotentialSpec& pot,
                                    const RelaxationConfig& rc, WaveField start) {
  if (rc.dt_schedule.empty()) throw ConfigError("relaxation: empty dt schedule");
  normalize(start);
  for (double dt : rc.dt_schedule) {
    PropagatorConfig pc;
    pc.scheme = rc.scheme;
    pc.dt = dt;
    pc.imaginary_time = true;
    Propagator prop(grid, pot, pc);
    double e_prev = prop.energy(start);
    bool converged = false;
    for (std::size_t it = 0; it < rc.max_iters && !converged; ++it) {
      start = prop.step(start);
      const double e = prop.energy(start);
      converged = std::abs(e - e_prev) < rc.energy_tol;
      e_prev = e;
    }
    if (!converged)
      throw PhysicsError("ground-state relaxation did not converge within max iterations");
  }
  return start;
}

// Normalised ground state of the soft-Coulomb well centred at `center` with
// screening length a (imaginary-time relaxation).
inline WaveField init_1s(std::shared_ptr<const Grid> grid, std::span<const double> center,
                         double a, RelaxationConfig rc = {}) {
  const Grid& g = *grid;
  for (std::size_t ax = 0; ax < g.ndim(); ++ax)
    if (!(a > 2.0 * g.step(ax)))
      throw ConfigError("init_1s: screening length under-resolved (need a > 2h)");
  SoftCoulomb sc;
  sc.center.assign(center.begin(), center.end());
  sc.charge = 1.0;
  sc.softening = a;
  PotentialSpec pot{sc};
  double sigma0 = std::max(1.0, a);
  for (std::size_t ax = 0; ax < g.ndim(); ++ax) sigma0 = std::max(sigma0, 3.2 * g.step(ax));
  std::vector<double> k0(g.ndim(), 0.0);
  WaveField start = init_gaussian(grid, center, k0, sigma0);
  return relax_ground_state(std::move(grid), pot, rc, std::move(start));
}

}  // namespace qtraj
