#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "qtraj/derivatives.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/grid.hpp"
#include "qtraj/trajectory.hpp"
#include "qtraj/wavefield.hpp"

namespace qtraj {

// Derived pilot-wave quantities on the grid of a wavefield snapshot.
// Under the node mask (A < eps) every field holds the value of the nearest
// unmasked node reached by walking uphill in A.
struct PilotField {
  std::shared_ptr<const Grid> grid;
  double time = 0.0;
  std::vector<double> amplitude;                       // A = |psi|
  std::vector<double> quantum_potential;               // Q = -(1/2) lap(A)/A
  std::vector<std::vector<double>> velocity;           // v_a = Im(d_a psi / psi)
  std::vector<std::vector<double>> grad_q;             // dQ/dq_a
  std::vector<std::vector<double>> hess_q;             // optional, row-major (a,b)
  std::vector<std::uint8_t> node_mask;                 // 1 where A < eps
  double eps_node = 0.0;
  std::size_t masked_count = 0;
};

struct PilotOptions {
  double node_eps_rel = 1e-6;  // eps = rel * max(A)
  bool with_q_hessian = false;
};

namespace detail {

// For every masked node finds a source node to copy derived values from,
// walking toward the unmasked region along the discrete amplitude gradient.
// Returns source flat index per node (identity for unmasked nodes).
inline std::vector<std::size_t> node_fill_sources(const Grid& g,
                                                  std::span<const double> amplitude,
                                                  std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> src(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) src[i] = i;
  std::vector<std::uint8_t> open(mask.begin(), mask.end());
  std::size_t remaining = 0;
  for (auto m : mask) remaining += m;
  std::array<std::size_t, 4> idx{};
  std::size_t guard = 0;
  while (remaining > 0 && guard++ < 4 * g.size()) {
    bool progress = false;
    std::vector<std::size_t> close_list;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      if (!open[flat]) continue;
      g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
      double best_a = -1.0;
      std::size_t best = kNever;
      for (std::size_t a = 0; a < g.ndim(); ++a) {
        for (int d : {-1, +1}) {
          long long j = static_cast<long long>(idx[a]) + d;
          const auto n = static_cast<long long>(g.dim(a));
          if (g.boundary() == Boundary::periodic) {
            j = (j % n + n) % n;
          } else if (j < 0 || j >= n) {
            continue;
          }
          const std::size_t nb = flat + (static_cast<std::size_t>(j) - idx[a]) * g.stride(a);
          if (!open[nb] && amplitude[nb] > best_a) {
            best_a = amplitude[nb];
            best = nb;
          }
        }
      }
      if (best != kNever) {
        src[flat] = src[best];
        close_list.push_back(flat);
        progress = true;
      }
    }
    for (std::size_t flat : close_list) open[flat] = 0;
    remaining -= close_list.size();
    if (!progress) break;  // isolated all-masked pocket; keep identity sources
  }
  return src;
}

inline void apply_fill(std::span<double> field, std::span<const std::size_t> src,
                       std::span<const std::uint8_t> mask) {
  for (std::size_t i = 0; i < field.size(); ++i)
    if (mask[i]) field[i] = field[src[i]];
}

}  // namespace detail

inline PilotField derive_pilot(const WaveField& f, const PilotOptions& opt = {}) {
  const Grid& g = *f.grid;
  PilotField p;
  p.grid = f.grid;
  p.time = f.time;
  p.amplitude.resize(g.size());
  double amax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    p.amplitude[i] = std::abs(f.values[i]);
    amax = std::max(amax, p.amplitude[i]);
  }
  p.eps_node = opt.node_eps_rel * amax;
  p.node_mask.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    p.node_mask[i] = p.amplitude[i] < p.eps_node ? 1 : 0;
    p.masked_count += p.node_mask[i];
  }
  if (p.masked_count == g.size() || amax == 0.0)
    throw PhysicsError("derive_pilot: field is zero everywhere (all nodes)");

  const auto grad_psi = gradient_spectral(g, f.values);
  p.velocity.assign(g.ndim(), std::vector<double>(g.size(), 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (p.node_mask[i]) continue;
    const cplx inv = 1.0 / f.values[i];
    for (std::size_t a = 0; a < g.ndim(); ++a)
      p.velocity[a][i] = (grad_psi[a][i] * inv).imag();
  }

  const auto lapA = laplacian_spectral(g, p.amplitude);
  p.quantum_potential.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!p.node_mask[i]) p.quantum_potential[i] = -0.5 * lapA[i] / p.amplitude[i];

  const auto src = detail::node_fill_sources(g, p.amplitude, p.node_mask);
  detail::apply_fill(p.quantum_potential, src, p.node_mask);
  for (auto& va : p.velocity) detail::apply_fill(va, src, p.node_mask);

  const auto gq = [&] {
    std::vector<cplx> qc(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) qc[i] = p.quantum_potential[i];
    return gradient_spectral(g, qc);
  }();
  p.grad_q.assign(g.ndim(), std::vector<double>(g.size()));
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    for (std::size_t i = 0; i < g.size(); ++i) p.grad_q[a][i] = gq[a][i].real();
    detail::apply_fill(p.grad_q[a], src, p.node_mask);
  }

  if (opt.with_q_hessian) {
    p.hess_q.assign(g.ndim() * g.ndim(), {});
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      std::vector<cplx> da(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) da[i] = p.grad_q[a][i];
      const auto gb = gradient_spectral(g, da);
      for (std::size_t b = 0; b < g.ndim(); ++b) {
        auto& h = p.hess_q[a * g.ndim() + b];
        h.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) h[i] = gb[b][i].real();
        detail::apply_fill(h, src, p.node_mask);
      }
    }
  }
  return p;
}

// true if any corner of the cell containing p is a node-mask point
inline bool touches_node_mask(const PilotField& pf, std::span<const double> p) {
  const Grid& g = *pf.grid;
  std::array<double, 4> q{};
  for (std::size_t a = 0; a < g.ndim(); ++a) q[a] = p[a];
  // reuse multilinear machinery on the mask as doubles would allocate; do it
  // directly on the containing cell corners
  std::array<std::size_t, 4> i0{};
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    const std::size_t n = g.dim(a);
    double x = q[a];
    if (g.boundary() == Boundary::periodic) x = g.wrap(a, x);
    const double u = (x - g.origin(a)) / g.step(a);
    if (!(u >= 0.0 && u <= static_cast<double>(n - 1))) return false;  // outside: caller handles
    std::size_t i = static_cast<std::size_t>(u);
    if (i >= n - 1) i = n - 2;
    i0[a] = i;
  }
  const std::size_t ncorner = std::size_t{1} << g.ndim();
  for (std::size_t c = 0; c < ncorner; ++c) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      std::size_t ia = i0[a] + ((c >> a) & 1u);
      if (ia >= g.dim(a)) ia -= g.dim(a);
      flat += ia * g.stride(a);
    }
    if (pf.node_mask[flat]) return true;
  }
  return false;
}

enum class SampleMode { density_sampled, regular_grid_line };

// Initial positions for a trajectory swarm. density_sampled draws i.i.d.
// from |psi|^2 by inverse CDF over grid cells (uniform jitter within a cell);
// regular_grid_line returns n equispaced points on an axis-aligned line of
// length `line_length` through the wavepacket centre.
inline std::vector<std::vector<double>> sample_initial_positions(
    const WaveField& f, std::size_t n, SampleMode mode, std::uint64_t seed,
    std::size_t line_axis = 0, double line_length = 0.0) {
  if (n < 1) throw ConfigError("sample_initial_positions: need n >= 1");
  const Grid& g = *f.grid;
  std::vector<std::vector<double>> out;
  out.reserve(n);
  if (mode == SampleMode::regular_grid_line) {
    if (line_axis >= g.ndim()) throw ConfigError("sample_initial_positions: line axis out of range");
    const auto center = expectation_position(f);
    if (n == 1) {
      out.push_back(center);
      return out;
    }
    if (!(line_length > 0.0))
      throw ConfigError("sample_initial_positions: line length must be > 0 for n > 1");
    for (std::size_t i = 0; i < n; ++i) {
      auto p = center;
      p[line_axis] += -0.5 * line_length +
                      line_length * static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(std::move(p));
    }
    return out;
  }

  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += std::norm(f.values[i]);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw PhysicsError("sample_initial_positions: degenerate density");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::array<std::size_t, 4> idx{};
  for (std::size_t s = 0; s < n; ++s) {
    const double u = uni(rng) * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t flat = static_cast<std::size_t>(std::distance(cdf.begin(), it));
    if (flat >= g.size()) flat = g.size() - 1;
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    std::vector<double> p(g.ndim());
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      const double jitter = (uni(rng) - 0.5) * g.step(a);
      double x = g.axis_coords(a)[idx[a]] + jitter;
      // keep samples inside the node hull in absorbing mode
      x = std::clamp(x, g.origin(a), g.axis_coords(a).back());
      p[a] = x;
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Classic RK4 on dq/dt = v(q,t) between two pilot snapshots, with v
// interpolated linearly in time and multilinearly in space. Trajectories in
// node-mask cells get their speed clamped to v_max (if positive) and are
// flagged; trajectories leaving the box terminate.
class BohmianStepper {
 public:
  BohmianStepper(std::vector<std::vector<double>> starts, const PilotField& pilot0,
                 double v_max = 0.0)
      : v_max_(v_max) {
    const Grid& g = *pilot0.grid;
    bundle_.kind = TrajectoryKind::bohmian;
    bundle_.ndim = g.ndim();
    bundle_.times.push_back(pilot0.time);
    const std::size_t nt = starts.size();
    bundle_.positions.resize(nt);
    bundle_.velocities.resize(nt);
    bundle_.terminated_at.assign(nt, kNever);
    bundle_.masked_at.assign(nt, kNever);
    for (std::size_t t = 0; t < nt; ++t) {
      auto& q = starts[t];
      if (q.size() != g.ndim()) throw ConfigError("trajectory start dimension mismatch");
      std::vector<double> v(g.ndim(), 0.0);
      if (g.contains(q)) {
        v = velocity_at(pilot0, pilot0, 0.0, q, t, 0);
      } else {
        bundle_.terminated_at[t] = 0;
      }
      append(t, q, v);
    }
  }

  // Advances every live trajectory from `now.time` to `next.time`.
  void advance(const PilotField& now, const PilotField& next) {
    const double dt = next.time - now.time;
    if (!(dt > 0.0)) throw ConfigError("BohmianStepper: pilot snapshots out of order");
    const std::size_t step = bundle_.times.size();
    bundle_.times.push_back(next.time);
    std::vector<double> q(bundle_.ndim), qs(bundle_.ndim);
    for (std::size_t t = 0; t < bundle_.count(); ++t) {
      bundle_.position_at(t, step - 1, q);
      if (bundle_.terminated_at[t] != kNever) {
        append(t, q, std::vector<double>(bundle_.ndim, 0.0));
        continue;
      }
      std::array<std::vector<double>, 4> k;
      bool died = false;
      const double thetas[4] = {0.0, 0.5, 0.5, 1.0};
      for (int s = 0; s < 4 && !died; ++s) {
        qs = q;
        if (s > 0) {
          const double c = (s == 3) ? dt : 0.5 * dt;
          for (std::size_t a = 0; a < bundle_.ndim; ++a) qs[a] += c * k[s - 1][a];
        }
        if (!now.grid->contains(qs)) {
          died = true;
          break;
        }
        k[s] = velocity_at(now, next, thetas[s], qs, t, step);
      }
      if (died) {
        bundle_.terminated_at[t] = step;
        append(t, q, std::vector<double>(bundle_.ndim, 0.0));
        continue;
      }
      std::vector<double> qn(bundle_.ndim), vn(bundle_.ndim);
      for (std::size_t a = 0; a < bundle_.ndim; ++a) {
        qn[a] = q[a] + dt / 6.0 * (k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]);
        vn[a] = k[3][a];
      }
      if (now.grid->boundary() == Boundary::periodic)
        for (std::size_t a = 0; a < bundle_.ndim; ++a) qn[a] = now.grid->wrap(a, qn[a]);
      if (!now.grid->contains(qn)) bundle_.terminated_at[t] = step;
      append(t, qn, vn);
    }
  }

  TrajectoryBundle& bundle() { return bundle_; }
  const TrajectoryBundle& bundle() const { return bundle_; }

 private:
  std::vector<double> velocity_at(const PilotField& now, const PilotField& next, double theta,
                                  std::span<const double> q, std::size_t traj,
                                  std::size_t step) {
    const Grid& g = *now.grid;
    std::vector<double> v(g.ndim());
    double speed2 = 0.0;
    for (std::size_t a = 0; a < g.ndim(); ++a) {
      const double v0 = sample_grid<double>(g, now.velocity[a], q);
      const double v1 = theta > 0.0 ? sample_grid<double>(g, next.velocity[a], q) : v0;
      v[a] = (1.0 - theta) * v0 + theta * v1;
      if (!std::isfinite(v[a])) throw PhysicsError("bohmian step: NaN velocity");
      speed2 += v[a] * v[a];
    }
    if (touches_node_mask(now, q) || touches_node_mask(next, q)) {
      if (bundle_.masked_at[traj] == kNever) bundle_.masked_at[traj] = step;
      if (v_max_ > 0.0 && speed2 > v_max_ * v_max_) {
        const double s = v_max_ / std::sqrt(speed2);
        for (auto& x : v) x *= s;
      }
    }
    return v;
  }

  void append(std::size_t traj, std::span<const double> q, std::span<const double> v) {
    auto& P = bundle_.positions[traj];
    auto& V = bundle_.velocities[traj];
    P.insert(P.end(), q.begin(), q.end());
    V.insert(V.end(), v.begin(), v.end());
  }

  double v_max_;
  TrajectoryBundle bundle_;
};

}  // namespace qtraj
