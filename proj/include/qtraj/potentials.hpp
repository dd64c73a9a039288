#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/grid.hpp"

namespace qtraj {

struct PotentialSpec;

struct FreePotential {};

// V = -Z / sqrt(|q - center|^2 + a^2)
struct SoftCoulomb {
  std::vector<double> center;
  double charge = 1.0;
  double softening = 0.5;
};

// Rectangular barrier of height V0 spanning `thickness` around `plane` along
// the normal axis, opened by slit intervals on the transverse axis. All edges
// carry an erf profile of width `smoothing`.
struct SlabSlits {
  std::size_t normal_axis = 0;
  std::size_t transverse_axis = 1;
  double plane = 0.0;
  double thickness = 1.5;
  double height = 10.0;
  std::vector<std::pair<double, double>> slits;  // [lo, hi] intervals
  double smoothing = 0.6;
};

struct SumPotential {
  std::vector<PotentialSpec> terms;
};

struct PotentialSpec {
  std::variant<FreePotential, SoftCoulomb, SlabSlits, SumPotential> node;
};

namespace detail {

inline double smooth_step(double t) { return 0.5 * (1.0 + std::erf(t)); }
inline double smooth_step_d(double t) {
  return std::exp(-t * t) / std::sqrt(std::numbers::pi);
}
inline double smooth_step_dd(double t) {
  return -2.0 * t * std::exp(-t * t) / std::sqrt(std::numbers::pi);
}

// window(x) = step((x-lo)/s) * step((hi-x)/s) and its x-derivatives
struct Window {
  double v, d, dd;
};

inline Window window(double x, double lo, double hi, double s) {
  const double ta = (x - lo) / s, tb = (hi - x) / s;
  const double ua = smooth_step(ta), ub = smooth_step(tb);
  const double da = smooth_step_d(ta) / s, db = -smooth_step_d(tb) / s;
  const double dda = smooth_step_dd(ta) / (s * s), ddb = smooth_step_dd(tb) / (s * s);
  return {ua * ub, da * ub + ua * db, dda * ub + 2.0 * da * db + ua * ddb};
}

}  // namespace detail

inline void validate(const PotentialSpec& spec, std::size_t ndim) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SoftCoulomb>) {
          if (p.center.size() != ndim) throw ConfigError("soft_coulomb: center dimension mismatch");
          if (!(p.softening > 0.0)) throw ConfigError("soft_coulomb: softening must be > 0");
        } else if constexpr (std::is_same_v<T, SlabSlits>) {
          if (p.normal_axis >= ndim) throw ConfigError("slab_slits: normal axis out of range");
          if (!p.slits.empty() && p.transverse_axis >= ndim)
            throw ConfigError("slab_slits: transverse axis out of range");
          if (!(p.height > 0.0)) throw ConfigError("slab_slits: height must be > 0");
          if (!(p.smoothing > 0.0)) throw ConfigError("slab_slits: smoothing must be > 0");
          if (!(p.thickness > 0.0)) throw ConfigError("slab_slits: thickness must be > 0");
          for (std::size_t i = 0; i < p.slits.size(); ++i) {
            if (!(p.slits[i].first < p.slits[i].second))
              throw ConfigError("slab_slits: slit interval must have lo < hi");
            for (std::size_t j = i + 1; j < p.slits.size(); ++j) {
              const bool disjoint = p.slits[i].second <= p.slits[j].first ||
                                    p.slits[j].second <= p.slits[i].first;
              if (!disjoint) throw ConfigError("slab_slits: slit intervals must be disjoint");
            }
          }
        } else if constexpr (std::is_same_v<T, SumPotential>) {
          for (const auto& t : p.terms) validate(t, ndim);
        }
      },
      spec.node);
}

inline double potential_value(const PotentialSpec& spec, std::span<const double> q) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FreePotential>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, SoftCoulomb>) {
          double r2 = 0.0;
          for (std::size_t a = 0; a < q.size(); ++a) {
            const double d = q[a] - p.center[a];
            r2 += d * d;
          }
          return -p.charge / std::sqrt(r2 + p.softening * p.softening);
        } else if constexpr (std::is_same_v<T, SlabSlits>) {
          const double x = q[p.normal_axis];
          const auto lx = detail::window(x, p.plane - 0.5 * p.thickness,
                                         p.plane + 0.5 * p.thickness, p.smoothing);
          double block = 1.0;
          if (!p.slits.empty()) {
            const double y = q[p.transverse_axis];
            double open = 0.0;
            for (const auto& s : p.slits)
              open += detail::window(y, s.first, s.second, p.smoothing).v;
            block = 1.0 - open;
          }
          return p.height * lx.v * block;
        } else {
          double v = 0.0;
          for (const auto& t : p.terms) v += potential_value(t, q);
          return v;
        }
      },
      spec.node);
}

inline std::vector<double> potential_gradient(const PotentialSpec& spec,
                                              std::span<const double> q) {
  return std::visit(
      [&](const auto& p) -> std::vector<double> {
        using T = std::decay_t<decltype(p)>;
        std::vector<double> grad(q.size(), 0.0);
        if constexpr (std::is_same_v<T, FreePotential>) {
          return grad;
        } else if constexpr (std::is_same_v<T, SoftCoulomb>) {
          double r2 = 0.0;
          for (std::size_t a = 0; a < q.size(); ++a) {
            const double d = q[a] - p.center[a];
            r2 += d * d;
          }
          const double rho = r2 + p.softening * p.softening;
          const double f = p.charge / (rho * std::sqrt(rho));
          for (std::size_t a = 0; a < q.size(); ++a) grad[a] = f * (q[a] - p.center[a]);
          return grad;
        } else if constexpr (std::is_same_v<T, SlabSlits>) {
          const double x = q[p.normal_axis];
          const auto lx = detail::window(x, p.plane - 0.5 * p.thickness,
                                         p.plane + 0.5 * p.thickness, p.smoothing);
          double block = 1.0, dblock = 0.0;
          if (!p.slits.empty()) {
            const double y = q[p.transverse_axis];
            for (const auto& s : p.slits) {
              const auto w = detail::window(y, s.first, s.second, p.smoothing);
              block -= w.v;
              dblock -= w.d;
            }
          }
          grad[p.normal_axis] = p.height * lx.d * block;
          if (!p.slits.empty()) grad[p.transverse_axis] += p.height * lx.v * dblock;
          return grad;
        } else {
          for (const auto& t : p.terms) {
            const auto g = potential_gradient(t, q);
            for (std::size_t a = 0; a < q.size(); ++a) grad[a] += g[a];
          }
          return grad;
        }
      },
      spec.node);
}

// Spatial Hessian; used by geometry diagnostics.
inline std::vector<std::vector<double>> potential_hessian(const PotentialSpec& spec,
                                                          std::span<const double> q) {
  const std::size_t n = q.size();
  std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SoftCoulomb>) {
          double r2 = 0.0;
          for (std::size_t a = 0; a < n; ++a) {
            const double d = q[a] - p.center[a];
            r2 += d * d;
          }
          const double rho = r2 + p.softening * p.softening;
          const double f3 = p.charge / (rho * std::sqrt(rho));
          const double f5 = 3.0 * p.charge / (rho * rho * std::sqrt(rho));
          for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
              const double da = q[a] - p.center[a], db = q[b] - p.center[b];
              h[a][b] = (a == b ? f3 : 0.0) - f5 * da * db;
            }
        } else if constexpr (std::is_same_v<T, SlabSlits>) {
          const double x = q[p.normal_axis];
          const auto lx = detail::window(x, p.plane - 0.5 * p.thickness,
                                         p.plane + 0.5 * p.thickness, p.smoothing);
          double block = 1.0, dblock = 0.0, ddblock = 0.0;
          if (!p.slits.empty()) {
            const double y = q[p.transverse_axis];
            for (const auto& s : p.slits) {
              const auto w = detail::window(y, s.first, s.second, p.smoothing);
              block -= w.v;
              dblock -= w.d;
              ddblock -= w.dd;
            }
          }
          const std::size_t nx = p.normal_axis, ny = p.transverse_axis;
          h[nx][nx] = p.height * lx.dd * block;
          if (!p.slits.empty()) {
            h[ny][ny] += p.height * lx.v * ddblock;
            h[nx][ny] += p.height * lx.d * dblock;
            h[ny][nx] += p.height * lx.d * dblock;
          }
        } else if constexpr (std::is_same_v<T, SumPotential>) {
          for (const auto& t : p.terms) {
            const auto ht = potential_hessian(t, q);
            for (std::size_t a = 0; a < n; ++a)
              for (std::size_t b = 0; b < n; ++b) h[a][b] += ht[a][b];
          }
        }
      },
      spec.node);
  return h;
}

// Evaluates the potential on every grid node.
inline std::vector<double> evaluate(const PotentialSpec& spec, const Grid& g) {
  validate(spec, g.ndim());
  std::vector<double> out(g.size());
  std::array<std::size_t, 4> idx{};
  std::array<double, 4> q{};
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    for (std::size_t a = 0; a < g.ndim(); ++a) q[a] = g.axis_coords(a)[idx[a]];
    out[flat] = potential_value(spec, std::span<const double>(q.data(), g.ndim()));
  }
  return out;
}

}  // namespace qtraj
