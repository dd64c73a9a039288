#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

#include "qtraj/errors.hpp"

// Tensor algebra of the extended Finsler function
//   Lambda(x, y) = T(qdot)/y0 - Q'(x) y0,   T = (1/2) sum_i m_i qdot_i^2
// on the extended space x = (t, q), y = (y0, qdot). Index 0 is the time
// component throughout. Everything is templated on the scalar type of y so
// vertical derivatives can be taken by complex-step differentiation.

namespace qtraj::finsler {

inline constexpr std::size_t kMaxExt = 5;  // time + up to 4 spatial axes

template <class S>
struct ExtVec {
  std::size_t m = 0;
  std::array<S, kMaxExt> v{};
  S& operator[](std::size_t i) { return v[i]; }
  const S& operator[](std::size_t i) const { return v[i]; }
};

template <class S>
struct ExtMat {
  std::size_t m = 0;
  std::array<S, kMaxExt * kMaxExt> a{};
  S& at(std::size_t i, std::size_t j) { return a[i * kMaxExt + j]; }
  const S& at(std::size_t i, std::size_t j) const { return a[i * kMaxExt + j]; }
};

template <class S>
struct ExtT3 {
  std::size_t m = 0;
  std::array<S, kMaxExt * kMaxExt * kMaxExt> a{};
  S& at(std::size_t i, std::size_t j, std::size_t k) {
    return a[(i * kMaxExt + j) * kMaxExt + k];
  }
  const S& at(std::size_t i, std::size_t j, std::size_t k) const {
    return a[(i * kMaxExt + j) * kMaxExt + k];
  }
};

// Q'(x) and its first x-derivatives at the evaluation point (grad[0] = d/dt).
struct QPoint {
  double value = 0.0;
  std::array<double, kMaxExt> grad{};
};

// The y-part of an extended state, templated for complex-step support.
template <class S>
struct YState {
  std::size_t n = 0;  // spatial dimensions
  S y0{};
  std::array<S, 4> qdot{};
  std::array<double, 4> mass{1.0, 1.0, 1.0, 1.0};

  std::size_t ext() const { return n + 1; }
};

template <class S>
S kinetic(const YState<S>& y) {
  S t{};
  for (std::size_t i = 0; i < y.n; ++i) t += 0.5 * y.mass[i] * y.qdot[i] * y.qdot[i];
  return t;
}

template <class S>
S lambda_fn(const YState<S>& y, double qp) {
  return kinetic(y) / y.y0 - qp * y.y0;
}

template <class S>
S lambda2(const YState<S>& y, double qp) {
  const S l = lambda_fn(y, qp);
  return l * l;
}

// g_ab = (1/2) d^2 Lambda^2 / dy^a dy^b, closed form.
template <class S>
ExtMat<S> metric(const YState<S>& y, double qp) {
  ExtMat<S> g;
  g.m = y.ext();
  const S T = kinetic(y);
  const S w = y.y0;
  const S w2 = w * w, w3 = w2 * w, w4 = w2 * w2;
  g.at(0, 0) = 3.0 * T * T / w4 + qp * qp;
  for (std::size_t i = 0; i < y.n; ++i) {
    const S mi_qi = y.mass[i] * y.qdot[i];
    g.at(0, i + 1) = g.at(i + 1, 0) = -2.0 * T * mi_qi / w3;
    for (std::size_t j = 0; j < y.n; ++j) {
      const S mj_qj = y.mass[j] * y.qdot[j];
      S v = mi_qi * mj_qj / w2;
      if (i == j) v += T * y.mass[i] / w2 - qp * y.mass[i];
      g.at(i + 1, j + 1) = v;
    }
  }
  return g;
}

// Gauss-Jordan inverse with partial pivoting; returns false when the pivot
// drops below `floor` times the matrix scale (degenerate metric).
template <class S>
bool invert(ExtMat<S> g, ExtMat<S>& out, double floor = 1e-12) {
  const std::size_t m = g.m;
  out.m = m;
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) scale = std::max(scale, std::abs(g.at(i, j)));
  if (scale == 0.0) return false;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) = (i == j) ? S{1.0} : S{};
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(g.at(r, col)) > std::abs(g.at(piv, col))) piv = r;
    if (std::abs(g.at(piv, col)) < floor * scale) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < m; ++j) {
        std::swap(g.at(piv, j), g.at(col, j));
        std::swap(out.at(piv, j), out.at(col, j));
      }
    }
    const S inv = S{1.0} / g.at(col, col);
    for (std::size_t j = 0; j < m; ++j) {
      g.at(col, j) *= inv;
      out.at(col, j) *= inv;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const S f = g.at(r, col);
      if (f == S{}) continue;
      for (std::size_t j = 0; j < m; ++j) {
        g.at(r, j) -= f * g.at(col, j);
        out.at(r, j) -= f * out.at(col, j);
      }
    }
  }
  return true;
}

// C_abc = (1/4) d^3 Lambda^2 / dy^a dy^b dy^c; Q' drops out entirely.
template <class S>
ExtT3<S> cartan(const YState<S>& y) {
  ExtT3<S> c;
  c.m = y.ext();
  const S T = kinetic(y);
  const S w = y.y0;
  const S w2 = w * w, w3 = w2 * w, w4 = w2 * w2, w5 = w4 * w;
  c.at(0, 0, 0) = -6.0 * T * T / w5;
  for (std::size_t i = 0; i < y.n; ++i) {
    const S mi_qi = y.mass[i] * y.qdot[i];
    const S c00i = 3.0 * T * mi_qi / w4;
    c.at(0, 0, i + 1) = c.at(0, i + 1, 0) = c.at(i + 1, 0, 0) = c00i;
    for (std::size_t j = 0; j < y.n; ++j) {
      const S mj_qj = y.mass[j] * y.qdot[j];
      S c0ij = -(mi_qi * mj_qj) / w3;
      if (i == j) c0ij -= T * y.mass[i] / w3;
      c.at(0, i + 1, j + 1) = c.at(i + 1, 0, j + 1) = c.at(i + 1, j + 1, 0) = c0ij;
      for (std::size_t k = 0; k < y.n; ++k) {
        const S mk_qk = y.mass[k] * y.qdot[k];
        S v{};
        if (i == k) v += y.mass[i] * mj_qj;
        if (j == k) v += y.mass[j] * mi_qi;
        if (i == j) v += y.mass[i] * mk_qk;
        c.at(i + 1, j + 1, k + 1) = v / (2.0 * w2);
      }
    }
  }
  return c;
}

// dg_ab/dx^c by the chain rule through Q'(x); only the Q'-carrying blocks
// survive and none of them depends on y.
template <class S>
ExtMat<S> dmetric_dx(const YState<S>& y, const QPoint& qp, std::size_t c) {
  ExtMat<S> d;
  d.m = y.ext();
  const double dq = qp.grad[c];
  d.at(0, 0) = 2.0 * qp.value * dq;
  for (std::size_t i = 0; i < y.n; ++i) d.at(i + 1, i + 1) = -y.mass[i] * dq;
  return d;
}

// Gamma^a_bc = (1/2) g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)
template <class S>
bool christoffel(const YState<S>& y, const QPoint& qp, ExtT3<S>& out, double floor = 1e-12) {
  const std::size_t m = y.ext();
  ExtMat<S> ginv;
  if (!invert(metric(y, qp.value), ginv, floor)) return false;
  std::array<ExtMat<S>, kMaxExt> dg;
  for (std::size_t c = 0; c < m; ++c) dg[c] = dmetric_dx(y, qp, c);
  out.m = m;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c) {
        S s{};
        for (std::size_t d = 0; d < m; ++d)
          s += ginv.at(a, d) * (dg[b].at(d, c) + dg[c].at(d, b) - dg[d].at(b, c));
        out.at(a, b, c) = 0.5 * s;
      }
  return true;
}

// geodesic spray G^a = Gamma^a_bc y^b y^c
template <class S>
bool spray(const YState<S>& y, const QPoint& qp, ExtVec<S>& out, double floor = 1e-12) {
  ExtT3<S> gamma;
  if (!christoffel(y, qp, gamma, floor)) return false;
  const std::size_t m = y.ext();
  ExtVec<S> yy;
  yy.m = m;
  yy[0] = y.y0;
  for (std::size_t i = 0; i < y.n; ++i) yy[i + 1] = y.qdot[i];
  out.m = m;
  for (std::size_t a = 0; a < m; ++a) {
    S s{};
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c) s += gamma.at(a, b, c) * yy[b] * yy[c];
    out[a] = s;
  }
  return true;
}

// Nonlinear connection, direct form:
//   N^a_b = Gamma^a_bc y^c - C^a_bc Gamma^c_pq y^p y^q
template <class S>
bool nonlinear_connection(const YState<S>& y, const QPoint& qp, ExtMat<S>& out,
                          double floor = 1e-12) {
  const std::size_t m = y.ext();
  ExtT3<S> gamma;
  if (!christoffel(y, qp, gamma, floor)) return false;
  ExtMat<S> ginv;
  if (!invert(metric(y, qp.value), ginv, floor)) return false;
  const ExtT3<S> c_low = cartan(y);
  ExtVec<S> yy;
  yy.m = m;
  yy[0] = y.y0;
  for (std::size_t i = 0; i < y.n; ++i) yy[i + 1] = y.qdot[i];
  // spray from the already-computed Christoffels
  ExtVec<S> g2;
  g2.m = m;
  for (std::size_t c = 0; c < m; ++c) {
    S s{};
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q) s += gamma.at(c, p, q) * yy[p] * yy[q];
    g2[c] = s;
  }
  out.m = m;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      S s{};
      for (std::size_t c = 0; c < m; ++c) s += gamma.at(a, b, c) * yy[c];
      for (std::size_t c = 0; c < m; ++c) {
        // C^a_bc = g^{ad} C_dbc
        S cabc{};
        for (std::size_t d = 0; d < m; ++d) cabc += ginv.at(a, d) * c_low.at(d, b, c);
        s -= cabc * g2[c];
      }
      out.at(a, b) = s;
    }
  return true;
}

// Nonlinear connection, vertical-derivative form:
//   N^a_b = (1/2) dbar_b (Gamma^a_cd y^c y^d)
// evaluated by complex-step differentiation of the spray (exact to roundoff).
inline bool nonlinear_connection_vertical(const YState<double>& y, const QPoint& qp,
                                          ExtMat<double>& out, double floor = 1e-12) {
  using C = std::complex<double>;
  const std::size_t m = y.ext();
  constexpr double h = 1e-200;
  out.m = m;
  for (std::size_t b = 0; b < m; ++b) {
    YState<C> yc;
    yc.n = y.n;
    yc.mass = y.mass;
    yc.y0 = C(y.y0, b == 0 ? h : 0.0);
    for (std::size_t i = 0; i < y.n; ++i)
      yc.qdot[i] = C(y.qdot[i], (b == i + 1) ? h : 0.0);
    ExtVec<C> g;
    if (!spray(yc, qp, g, floor)) return false;
    for (std::size_t a = 0; a < m; ++a) out.at(a, b) = 0.5 * g[a].imag() / h;
  }
  return true;
}

}  // namespace qtraj::finsler
