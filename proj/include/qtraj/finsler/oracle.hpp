#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/finsler/tensors.hpp"
#include "qtraj/pilot.hpp"
#include "qtraj/potentials.hpp"

namespace qtraj::finsler {

// Sample of the generalized quantum potential field at one (t, q).
struct OracleSample {
  double value = 0.0;
  double d_dt = 0.0;
  std::vector<double> grad;                  // spatial gradient
  std::vector<std::vector<double>> hessian;  // spatial, empty if unavailable
};

// Supplier of Q(t, q) and its derivatives: an analytic test field or a pair
// of pilot snapshots (time interpolation between them).
class QFieldOracle {
 public:
  virtual ~QFieldOracle() = default;
  virtual std::size_t ndim() const = 0;
  virtual bool has_hessian() const { return false; }
  virtual OracleSample eval(double t, std::span<const double> q) const = 0;
};

// Q(t,q) = offset + sum_i amp_i sin(k_i q_i + omega_i t + phase_i)
// smooth, bounded, fully differentiable test field
class SinusoidalQField final : public QFieldOracle {
 public:
  struct Mode {
    double amp = 0.3, k = 0.5, omega = 0.2, phase = 0.0;
  };

  SinusoidalQField(double offset, std::vector<Mode> modes)
      : offset_(offset), modes_(std::move(modes)) {}

  std::size_t ndim() const override { return modes_.size(); }
  bool has_hessian() const override { return true; }

  OracleSample eval(double t, std::span<const double> q) const override {
    const std::size_t n = modes_.size();
    OracleSample s;
    s.value = offset_;
    s.grad.assign(n, 0.0);
    s.hessian.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& mo = modes_[i];
      const double arg = mo.k * q[i] + mo.omega * t + mo.phase;
      s.value += mo.amp * std::sin(arg);
      s.d_dt += mo.amp * mo.omega * std::cos(arg);
      s.grad[i] = mo.amp * mo.k * std::cos(arg);
      s.hessian[i][i] = -mo.amp * mo.k * mo.k * std::sin(arg);
    }
    return s;
  }

 private:
  double offset_;
  std::vector<Mode> modes_;
};

class ConstantQField final : public QFieldOracle {
 public:
  ConstantQField(double value, std::size_t ndim) : value_(value), ndim_(ndim) {}
  std::size_t ndim() const override { return ndim_; }
  bool has_hessian() const override { return true; }
  OracleSample eval(double, std::span<const double>) const override {
    OracleSample s;
    s.value = value_;
    s.grad.assign(ndim_, 0.0);
    s.hessian.assign(ndim_, std::vector<double>(ndim_, 0.0));
    return s;
  }

 private:
  double value_;
  std::size_t ndim_;
};

// Oracle backed by two pilot snapshots: Q linear in t between them, spatial
// data multilinear on the grid, dQ/dt by the forward difference of the pair.
// Evaluation slightly outside [t0, t1] extrapolates with the same slopes
// (RK4 stages may poke past the window edge).
class SnapshotQOracle final : public QFieldOracle {
 public:
  SnapshotQOracle() = default;

  void set_window(const PilotField* now, const PilotField* next) {
    now_ = now;
    next_ = next;
  }

  std::size_t ndim() const override { return now_ ? now_->grid->ndim() : 0; }
  bool has_hessian() const override { return now_ && !now_->hess_q.empty(); }

  OracleSample eval(double t, std::span<const double> q) const override {
    if (!now_ || !next_) throw PhysicsError("snapshot oracle: no window set");
    const Grid& g = *now_->grid;
    const std::size_t n = g.ndim();
    const double dt = next_->time - now_->time;
    const double theta = dt > 0.0 ? (t - now_->time) / dt : 0.0;
    OracleSample s;
    const double q0 = sample_grid<double>(g, now_->quantum_potential, q);
    const double q1 = sample_grid<double>(g, next_->quantum_potential, q);
    s.value = (1.0 - theta) * q0 + theta * q1;
    s.d_dt = dt > 0.0 ? (q1 - q0) / dt : 0.0;
    s.grad.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      const double ga = sample_grid<double>(g, now_->grad_q[a], q);
      const double gb = sample_grid<double>(g, next_->grad_q[a], q);
      s.grad[a] = (1.0 - theta) * ga + theta * gb;
    }
    if (!now_->hess_q.empty() && !next_->hess_q.empty()) {
      s.hessian.assign(n, std::vector<double>(n, 0.0));
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          const double ha = sample_grid<double>(g, now_->hess_q[a * n + b], q);
          const double hb = sample_grid<double>(g, next_->hess_q[a * n + b], q);
          s.hessian[a][b] = (1.0 - theta) * ha + theta * hb;
        }
    }
    return s;
  }

 private:
  const PilotField* now_ = nullptr;
  const PilotField* next_ = nullptr;
};

// Bundles the oracle with an optional folded external potential into the
// QPoint consumed by the tensor algebra: Q'(x) = Q(t,q) [+ V(q)].
struct GeneralizedQ {
  const QFieldOracle* oracle = nullptr;
  const PotentialSpec* folded_potential = nullptr;

  QPoint point(double t, std::span<const double> q) const {
    const OracleSample s = oracle->eval(t, q);
    QPoint p;
    p.value = s.value;
    p.grad[0] = s.d_dt;
    for (std::size_t i = 0; i < s.grad.size(); ++i) p.grad[i + 1] = s.grad[i];
    if (folded_potential) {
      p.value += potential_value(*folded_potential, q);
      const auto gv = potential_gradient(*folded_potential, q);
      for (std::size_t i = 0; i < gv.size(); ++i) p.grad[i + 1] += gv[i];
    }
    return p;
  }
};

}  // namespace qtraj::finsler
