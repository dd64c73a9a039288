#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qtraj/errors.hpp"

namespace qtraj {

enum class Boundary { periodic, absorbing_mask };

// Declarative description of a uniform Cartesian grid, 1-4 axes.
struct GridSpec {
  std::vector<std::size_t> dims;   // points per axis, each >= 8
  std::vector<double> box;         // box length per axis (bohr)
  std::vector<double> origin;      // coordinate of node 0 per axis (bohr)
  Boundary boundary = Boundary::absorbing_mask;
  double mask_rim_fraction = 0.10;              // absorbing rim per side
  std::size_t point_budget = std::size_t{1} << 26;
};

// Uniform Cartesian grid with precomputed axis coordinates and spectral
// wavenumbers (standard DFT ordering, k_max = pi/h). Row-major storage,
// axis 0 slowest. Immutable after construction.
class Grid {
 public:
  explicit Grid(GridSpec spec) : spec_(std::move(spec)) {
    const std::size_t nd = spec_.dims.size();
    if (nd == 0 || nd > 4) throw ConfigError("grid must have 1-4 axes");
    if (spec_.box.size() != nd || spec_.origin.size() != nd)
      throw ConfigError("grid dims/box/origin size mismatch");
    size_ = 1;
    for (std::size_t a = 0; a < nd; ++a) {
      if (spec_.dims[a] < 8) throw ConfigError("grid axis needs >= 8 points");
      if (!(spec_.box[a] > 0.0)) throw ConfigError("grid box length must be > 0");
      if (size_ > spec_.point_budget / spec_.dims[a])
        throw ConfigError("grid point budget exceeded (" +
                          std::to_string(spec_.point_budget) + ")");
      size_ *= spec_.dims[a];
    }
    if (size_ > spec_.point_budget)
      throw ConfigError("grid point budget exceeded");

    step_.resize(nd);
    coords_.resize(nd);
    waven_.resize(nd);
    for (std::size_t a = 0; a < nd; ++a) {
      const std::size_t n = spec_.dims[a];
      step_[a] = spec_.box[a] / static_cast<double>(n);
      coords_[a].resize(n);
      for (std::size_t i = 0; i < n; ++i)
        coords_[a][i] = spec_.origin[a] + static_cast<double>(i) * step_[a];
      waven_[a].resize(n);
      const double dk = 2.0 * std::numbers::pi / spec_.box[a];
      for (std::size_t i = 0; i < n; ++i) {
        const auto s = static_cast<long long>(i);
        const auto half = static_cast<long long>(n / 2);
        waven_[a][i] = dk * static_cast<double>(s <= half ? s : s - static_cast<long long>(n));
      }
    }
    strides_.assign(nd, 1);
    for (std::size_t a = nd; a-- > 1;) strides_[a - 1] = strides_[a] * spec_.dims[a];
  }

  const GridSpec& spec() const { return spec_; }
  std::size_t ndim() const { return spec_.dims.size(); }
  std::size_t size() const { return size_; }
  std::size_t dim(std::size_t a) const { return spec_.dims[a]; }
  double step(std::size_t a) const { return step_[a]; }
  double length(std::size_t a) const { return spec_.box[a]; }
  double origin(std::size_t a) const { return spec_.origin[a]; }
  Boundary boundary() const { return spec_.boundary; }

  // volume element of one cell
  double cell_volume() const {
    double v = 1.0;
    for (double h : step_) v *= h;
    return v;
  }

  const std::vector<double>& axis_coords(std::size_t a) const { return coords_[a]; }
  const std::vector<double>& wavenumbers(std::size_t a) const { return waven_[a]; }
  double kmax(std::size_t a) const { return std::numbers::pi / step_[a]; }

  std::size_t stride(std::size_t a) const { return strides_[a]; }

  std::size_t index(std::span<const std::size_t> idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) f += idx[a] * strides_[a];
    return f;
  }

  void unflatten(std::size_t flat, std::span<std::size_t> idx) const {
    for (std::size_t a = 0; a < ndim(); ++a) {
      idx[a] = flat / strides_[a];
      flat %= strides_[a];
    }
  }

  // Interior domain check. Periodic grids accept any point (it wraps);
  // absorbing grids accept the node hull only.
  bool contains(std::span<const double> p) const {
    if (spec_.boundary == Boundary::periodic) return true;
    for (std::size_t a = 0; a < ndim(); ++a) {
      const double hi = coords_[a].back();
      if (!(p[a] >= spec_.origin[a] && p[a] <= hi)) return false;
    }
    return true;
  }

  // Maps a coordinate into [origin, origin+L) on one axis.
  double wrap(std::size_t a, double x) const {
    const double L = spec_.box[a];
    double r = std::fmod(x - spec_.origin[a], L);
    if (r < 0.0) r += L;
    return r + spec_.origin[a];
  }

 private:
  GridSpec spec_;
  std::size_t size_ = 0;
  std::vector<double> step_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<double>> waven_;
};

inline Grid make_grid(GridSpec spec) { return Grid(std::move(spec)); }

}  // namespace qtraj
