#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qtraj/potentials.hpp"
#include "qtraj/units.hpp"

using namespace qtraj;

namespace {

std::shared_ptr<const Grid> grid2d(std::size_t n, double L) {
  GridSpec spec;
  spec.dims = {n, n};
  spec.box = {L, L};
  spec.origin = {-0.5 * L, -0.5 * L};
  return std::make_shared<const Grid>(spec);
}

SlabSlits paper_edges_slab() {
  // slit geometry from the closest/furthest edge distances 2.96 / 7.94 Angstrom
  const double d1 = 2.96 * units::bohr_per_angstrom;
  const double d2 = 7.94 * units::bohr_per_angstrom;
  const double w = 0.5 * (d2 - d1);
  SlabSlits s;
  s.plane = 0.0;
  s.thickness = 1.5;
  s.height = 11.2;
  s.smoothing = 0.6;
  s.slits = {{-0.5 * d1 - w, -0.5 * d1}, {0.5 * d1, 0.5 * d1 + w}};
  return s;
}

}  // namespace

TEST(Potentials, SoftCoulombValueAtCenter) {
  SoftCoulomb sc;
  sc.center = {0.0, 0.0};
  sc.charge = 1.0;
  sc.softening = 0.5;
  PotentialSpec spec{sc};
  const double q[2] = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(potential_value(spec, std::span<const double>(q, 2)), -2.0);
}

TEST(Potentials, SlitOpeningIsTransparent) {
  const auto slab = paper_edges_slab();
  PotentialSpec spec{slab};
  const double yc = 0.5 * (slab.slits[1].first + slab.slits[1].second);
  const double q[2] = {0.0, yc};  // mid-slab, slit centre
  EXPECT_LT(std::abs(potential_value(spec, std::span<const double>(q, 2))),
            slab.height * 1e-3);
  const double qwall[2] = {0.0, 0.0};  // mid-slab, between the slits
  EXPECT_GT(potential_value(spec, std::span<const double>(qwall, 2)), 0.9 * slab.height);
}

TEST(Potentials, SumOfFreeIsFree) {
  SumPotential sum;
  sum.terms.push_back(PotentialSpec{FreePotential{}});
  sum.terms.push_back(PotentialSpec{FreePotential{}});
  PotentialSpec spec{sum};
  const double q[2] = {1.0, -2.0};
  EXPECT_DOUBLE_EQ(potential_value(spec, std::span<const double>(q, 2)), 0.0);
  const auto g = potential_gradient(spec, std::span<const double>(q, 2));
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(Potentials, SoftCoulombGradient) {
  SoftCoulomb sc;
  sc.center = {0.0};
  sc.charge = 1.0;
  sc.softening = 0.5;
  PotentialSpec spec{sc};
  const double q0[1] = {0.0};
  EXPECT_DOUBLE_EQ(potential_gradient(spec, std::span<const double>(q0, 1))[0], 0.0);
  // dV/dx at x = a equals Z a / (2 a^2)^{3/2} = 1/(2 sqrt(2) a^2)
  const double q1[1] = {0.5};
  const double expect = 1.0 / (2.0 * std::sqrt(2.0) * 0.25);
  EXPECT_NEAR(potential_gradient(spec, std::span<const double>(q1, 1))[0], expect, 1e-14);
}

TEST(Potentials, GradientMatchesFiniteDifferences) {
  SumPotential sum;
  SoftCoulomb sc;
  sc.center = {1.0, -0.5};
  sc.charge = 0.8;
  sc.softening = 0.7;
  sum.terms.push_back(PotentialSpec{sc});
  sum.terms.push_back(PotentialSpec{paper_edges_slab()});
  PotentialSpec spec{sum};

  const double pts[][2] = {{3.0, 2.0}, {-1.2, 6.1}, {0.4, -4.0}, {2.0, 10.5}};
  for (const auto& p : pts) {
    const auto grad = potential_gradient(spec, std::span<const double>(p, 2));
    for (int a = 0; a < 2; ++a) {
      auto f = [&](double x) {
        double q[2] = {p[0], p[1]};
        q[a] = x;
        return potential_value(spec, std::span<const double>(q, 2));
      };
      const double fd = oracles::fd_first(f, p[a], 1e-6);
      const double scale = std::max(std::abs(grad[a]), 1e-3);
      EXPECT_NEAR(grad[a], fd, 1e-7 * scale) << "axis " << a;
    }
  }
}

TEST(Potentials, HessianMatchesFiniteDifferences) {
  SoftCoulomb sc;
  sc.center = {0.3, -0.2};
  sc.charge = 1.0;
  sc.softening = 0.5;
  PotentialSpec spec{sc};
  const double p[2] = {1.1, 0.7};
  const auto h = potential_hessian(spec, std::span<const double>(p, 2));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto f = [&](double x, double y) {
        double q[2] = {x, y};
        return potential_value(spec, std::span<const double>(q, 2));
      };
      double fd;
      if (a == b) {
        auto fa = [&](double x) {
          double q[2] = {p[0], p[1]};
          q[a] = x;
          return potential_value(spec, std::span<const double>(q, 2));
        };
        fd = oracles::fd_second(fa, p[a], 1e-4);
      } else {
        fd = oracles::fd_mixed(f, p[0], p[1], 1e-4);
      }
      EXPECT_NEAR(h[a][b], fd, 1e-6);
    }
}

TEST(Potentials, SampledFieldGradientConvergesAtSecondOrder) {
  // central differences of the gridded field approach the analytic gradient
  // at O(h^2)
  SoftCoulomb sc;
  sc.center = {0.0, 0.0};
  sc.charge = 1.0;
  sc.softening = 1.0;
  PotentialSpec spec{sc};
  auto err_at = [&](std::size_t n) {
    auto g = grid2d(n, 16.0);
    const auto v = evaluate(spec, *g);
    const double h = g->step(0);
    double worst = 0.0;
    for (std::size_t i = 2; i < n - 2; ++i) {
      const std::size_t j = n / 2;  // y = 0 row exists at every resolution
      const double q[2] = {g->axis_coords(0)[i], g->axis_coords(1)[j]};
      const double fd = (v[(i + 1) * n + j] - v[(i - 1) * n + j]) / (2.0 * h);
      const auto grad = potential_gradient(spec, std::span<const double>(q, 2));
      worst = std::max(worst, std::abs(fd - grad[0]));
    }
    return worst;
  };
  const double e1 = err_at(64), e2 = err_at(128);
  EXPECT_GT(e1 / e2, 3.4);  // ~4 for O(h^2)
}

TEST(Potentials, SlabReflectionSymmetry) {
  const auto slab = paper_edges_slab();
  PotentialSpec spec{slab};
  for (double y : {1.0, 3.3, 5.6, 8.9, 12.0}) {
    const double qp[2] = {0.2, y}, qm[2] = {0.2, -y};
    EXPECT_DOUBLE_EQ(potential_value(spec, std::span<const double>(qp, 2)),
                     potential_value(spec, std::span<const double>(qm, 2)));
  }
}

TEST(Potentials, InvalidSpecsRejected) {
  SlabSlits s = paper_edges_slab();
  s.slits.push_back(s.slits[0]);  // overlapping duplicate
  EXPECT_THROW(validate(PotentialSpec{s}, 2), ConfigError);
  SoftCoulomb sc;
  sc.center = {0.0};
  sc.softening = -1.0;
  EXPECT_THROW(validate(PotentialSpec{sc}, 1), ConfigError);
}
