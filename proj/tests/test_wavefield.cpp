#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qtraj/units.hpp"
#include "qtraj/wavefield.hpp"

using namespace qtraj;

namespace {

std::shared_ptr<const Grid> grid1d(std::size_t n, double L, Boundary b = Boundary::periodic) {
  GridSpec spec;
  spec.dims = {n};
  spec.box = {L};
  spec.origin = {-0.5 * L};
  spec.boundary = b;
  return std::make_shared<const Grid>(spec);
}

}  // namespace

TEST(InitGaussian, BeamPresetMomentumAndWavelength) {
  // sigma = 2.65 Angstrom, k0 = 2.83 / Angstrom in atomic units
  const double sigma = 2.65 * units::bohr_per_angstrom;
  const double k0 = 2.83 * units::angstrom_per_bohr;
  EXPECT_NEAR(sigma, 5.008, 1e-3);
  EXPECT_NEAR(k0, 1.4976, 1e-4);
  EXPECT_NEAR(units::de_broglie_wavelength(k0) * units::angstrom_per_bohr, 2.22, 5e-3);

  auto g = grid1d(512, 192.0);
  std::vector<double> c{0.0}, k{k0};
  WaveField f = init_gaussian(g, c, k, sigma);
  EXPECT_NEAR(norm2(f), 1.0, 1e-10);
  const auto p = expectation_momentum(f);
  EXPECT_NEAR(p[0], k0, 1e-6 * k0);
}

TEST(InitGaussian, ZeroMomentumIsRealPositive) {
  auto g = grid1d(256, 96.0);
  std::vector<double> c{0.0}, k{0.0};
  WaveField f = init_gaussian(g, c, k, 5.0);
  for (const auto& v : f.values) {
    EXPECT_DOUBLE_EQ(v.imag(), 0.0);
    EXPECT_GE(v.real(), 0.0);
  }
  const auto p = expectation_momentum(f);
  EXPECT_NEAR(p[0], 0.0, 1e-12);
}

TEST(InitGaussian, DensityWidthEqualsSigma) {
  auto g = grid1d(512, 192.0);
  std::vector<double> c{3.0}, k{0.0};
  WaveField f = init_gaussian(g, c, k, 5.0);
  EXPECT_NEAR(position_std(f, 0), 5.0, 1e-6);
  const auto mean = expectation_position(f);
  EXPECT_NEAR(mean[0], 3.0, 1e-9);
}

TEST(InitGaussian, PreconditionsEnforced) {
  auto g = grid1d(64, 64.0);  // h = 1
  std::vector<double> c{0.0};
  std::vector<double> k{0.0};
  EXPECT_THROW(init_gaussian(g, c, k, 2.0), ConfigError);  // sigma <= 3h
  std::vector<double> kbad{0.9 * g->kmax(0)};
  EXPECT_THROW(init_gaussian(g, c, kbad, 5.0), ConfigError);
}

TEST(Sample, ExactOnNodesAndMidpoints) {
  auto g = grid1d(64, 64.0, Boundary::absorbing_mask);
  std::vector<double> c{0.0}, k{0.4};
  WaveField f = init_gaussian(g, c, k, 5.0);
  for (std::size_t i = 0; i < g->dim(0); i += 7) {
    const double x = g->axis_coords(0)[i];
    const cplx s = sample(f, std::span<const double>(&x, 1));
    EXPECT_EQ(s.real(), f.values[i].real());
    EXPECT_EQ(s.imag(), f.values[i].imag());
  }
  const double xm = 0.5 * (g->axis_coords(0)[10] + g->axis_coords(0)[11]);
  const cplx sm = sample(f, std::span<const double>(&xm, 1));
  const cplx expect = 0.5 * (f.values[10] + f.values[11]);
  EXPECT_NEAR(std::abs(sm - expect), 0.0, 1e-15);
}

TEST(Sample, OutOfBoxRejectedInAbsorbingMode) {
  auto g = grid1d(64, 64.0, Boundary::absorbing_mask);
  std::vector<double> c{0.0}, k{0.0};
  WaveField f = init_gaussian(g, c, k, 5.0);
  const double x = 40.0;
  EXPECT_THROW(sample(f, std::span<const double>(&x, 1)), PhysicsError);
}

TEST(Sample, PlaneWaveInterpolationError) {
  // interpolation error of exp(ikx) sampled off-node is O((kh)^2)
  GridSpec spec;
  spec.dims = {128};
  spec.box = {64.0};
  spec.origin = {0.0};
  spec.boundary = Boundary::periodic;
  auto g = std::make_shared<const Grid>(spec);
  const double kw = 8.0 * 2.0 * std::numbers::pi / 64.0;  // exact grid mode
  WaveField f{g, std::vector<cplx>(g->size()), 0.0};
  for (std::size_t i = 0; i < g->size(); ++i)
    f.values[i] = std::polar(1.0, kw * g->axis_coords(0)[i]);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 64.0);
  const double kh = kw * g->step(0);
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const double x = uni(rng);
    const cplx got = sample(f, std::span<const double>(&x, 1));
    worst = std::max(worst, std::abs(got - std::polar(1.0, kw * x)));
  }
  EXPECT_LT(worst, 0.5 * kh * kh);
  EXPECT_GT(worst, 1e-6);  // genuinely off-node samples were hit
}
