#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kkno/pde.hpp"

using namespace kkno;

namespace {

constexpr double kPi = std::numbers::pi;

double sin2pi(std::span<const double> x) { return std::sin(2 * kPi * x[0]); }

DriftDiffusionProblem problem_1d(double a, double b, const GridFunction& f0, double t) {
  Matrix bm(1, 1);
  bm(0, 0) = b;
  return {[a](std::span<const double>) { return Point{a}; }, [bm](std::span<const double>) { return bm; }, f0, t};
}

double mean(const GridFunction& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += g[k];
  return s / static_cast<double>(g.size());
}

}  // namespace

TEST(Cfl, Examples) {
  const double h = 1.0 / 64;
  const double b[1] = {1.0 / 24}, a0[1] = {0.0};
  EXPECT_NEAR(cfl_dt(a0, b, h, 0.5, 1.0), 6 * h * h, 1e-15);
  EXPECT_NEAR(cfl_dt(a0, b, h, 0.5, 1.0), 0.0014648, 1e-7);
  const double z[2] = {0.0, 0.0};
  EXPECT_EQ(cfl_dt(z, z, h, 0.5, 0.7), 0.7);
  const double a[2] = {1.0, 0.0};
  EXPECT_NEAR(cfl_dt(a, z, 1.0 / 32, 0.5, 1.0), 0.015625, 1e-15);
  EXPECT_THROW(cfl_dt(a, z, 0.0, 0.5, 1.0), std::invalid_argument);
}

TEST(Solve, ZeroCoefficientsReturnInput) {
  const auto f0 = sample_to_grid(sin2pi, Domain::unit_box(1), 32);
  const auto out = solve(problem_1d(0, 0, f0, 1.0));
  for (std::size_t k = 0; k < f0.size(); ++k) EXPECT_EQ(out[k], f0[k]);
  const auto t0 = solve(problem_1d(1, 1, f0, 0.0));
  for (std::size_t k = 0; k < f0.size(); ++k) EXPECT_EQ(t0[k], f0[k]);
}

TEST(Solve, HeatModeDecay) {
  const double kappa = 1.0 / 24;
  const auto f0 = sample_to_grid(sin2pi, Domain::unit_box(1), 128);
  const auto out = solve(problem_1d(0, 2 * kappa, f0, 0.5));
  const double oracle = std::exp(-4 * kPi * kPi * kappa * 0.5);
  EXPECT_NEAR(oracle, 0.4393, 1e-4);
  EXPECT_NEAR(first_mode_amplitude(out), oracle, 1e-3);
  for (std::size_t k = 0; k < out.size(); ++k) EXPECT_NEAR(out[k], oracle * f0[k], 1e-3);
}

TEST(Solve, TransportCharacteristics) {
  const auto f0 = sample_to_grid(sin2pi, Domain::unit_box(1), 256);
  const auto out = solve(problem_1d(1.0, 0.0, f0, 0.25));
  double worst = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double x = f0.node(k)[0];
    worst = std::max(worst, std::abs(out[k] - std::sin(2 * kPi * (x - 0.25))));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Solve, MassAndMaximumPrinciple) {
  const auto f0 = sample_to_grid(
      [](std::span<const double> x) { return std::exp(std::sin(2 * kPi * x[0]) + std::cos(2 * kPi * x[1])); },
      Domain::unit_box(2), 32);
  Matrix b(2, 2);
  b << 0.05, 0.01, 0.01, 0.03;
  const DriftDiffusionProblem p{[](std::span<const double>) { return Point{0.0, 0.0}; },
                                [b](std::span<const double>) { return b; }, f0, 0.2};
  const auto out = solve(p);
  EXPECT_NEAR(mean(out), mean(f0), 1e-10);
  const auto [lo, hi] = std::minmax_element(f0.values().begin(), f0.values().end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_GE(out[k], *lo - 1e-10);
    EXPECT_LE(out[k], *hi + 1e-10);
  }

  // Drift terms also telescope.
  const auto drifted = solve(problem_1d(0.7, 0.02, sample_to_grid(sin2pi, Domain::unit_box(1), 64), 0.3));
  EXPECT_NEAR(mean(drifted), 0.0, 1e-10);
}

TEST(Solve, ForwardEulerFirstOrder) {
  const auto f0 = sample_to_grid(sin2pi, Domain::unit_box(1), 32);
  const auto p = problem_1d(0, 0.1, f0, 0.1);
  const double h = 1.0 / 32;
  const double dt = 0.5 * h * h / 0.2;
  const auto u1 = solve(p, {dt});
  const auto u2 = solve(p, {dt / 2});
  const auto u4 = solve(p, {dt / 4});
  const double ratio = sup_norm_diff(u1, u2) / sup_norm_diff(u2, u4);
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.3);
}

TEST(Solve, RejectsBadInput) {
  const auto f0 = sample_to_grid(sin2pi, Domain::unit_box(1), 32);
  const double h = 1.0 / 32;
  EXPECT_THROW(solve(problem_1d(0, 0.1, f0, 0.1), {6 * h * h}), std::invalid_argument);  // limit is 5 h^2
  EXPECT_NO_THROW(solve(problem_1d(0, 0.1, f0, 0.1), {5 * h * h}));
  EXPECT_THROW(solve(problem_1d(0, -0.1, f0, 0.1)), std::invalid_argument);
  Matrix asym(2, 2);
  asym << 0.1, 0.05, 0.0, 0.1;
  const auto f2 = sample_to_grid([](std::span<const double>) { return 0.0; }, Domain::unit_box(2), 8);
  EXPECT_THROW(solve({[](std::span<const double>) { return Point{0.0, 0.0}; },
                      [asym](std::span<const double>) { return asym; }, f2, 0.1}),
               std::invalid_argument);
  const auto closed = sample_to_grid(sin2pi, Domain({{0, 1}}, false), 8);
  EXPECT_THROW(solve(problem_1d(0, 0.1, closed, 0.1)), std::invalid_argument);
}

TEST(Compare, ZeroTime) {
  const auto f = test_function("sin2pi", 1);
  for (const auto& [k, gamma] : std::vector<std::pair<KernelSpec, int>>{
           {make_cell_uniform(1), 2}, {make_drifted(make_cell_uniform(1), Point{0.5}, 0), 1}}) {
    const auto rep = compare(k, 16, 0.0, gamma, f, 32);
    EXPECT_EQ(rep.m, 0);
    EXPECT_LE(rep.gap, 1e-12);
  }
}

TEST(Compare, IncompatiblePairsRejected) {
  const auto f = test_function("sin2pi", 1);
  const auto cell = make_cell_uniform(1);
  EXPECT_THROW(compare(cell, 16, 0.5, 1, f, 32), std::invalid_argument);
  EXPECT_THROW(compare(make_drifted(cell, Point{0.5}, 0), 16, 0.5, 2, f, 32), std::invalid_argument);
  EXPECT_THROW(compare(make_drifted(cell, Point{0.5}, 1), 16, 0.5, 1, f, 32), std::invalid_argument);
  try {
    compare(cell, 16, 0.5, 1, f, 32);
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("gamma = 2"), std::string::npos) << e.what();
  }
}

TEST(Compare, HeatLimit) {
  const auto f = test_function("sin2pi", 1);
  const auto cell = make_cell_uniform(1);
  const double heat = std::exp(-kPi * kPi * 0.5 / 6);
  const auto r16 = compare(cell, 16, 0.5, 2, f, 64);
  const auto r32 = compare(cell, 32, 0.5, 2, f, 64, {.threads = 2});
  EXPECT_EQ(r32.m, 512);
  EXPECT_EQ(r32.work_resolution, 1024);
  EXPECT_NEAR(r32.amp_compose / heat, 1.0, 0.02);
  EXPECT_NEAR(r32.amp_pde / heat, 1.0, 0.02);
  EXPECT_LE(r32.gap, 0.02);
  EXPECT_LT(r32.gap, r16.gap);
  // Composition amplitude follows the per-mode multiplier rho_n^m.
  const double rho = std::sin(kPi / 32) / (kPi / 32);
  EXPECT_NEAR(r32.amp_compose, std::pow(rho, 512), 1e-3);
}

TEST(Compare, TransportLimit) {
  // O(1) drift under m = floor(n t): pure transport by a = 0.5.
  const auto f = test_function("sin2pi", 1);
  const auto k = make_drifted(make_cell_uniform(1), Point{0.5}, 0);
  const auto r32 = compare(k, 32, 0.25, 1, f, 64);
  const auto r64 = compare(k, 64, 0.25, 1, f, 64);
  EXPECT_EQ(r32.pde_diffusion.norm(), 0.0);
  EXPECT_LT(r64.gap, r32.gap);
  EXPECT_LE(r64.gap, 0.1);
}

TEST(Compare, DriftDiffusionLimit) {
  const auto f = test_function("sin2pi", 1);
  const auto k = make_drifted(make_cell_uniform(1), Point{0.5}, 1);
  const auto r16 = compare(k, 16, 0.25, 2, f, 64);
  const auto r32 = compare(k, 32, 0.25, 2, f, 64);
  EXPECT_NEAR(r32.pde_drift[0], 0.5, 0.0);
  EXPECT_NEAR(r32.pde_diffusion(0, 0), 1.0 / 12.0, 1e-15);
  EXPECT_LE(r32.gap, 0.03);
  EXPECT_LT(r32.gap, r16.gap);
}

TEST(Compare, GridInputMatchesSampledInput) {
  const auto f = test_function("sin2pi", 1);
  const auto g = sample_to_grid(f.value, Domain::unit_box(1), 64);
  ComparisonConfig cfg;
  cfg.work_resolution = 64;
  const auto a = compare(make_cell_uniform(1), 8, 0.5, 2, g, cfg);
  const auto b = compare(make_cell_uniform(1), 8, 0.5, 2, f, 64, cfg);
  EXPECT_EQ(a.gap, b.gap);
  EXPECT_EQ(a.work_resolution, 64);
}
