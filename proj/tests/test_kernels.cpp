#include <gtest/gtest.h>

#include <cmath>

#include "kkno/kernels.hpp"

using namespace kkno;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST(Cholesky, FactorsAndRejects) {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const Matrix l = cholesky_lower(a);
  EXPECT_NEAR((l * l.transpose() - a).norm(), 0.0, 1e-14);
  EXPECT_EQ(l(0, 1), 0.0);

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    cholesky_lower(bad);
    FAIL() << "indefinite matrix accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("pivot 1"), std::string::npos) << e.what();
  }
}

TEST(Gaussian, RejectsBadPrecision) {
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(make_gaussian(indefinite), std::invalid_argument);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(make_gaussian(asym), std::invalid_argument);
  EXPECT_THROW(make_gaussian(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Gaussian, ClosedFormMoments) {
  const Point x = {0.3, 0.7};
  const auto id = moments(make_gaussian(Matrix::Identity(2, 2)), x, 5);
  EXPECT_NEAR(id.mass, 1.0, 1e-12);
  EXPECT_NEAR(id.first.norm(), 0.0, 1e-12);
  EXPECT_NEAR((id.second - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.0, 1e-10);

  const auto dg = moments(make_gaussian(diag2(4, 1)), x, 5);
  EXPECT_NEAR((dg.second - diag2(0.25, 1.0)).cwiseAbs().maxCoeff(), 0.0, 1e-10);

  // Correlated precision: covariance is the inverse.
  Matrix a(2, 2);
  a << 2, 0.5, 0.5, 1;
  const auto cr = moments(make_gaussian(a), x, 3);
  EXPECT_NEAR((cr.second - a.inverse()).cwiseAbs().maxCoeff(), 0.0, 1e-10);
  // E|u|^3 for the standard normal in d=1 is 2 sqrt(2/pi). |u|^3 is not a
  // polynomial, so Gauss-Hermite only gets close.
  const Point x1 = {0.0};
  EXPECT_NEAR(moments(make_gaussian(Matrix::Identity(1, 1)), x1, 1).third_abs, 2 * std::sqrt(2 / M_PI), 2e-3);
}

TEST(CellUniform, ClosedFormMoments) {
  for (int d = 1; d <= 3; ++d) {
    const Point x(static_cast<std::size_t>(d), 0.42);
    const auto r = moments(make_cell_uniform(d), x, 7);
    EXPECT_NEAR(r.mass, 1.0, 1e-12);
    EXPECT_NEAR(r.first.norm(), 0.0, 1e-12);
    EXPECT_NEAR((r.second - Matrix::Identity(d, d) / 12.0).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
  // E|u|^3 for u uniform on [-1/2, 1/2] is 1/32; the kink at 0 limits the rule.
  const Point x1 = {0.0};
  EXPECT_NEAR(moments(make_cell_uniform(1), x1, 1).third_abs, 1.0 / 32.0, 1e-5);
}

TEST(Drifted, ShiftedMoments) {
  const Point x = {0.2};
  const auto s0 = make_drifted(make_cell_uniform(1), Point{0.5}, 0);
  for (int n : {1, 4, 100}) EXPECT_NEAR(moments(s0, x, n).first(0), 0.5, 1e-14);
  const auto s1 = make_drifted(make_cell_uniform(1), Point{0.5}, 1);
  EXPECT_NEAR(moments(s1, x, 4).first(0), 0.125, 1e-14);

  const Point v = {0.3, -0.2};
  const auto g1 = make_drifted(make_gaussian(Matrix::Identity(2, 2)), v, 1);
  const auto m = moments(g1, Point{0.5, 0.5}, 10);
  EXPECT_NEAR(m.first(0), 0.03, 1e-12);
  EXPECT_NEAR(m.first(1), -0.02, 1e-12);
}

TEST(Drifted, Structure) {
  const auto base = make_cell_uniform(1);
  const auto s0 = make_drifted(base, Point{0.5}, 0);
  const auto s1 = make_drifted(base, Point{0.5}, 1);
  EXPECT_EQ(s0.drift_class(), DriftClass::Constant);
  EXPECT_EQ(s1.drift_class(), DriftClass::InverseN);
  EXPECT_EQ(base.drift_class(), DriftClass::Zero);
  EXPECT_EQ(s1.limiting_drift(Point{0.0})[0], 0.5);
  EXPECT_NEAR(s1.diffusion()(0, 0), 1.0 / 12.0, 1e-15);
  EXPECT_THROW(make_drifted(s0, Point{0.1}, 0), std::invalid_argument);
  EXPECT_THROW(make_drifted(base, Point{0.1}, 2), std::invalid_argument);
  EXPECT_THROW(make_drifted(base, Point{0.1, 0.2}, 0), std::invalid_argument);
  EXPECT_EQ(to_string(DriftClass::InverseN), "O(1/n)");

  // A non-constant field is evaluated at x.
  const auto field = make_drifted(base, [](std::span<const double> x) { return Point{x[0]}; }, 0);
  EXPECT_NEAR(moments(field, Point{0.25}, 3).first(0), 0.25, 1e-14);
}

TEST(Admissible, ReportsPerCondition) {
  const std::vector<Point> pts = {{0.1}, {0.5}, {0.9}};
  const auto cell = check_admissible(make_cell_uniform(1), {}, 1e-8, pts);
  EXPECT_TRUE(cell.pass());
  EXPECT_EQ(cell.drift_class, DriftClass::Zero);
  EXPECT_NEAR(cell.diffusion(0, 0), 1.0 / 12.0, 1e-12);

  const auto scaled = check_admissible(make_cell_uniform(1).with_mass_scale(2.0), {}, 1e-8, pts);
  EXPECT_FALSE(scaled.k1_pass);
  EXPECT_NEAR(scaled.mass_error, 1.0, 1e-12);

  const auto inv = check_admissible(make_drifted(make_gaussian(Matrix::Identity(1, 1)), Point{1.0}, 1), {}, 1e-8, pts);
  EXPECT_EQ(inv.drift_class, DriftClass::InverseN);
  EXPECT_TRUE(inv.k2_pass);
  EXPECT_NEAR(inv.drift(0), 1.0, 1e-10);

  const auto con = check_admissible(make_drifted(make_cell_uniform(1), Point{0.5}, 0), {}, 1e-8, pts);
  EXPECT_EQ(con.drift_class, DriftClass::Constant);
  EXPECT_NEAR(con.drift(0), 0.5, 1e-12);
}

TEST(Kernel, Ids) {
  EXPECT_EQ(make_cell_uniform(2).id(), "cell_uniform");
  EXPECT_EQ(make_gaussian(Matrix::Identity(1, 1)).id(), "gaussian");
  EXPECT_EQ(make_drifted(make_cell_uniform(1), Point{0.5}, 1).id(), "drifted_s1(cell_uniform)");
}
