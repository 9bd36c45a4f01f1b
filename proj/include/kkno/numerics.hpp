#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kkno {

using Point = std::vector<double>;

/// Real-valued field on R^d. The span holds the d coordinates of the query point.
using ScalarField = std::function<double(std::span<const double>)>;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  double width() const { return upper - lower; }
};

/// Axis-aligned box with an optional periodic identification of opposite faces.
class Domain {
 public:
  Domain(std::vector<Interval> axes, bool periodic);

  /// [0,1]^d, periodic.
  static Domain unit_box(int dimension);

  int dimension() const { return static_cast<int>(axes_.size()); }
  const Interval& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
  const std::vector<Interval>& axes() const { return axes_; }
  bool periodic() const { return periodic_; }

  bool operator==(const Domain& other) const;

 private:
  std::vector<Interval> axes_;
  bool periodic_;
};

/// Values sampled at vertex nodes x_i = lower + i * (upper - lower) / R, i = 0..R-1,
/// stored row-major (last axis fastest). Node R coincides with node 0 under the
/// periodic convention.
class GridFunction {
 public:
  GridFunction(Domain domain, std::vector<int> resolution, std::vector<double> values);
  GridFunction(Domain domain, int resolution, std::vector<double> values);

  const Domain& domain() const { return domain_; }
  int dimension() const { return domain_.dimension(); }
  const std::vector<int>& resolution() const { return resolution_; }
  int resolution(int axis) const { return resolution_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  /// Node spacing along one axis.
  double spacing(int axis) const;

  /// Coordinates of the node with the given flat (row-major) index.
  void node(std::size_t flat, std::span<double> out) const;
  Point node(std::size_t flat) const;

  bool same_shape(const GridFunction& other) const;

 private:
  Domain domain_;
  std::vector<int> resolution_;
  std::vector<double> values_;
};

enum class QuadratureKind { Legendre, Hermite };

/// Gauss rule. Legendre: weight 1 on [-1,1]. Hermite: weight exp(-s^2) on R.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::Legendre;
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule legendre_rule(int order);
QuadratureRule hermite_rule(int order);

/// Fixed-order pairwise summation. The association order depends only on the
/// length of the input, so the result is reproducible bit for bit.
double pairwise_sum(std::span<const double> terms);

/// Tensor-product Gauss-Legendre integral of f over the box. One rule per
/// axis, or a single rule reused on every axis.
double integrate_box(const ScalarField& f, const std::vector<Interval>& box,
                     const std::vector<QuadratureRule>& rules);

GridFunction sample_to_grid(const ScalarField& f, const Domain& domain, int resolution);

/// Multilinear interpolation among the 2^d surrounding vertices. Periodic
/// domains wrap x; non-periodic domains clamp to the last cell.
double eval_interp(const GridFunction& g, std::span<const double> x);

/// Max over nodes of |g1 - g2|. Throws if the grids differ in shape.
double sup_norm_diff(const GridFunction& g1, const GridFunction& g2);

double sup_norm(const GridFunction& g);

enum class Smoothness { Constant, Linear, Quadratic, AnalyticPeriodic, Analytic, LipschitzKink };

std::string to_string(Smoothness s);

/// Registry function with optional derivatives. Gradient and Hessian write
/// into caller-provided storage (d and d*d entries, Hessian row-major).
struct TestFunction {
  std::string name;
  int dimension = 1;
  ScalarField value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::function<void(std::span<const double>, std::span<double>)> hessian;
  Smoothness smoothness = Smoothness::AnalyticPeriodic;
  /// Closed-form modulus of continuity on [0,1]^d, when known.
  std::function<double(double)> modulus;

  double operator()(std::span<const double> x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_hessian() const { return static_cast<bool>(hessian); }
};

/// Names: const1, coord(i), quad(i,j), sin2pi, sin2pi(i), absdev, expsum.
/// Axis indices are 1-based. sin2pi is the product of sin(2 pi x_k) over all
/// axes; sin2pi(i) depends on axis i only.
TestFunction test_function(const std::string& name, int dimension);

}  // namespace kkno
