#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kkno/numerics.hpp"

namespace kkno {

using Matrix = Eigen::MatrixXd;

/// Bounded drift field c: R^d -> R^d. Must be pure; it is called concurrently.
using DriftField = std::function<Point(std::span<const double>)>;

DriftField constant_drift(Point c);

/// How the first kernel moment scales with n.
enum class DriftClass { Zero, InverseN, Constant };

std::string to_string(DriftClass c);

struct QuadratureConfig {
  int legendre_order = 16;
  int hermite_order = 24;
};

/// Weighted point set representing the kernel density: for any g,
/// sum_k weights[k] * g(point k) approximates the integral of g(u) K(x, u) du.
/// Points are stored flat, `dimension` coordinates each.
struct NodeSet {
  int dimension = 0;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t k) const {
    return {points.data() + k * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
  }
};

class KernelSpec;

struct GaussianKernel {
  Matrix precision;   // A
  Matrix covariance;  // A^{-1}
  Matrix whitening;   // L^{-T} with A = L L^T
};

struct CellUniformKernel {
  int dimension = 1;
};

struct DriftedKernel {
  std::shared_ptr<const KernelSpec> base;
  DriftField drift;
  int decay = 0;
  std::optional<Point> constant;  // set when the field is a known constant
};

/// Kernel family K_n(x, u). Densities are in the unscaled variable u; the
/// operator applies the u/n shrink itself.
class KernelSpec {
 public:
  using Variant = std::variant<GaussianKernel, CellUniformKernel, DriftedKernel>;

  explicit KernelSpec(Variant v);

  const Variant& variant() const { return variant_; }
  int dimension() const;
  std::string id() const;

  bool is_gaussian() const { return std::holds_alternative<GaussianKernel>(variant_); }
  bool is_cell_uniform() const { return std::holds_alternative<CellUniformKernel>(variant_); }
  bool is_drifted() const { return std::holds_alternative<DriftedKernel>(variant_); }

  /// Structural drift class: Zero for symmetric bases, Constant for s = 0,
  /// InverseN for s = 1.
  DriftClass drift_class() const;

  /// Limiting drift a(x) = lim n^s * m1(x).
  Point limiting_drift(std::span<const double> x) const;

  /// Covariance of the (undrifted) base density, i.e. B = m2 - m1 m1^T.
  Matrix diffusion() const;

  /// Shift added to the base density at (x, n): c(x) / n^s, zero when undrifted.
  Point shift(std::span<const double> x, int n) const;

  /// Quadrature nodes of the undrifted base density. Independent of x and n.
  NodeSet base_nodes(const QuadratureConfig& quad) const;

  /// Total mass multiplier. 1 for every normalized kernel.
  double mass_scale() const { return mass_scale_; }

  /// Copy with the density multiplied by `factor`. Produces a non-normalized
  /// kernel; used to exercise the admissibility diagnostics.
  KernelSpec with_mass_scale(double factor) const;

 private:
  Variant variant_;
  double mass_scale_ = 1.0;
};

KernelSpec make_gaussian(const Matrix& precision);
KernelSpec make_cell_uniform(int dimension);
KernelSpec make_drifted(const KernelSpec& base, DriftField c, int decay);
KernelSpec make_drifted(const KernelSpec& base, const Point& constant_c, int decay);

/// Lower Cholesky factor of a symmetric positive-definite matrix. Throws
/// std::invalid_argument naming the first non-positive pivot.
Matrix cholesky_lower(const Matrix& a);

struct MomentReport {
  Point x;
  int n = 1;
  double mass = 0.0;
  Eigen::VectorXd first;   // integral of u K
  Matrix second;           // integral of u u^T K
  double third_abs = 0.0;  // integral of |u|^3 K
  QuadratureConfig quadrature;
};

MomentReport moments(const KernelSpec& spec, std::span<const double> x, int n,
                     const QuadratureConfig& quad = {});

struct AdmissibilityReport {
  double tolerance = 0.0;
  std::vector<Point> sample_points;
  std::vector<int> probe_n;

  double mass_error = 0.0;  // max |mass - 1| over samples
  bool k1_pass = false;

  Eigen::VectorXd drift;  // n^s * m1 at the first sample point, largest probe n
  DriftClass drift_class = DriftClass::Zero;
  bool k2_pass = false;

  Matrix diffusion;         // central second moment at the first sample point
  double diffusion_bound = 0.0;
  bool k3_pass = false;

  bool pass() const { return k1_pass && k2_pass && k3_pass; }
};

/// Checks normalization (K1), drift decay (K2) and bounded n-independent
/// second moments (K3) numerically at the given sample points.
AdmissibilityReport check_admissible(const KernelSpec& spec, const QuadratureConfig& quad, double tol,
                                     const std::vector<Point>& sample_points, int probe_n = 8);

}  // namespace kkno
