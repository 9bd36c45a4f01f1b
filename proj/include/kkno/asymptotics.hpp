#pragma once

#include <string>
#include <vector>

#include "kkno/kernels.hpp"
#include "kkno/numerics.hpp"
#include "kkno/operator.hpp"

namespace kkno {

/// Settings shared by the single-layer error experiments. Errors are measured
/// at the nodes of a vertex grid with `resolution` points per axis on
/// [0,1]^d, with f evaluated in closed form.
struct ErrorProbe {
  int resolution = 64;
  QuadratureConfig quadrature;
  unsigned threads = 1;
};

struct ConvergenceRow {
  int n = 0;
  double sup_error = 0.0;
};

struct ConvergenceTable {
  std::string kernel_id;
  std::string function_name;
  std::vector<ConvergenceRow> rows;
};

struct ModulusEstimate {
  double value = 0.0;     // the modulus used downstream
  double sampled = 0.0;   // dense-pair estimate on the sampling grid
  bool from_formula = false;
  /// Sampled value no more than 2% below the formula at delta - |h| (the
  /// distance every direction reaches on the grid) and never above the
  /// formula at delta.
  bool cross_checked = false;
};

/// Modulus of continuity on the (closed) domain box. Uses the registry
/// formula when present, cross-checked against a dense-pair scan of an
/// M-points-per-axis grid. Without a formula the scanned value is returned.
ModulusEstimate modulus(const TestFunction& f, double delta, const Domain& domain, int points_per_axis = 64);

/// Sup over node pairs of an (M+1)^d vertex grid with |x - y| <= delta.
double sampled_modulus(const ScalarField& f, double delta, const Domain& domain, int points_per_axis);

/// Max over probe nodes of |L_n f - f|.
double sup_error(const OperatorConfig& cfg, const ScalarField& f, const ErrorProbe& probe);

ConvergenceTable convergence_table(const KernelSpec& kernel, const TestFunction& f, const std::vector<int>& n_list,
                                   const ErrorProbe& probe = {});

/// Constant of the quantitative bound: 1 + sum |A^{-1}_ij| for Gaussian
/// kernels, 1 + d/4 for the cell kernel. Drifted kernels have none.
double default_constant(const KernelSpec& kernel);

struct BoundRow {
  int n = 0;
  double error = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};

struct BoundReport {
  double constant = 0.0;
  std::vector<BoundRow> rows;
  bool pass = false;
};

BoundReport bound_check(const ConvergenceTable& table, const TestFunction& f, double constant,
                        const Domain& domain);

struct VoronovskayaRow {
  int n = 0;
  double residual = 0.0;
};

struct VoronovskayaReport {
  int power = 2;
  std::string drift_term;
  std::string diffusion_term;
  std::string note;
  double limit_sup = 0.0;
  std::vector<VoronovskayaRow> rows;
};

/// Residual sup_x |n^p (L_n f - f)(x) - limit(x)|. p = 1 pairs with O(1)
/// drift (limit -a . grad f); p = 2 pairs with zero drift (limit 1/2 B : D^2 f).
VoronovskayaReport voronovskaya(const KernelSpec& kernel, const TestFunction& f, const std::vector<int>& n_list,
                                int power, const ErrorProbe& probe = {});

struct KorovkinRow {
  std::string monomial;
  int n = 0;
  double sup_error = 0.0;
};

struct KorovkinReport {
  std::vector<KorovkinRow> rows;
  /// Largest error at each n across all test monomials.
  double max_error(int n) const;
};

/// Errors on e_0, e_i and e_ij (i <= j). Requires d <= 3.
KorovkinReport korovkin(const KernelSpec& kernel, const std::vector<int>& n_list, const ErrorProbe& probe = {});

struct RateFit {
  double alpha = 0.0;      // error ~ n^{-alpha}
  double intercept = 0.0;  // of log(error) against log(n)
  double r_squared = 0.0;
};

RateFit fit_rate(const ConvergenceTable& table);

}  // namespace kkno
