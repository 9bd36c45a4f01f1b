#pragma once

#include <span>

#include "kkno/kernels.hpp"
#include "kkno/numerics.hpp"

namespace kkno {

struct OperatorConfig {
  KernelSpec kernel;
  int n = 1;
  QuadratureConfig quadrature;
  unsigned threads = 1;
};

/// One KKNO layer, L_n f(x) = integral of f(x - u/n) K_n(x, u) du, with the
/// kernel's quadrature nodes precomputed.
class Layer {
 public:
  explicit Layer(OperatorConfig cfg);

  const OperatorConfig& config() const { return cfg_; }
  int dimension() const { return cfg_.kernel.dimension(); }

  double apply(const ScalarField& f, std::span<const double> x) const;

  /// Node-wise application to the multilinear interpolant of g. Same domain
  /// and resolution as g; requires a periodic domain.
  GridFunction apply(const GridFunction& g) const;

 private:
  template <typename Eval>
  double integrate(Eval&& eval, std::span<const double> x, std::span<double> scratch_point,
                   std::span<double> scratch_terms) const;

  OperatorConfig cfg_;
  NodeSet nodes_;
};

double apply_point(const OperatorConfig& cfg, const ScalarField& f, std::span<const double> x);
GridFunction apply_grid(const OperatorConfig& cfg, const GridFunction& g);

/// m-fold iterate of apply_grid. m = 0 returns g unchanged.
GridFunction compose(const OperatorConfig& cfg, GridFunction g, long m);

/// Depth-time schedule m = floor(n^gamma * t).
struct CompositionSchedule {
  int n = 1;
  double t = 0.0;
  int gamma = 1;
  long depth = 0;
};

CompositionSchedule schedule(int n, double t, int gamma);

}  // namespace kkno
