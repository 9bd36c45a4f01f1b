#include <cmath>
#include <stdexcept>

#include "kkno/pde.hpp"

namespace kkno {

DriftDiffusionProblem limiting_problem(const KernelSpec& kernel, int gamma, const GridFunction& initial, double t) {
  const int d = kernel.dimension();
  if (initial.dimension() != d) throw std::invalid_argument("limiting_problem: dimension mismatch");
  const DriftClass cls = kernel.drift_class();
  const Matrix zero_b = Matrix::Zero(d, d);
  const Matrix b = kernel.diffusion();

  DriftDiffusionProblem p{nullptr, nullptr, initial, t};
  if (cls == DriftClass::Constant && gamma == 1) {
    // Diffusion per layer is O(1/n^2) over O(n) layers: vanishes.
    p.drift = [kernel](std::span<const double> x) { return kernel.limiting_drift(x); };
    p.diffusion = [zero_b](std::span<const double>) { return zero_b; };
  } else if (cls == DriftClass::Zero && gamma == 2) {
    p.drift = [d](std::span<const double>) { return Point(static_cast<std::size_t>(d), 0.0); };
    p.diffusion = [b](std::span<const double>) { return b; };
  } else if (cls == DriftClass::InverseN && gamma == 2) {
    p.drift = [kernel](std::span<const double> x) { return kernel.limiting_drift(x); };
    p.diffusion = [b](std::span<const double>) { return b; };
  } else {
    std::string why;
    if (gamma == 1 && cls == DriftClass::Zero)
      why = "zero drift under m = floor(n t) has a trivial limit; use gamma = 2";
    else if (gamma == 1 && cls == DriftClass::InverseN)
      why = "O(1/n) drift under m = floor(n t) has a trivial limit; use gamma = 2";
    else if (gamma == 2 && cls == DriftClass::Constant)
      why = "O(1) drift under m = floor(n^2 t) diverges; use gamma = 1 or decay exponent s = 1";
    else
      why = "gamma must be 1 or 2";
    throw std::invalid_argument("compare: incompatible kernel " + kernel.id() + " (drift " + to_string(cls) +
                                ") and gamma = " + std::to_string(gamma) + ": " + why);
  }
  return p;
}

namespace {

int refinement_factor(int resolution, int n, int requested) {
  const long target = requested > 0 ? requested : static_cast<long>(n) * n;
  if (target <= resolution) return 1;
  return static_cast<int>((target + resolution - 1) / resolution);
}

// Values of `fine` at the nodes of a grid `factor` times coarser.
GridFunction restrict_to(const GridFunction& fine, const GridFunction& coarse, int factor) {
  const int d = coarse.dimension();
  std::vector<double> out(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    std::size_t rem = k;
    std::size_t fine_flat = 0;
    std::size_t fine_stride = 1;
    for (int a = d - 1; a >= 0; --a) {
      const auto r = static_cast<std::size_t>(coarse.resolution(a));
      const std::size_t i = rem % r;
      rem /= r;
      fine_flat += i * static_cast<std::size_t>(factor) * fine_stride;
      fine_stride *= static_cast<std::size_t>(fine.resolution(a));
    }
    out[k] = fine[fine_flat];
  }
  return GridFunction(coarse.domain(), coarse.resolution(), std::move(out));
}

ComparisonReport run_compare(const KernelSpec& kernel, int n, double t, int gamma, const GridFunction& initial,
                             const GridFunction& fine_initial, int factor, const ComparisonConfig& cfg) {
  const CompositionSchedule sched = schedule(n, t, gamma);
  DriftDiffusionProblem problem = limiting_problem(kernel, gamma, initial, t);

  ComparisonReport rep;
  rep.kernel_id = kernel.id();
  rep.n = n;
  rep.gamma = gamma;
  rep.t = t;
  rep.m = sched.depth;
  rep.resolution = initial.resolution(0);
  rep.work_resolution = fine_initial.resolution(0);
  Point origin(static_cast<std::size_t>(kernel.dimension()), 0.0);
  rep.pde_drift = problem.drift(origin);
  rep.pde_diffusion = problem.diffusion(origin);
  rep.scaling_note = "depth m = floor(n^" + std::to_string(gamma) + " t); drift class " +
                     to_string(kernel.drift_class()) + "; composition on " + std::to_string(rep.work_resolution) +
                     " nodes per axis, PDE on " + std::to_string(rep.resolution);

  const OperatorConfig op{kernel, n, cfg.quadrature, cfg.threads};
  const GridFunction composed_fine = compose(op, fine_initial, sched.depth);
  const GridFunction composed = factor == 1 ? composed_fine : restrict_to(composed_fine, initial, factor);

  SolverConfig solver = cfg.solver;
  if (solver.threads == 1) solver.threads = cfg.threads;
  const GridFunction pde = solve(problem, solver);

  rep.gap = sup_norm_diff(composed, pde);
  rep.amp_compose = first_mode_amplitude(composed);
  rep.amp_pde = first_mode_amplitude(pde);
  return rep;
}

void check_args(const KernelSpec& kernel, int n, double t, int d) {
  if (n < 1) throw std::invalid_argument("compare: n must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("compare: t must be >= 0");
  if (d != kernel.dimension()) throw std::invalid_argument("compare: dimension mismatch");
}

}  // namespace

ComparisonReport compare(const KernelSpec& kernel, int n, double t, int gamma, const GridFunction& initial,
                         const ComparisonConfig& cfg) {
  check_args(kernel, n, t, initial.dimension());
  const int r = initial.resolution(0);
  for (int a = 1; a < initial.dimension(); ++a)
    if (initial.resolution(a) != r) throw std::invalid_argument("compare: grids must have equal resolution per axis");
  const int factor = refinement_factor(r, n, cfg.work_resolution);
  if (factor == 1) return run_compare(kernel, n, t, gamma, initial, initial, 1, cfg);
  const GridFunction fine = sample_to_grid(
      [&initial](std::span<const double> x) { return eval_interp(initial, x); }, initial.domain(), r * factor);
  return run_compare(kernel, n, t, gamma, initial, fine, factor, cfg);
}

ComparisonReport compare(const KernelSpec& kernel, int n, double t, int gamma, const TestFunction& initial,
                         int resolution, const ComparisonConfig& cfg) {
  check_args(kernel, n, t, initial.dimension);
  const Domain domain = Domain::unit_box(initial.dimension);
  const GridFunction coarse = sample_to_grid(initial.value, domain, resolution);
  const int factor = refinement_factor(resolution, n, cfg.work_resolution);
  if (factor == 1) return run_compare(kernel, n, t, gamma, coarse, coarse, 1, cfg);
  const GridFunction fine = sample_to_grid(initial.value, domain, resolution * factor);
  return run_compare(kernel, n, t, gamma, coarse, fine, factor, cfg);
}

}  // namespace kkno
