#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "kkno/kernels.hpp"
#include "kkno/numerics.hpp"
#include "kkno/operator.hpp"

namespace kkno {

using MatrixField = std::function<Matrix(std::span<const double>)>;

/// dF/dt = -a(x) . grad F + 1/2 sum_ij B_ij(x) d_ij F on the periodic box.
struct DriftDiffusionProblem {
  DriftField drift;
  MatrixField diffusion;
  GridFunction initial;
  double final_time = 0.0;
};

struct SolverConfig {
  double dt = 0.0;  // 0 selects cfl_dt
  double safety = 0.5;
  unsigned threads = 1;
};

/// Explicit time step: safety * min(h^2 / (2 sum_i max B_ii), h / (sum_i max |a_i| + 1e-30)).
/// With both coefficients identically zero the whole interval is one step.
double cfl_dt(std::span<const double> drift_bound, std::span<const double> diffusion_bound, double h,
              double safety, double final_time);

/// Forward Euler with centered differences and periodic indexing. The last
/// step is shortened to land on final_time exactly.
GridFunction solve(const DriftDiffusionProblem& problem, const SolverConfig& cfg = {});

/// Amplitude of the first Fourier mode along axis 0.
double first_mode_amplitude(const GridFunction& g);

struct ComparisonConfig {
  QuadratureConfig quadrature;
  SolverConfig solver;
  /// Composition runs on a refinement of the input grid with at least this
  /// many nodes per axis; 0 selects n^2. The result is read back at the
  /// input nodes.
  int work_resolution = 0;
  unsigned threads = 1;
};

struct ComparisonReport {
  std::string kernel_id;
  int n = 0;
  int gamma = 1;
  double t = 0.0;
  long m = 0;
  int resolution = 0;
  int work_resolution = 0;
  Point pde_drift;
  Matrix pde_diffusion;
  double gap = 0.0;
  double amp_compose = 0.0;
  double amp_pde = 0.0;
  std::string scaling_note;
};

/// Deep composition at depth floor(n^gamma t) against the drift-diffusion
/// solve at time t. Admissible pairs: (O(1) drift, gamma 1) -> transport,
/// (zero drift, gamma 2) -> heat, (O(1/n) drift, gamma 2) -> drift-diffusion.
ComparisonReport compare(const KernelSpec& kernel, int n, double t, int gamma, const GridFunction& initial,
                         const ComparisonConfig& cfg = {});

/// Same comparison with the initial condition sampled exactly at both the
/// report grid (`resolution` per axis on [0,1]^d) and the working grid.
ComparisonReport compare(const KernelSpec& kernel, int n, double t, int gamma, const TestFunction& initial,
                         int resolution, const ComparisonConfig& cfg = {});

/// Limiting PDE coefficients for a kernel under the given depth scaling.
/// Throws for incompatible (drift class, gamma) pairs.
DriftDiffusionProblem limiting_problem(const KernelSpec& kernel, int gamma, const GridFunction& initial, double t);

}  // namespace kkno
