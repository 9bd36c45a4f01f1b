#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kkno/parallel.hpp"
#include "kkno/pde.hpp"

namespace kkno {

double cfl_dt(std::span<const double> drift_bound, std::span<const double> diffusion_bound, double h,
              double safety, double final_time) {
  if (!(h > 0.0)) throw std::invalid_argument("cfl_dt: grid spacing must be positive");
  double diff_sum = 0.0;
  for (double b : diffusion_bound) diff_sum += std::abs(b);
  double drift_sum = 0.0;
  for (double a : drift_bound) drift_sum += std::abs(a);
  if (diff_sum == 0.0 && drift_sum == 0.0) return final_time;
  double dt = h / (drift_sum + 1e-30);
  if (diff_sum > 0.0) dt = std::min(dt, h * h / (2.0 * diff_sum));
  return safety * dt;
}

namespace {

struct Stencil {
  int d = 0;
  std::vector<std::size_t> stride;
  std::vector<int> res;

  explicit Stencil(const GridFunction& g) : d(g.dimension()), stride(static_cast<std::size_t>(d)), res(g.resolution()) {
    std::size_t s = 1;
    for (int a = d - 1; a >= 0; --a) {
      stride[static_cast<std::size_t>(a)] = s;
      s *= static_cast<std::size_t>(res[static_cast<std::size_t>(a)]);
    }
  }

  int coord(std::size_t flat, std::size_t axis) const {
    return static_cast<int>((flat / stride[axis]) % static_cast<std::size_t>(res[axis]));
  }

  // Flat index of the node displaced by `step` along `axis`, wrapped.
  std::size_t shift(std::size_t flat, std::size_t axis, int step) const {
    const int r = res[axis];
    const int i = coord(flat, axis);
    const int j = ((i + step) % r + r) % r;
    return flat + static_cast<std::size_t>(j) * stride[axis] - static_cast<std::size_t>(i) * stride[axis];
  }
};

}  // namespace

GridFunction solve(const DriftDiffusionProblem& problem, const SolverConfig& cfg) {
  const GridFunction& f0 = problem.initial;
  if (!f0.domain().periodic()) throw std::invalid_argument("solve: the domain must be periodic");
  if (!(problem.final_time >= 0.0)) throw std::invalid_argument("solve: final time must be >= 0");
  if (!problem.drift || !problem.diffusion) throw std::invalid_argument("solve: coefficient fields are required");
  const int d = f0.dimension();
  const auto ud = static_cast<std::size_t>(d);
  const std::size_t count = f0.size();

  // Coefficients at every node, checked once.
  std::vector<double> drift(count * ud);
  std::vector<double> diff(count * ud * ud);
  std::vector<double> drift_bound(ud, 0.0);
  std::vector<double> diff_bound(ud, 0.0);
  Point x(ud);
  for (std::size_t k = 0; k < count; ++k) {
    f0.node(k, x);
    const Point a = problem.drift(x);
    const Matrix b = problem.diffusion(x);
    if (a.size() != ud || b.rows() != d || b.cols() != d)
      throw std::invalid_argument("solve: coefficient field has the wrong dimension");
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("solve: diffusion matrix is not symmetric");
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(b, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      std::ostringstream msg;
      msg << "solve: diffusion matrix is not positive semidefinite at node " << k;
      throw std::invalid_argument(msg.str());
    }
    for (std::size_t i = 0; i < ud; ++i) {
      drift[k * ud + i] = a[i];
      drift_bound[i] = std::max(drift_bound[i], std::abs(a[i]));
      for (std::size_t j = 0; j < ud; ++j)
        diff[(k * ud + i) * ud + j] = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      diff_bound[i] = std::max(diff_bound[i], b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    }
  }

  const double T = problem.final_time;
  if (T == 0.0) return f0;

  std::vector<double> h(ud);
  double h_min = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < ud; ++a) {
    h[a] = f0.spacing(static_cast<int>(a));
    h_min = std::min(h_min, h[a]);
  }
  const double limit = cfl_dt(drift_bound, diff_bound, h_min, 1.0, T);
  double dt = cfg.dt;
  if (dt > 0.0) {
    if (dt > limit * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "solve: time step " << dt << " exceeds the stability limit " << limit;
      throw std::invalid_argument(msg.str());
    }
  } else {
    if (!(cfg.safety > 0.0 && cfg.safety <= 1.0)) throw std::invalid_argument("solve: safety factor must be in (0, 1]");
    dt = cfl_dt(drift_bound, diff_bound, h_min, cfg.safety, T);
  }

  const Stencil st(f0);
  std::vector<double> cur(f0.values().begin(), f0.values().end());
  std::vector<double> next(count);

  auto step = [&](double tau) {
    parallel_for(count, cfg.threads, [&](std::size_t k) {
      const double u = cur[k];
      double rate = 0.0;
      for (std::size_t i = 0; i < ud; ++i) {
        const double up = cur[st.shift(k, i, 1)];
        const double dn = cur[st.shift(k, i, -1)];
        rate -= drift[k * ud + i] * (up - dn) / (2.0 * h[i]);
        rate += 0.5 * diff[(k * ud + i) * ud + i] * (up - 2.0 * u + dn) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < ud; ++j) {
          const double bij = diff[(k * ud + i) * ud + j];
          if (bij == 0.0) continue;
          const std::size_t ip = st.shift(k, i, 1);
          const std::size_t im = st.shift(k, i, -1);
          const double cross = cur[st.shift(ip, j, 1)] - cur[st.shift(ip, j, -1)] - cur[st.shift(im, j, 1)] +
                               cur[st.shift(im, j, -1)];
          // 1/2 (B_ij + B_ji) d_ij u
          rate += bij * cross / (4.0 * h[i] * h[j]);
        }
      }
      next[k] = u + tau * rate;
    });
    cur.swap(next);
  };

  const auto full_steps = static_cast<long>(std::floor(T / dt));
  for (long s = 0; s < full_steps; ++s) step(dt);
  const double remainder = T - static_cast<double>(full_steps) * dt;
  if (remainder > 1e-12 * T) step(remainder);

  return GridFunction(f0.domain(), f0.resolution(), std::move(cur));
}

double first_mode_amplitude(const GridFunction& g) {
  const Interval& ax = g.domain().axis(0);
  std::complex<double> acc{0.0, 0.0};
  Point x(static_cast<std::size_t>(g.dimension()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    g.node(k, x);
    const double phase = 2.0 * std::numbers::pi * (x[0] - ax.lower) / ax.width();
    acc += g[k] * std::complex<double>(std::cos(phase), -std::sin(phase));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(g.size());
}

}  // namespace kkno
