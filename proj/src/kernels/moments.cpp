#include <cmath>
#include <stdexcept>

#include "kkno/kernels.hpp"

namespace kkno {

MomentReport moments(const KernelSpec& spec, std::span<const double> x, int n, const QuadratureConfig& quad) {
  if (n < 1) throw std::invalid_argument("moments: n must be >= 1");
  const int d = spec.dimension();
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("moments: point dimension mismatch");
  const auto ud = static_cast<std::size_t>(d);

  const NodeSet nodes = spec.base_nodes(quad);
  const Point shift = spec.shift(x, n);
  const std::size_t count = nodes.size();

  // One term buffer per moment component, all evaluated on the same node set.
  std::vector<double> terms(count);
  Point u(ud);
  auto reduce = [&](auto&& integrand) {
    for (std::size_t k = 0; k < count; ++k) {
      const auto p = nodes.point(k);
      for (std::size_t a = 0; a < ud; ++a) u[a] = p[a] + shift[a];
      terms[k] = nodes.weights[k] * integrand(u);
    }
    return pairwise_sum(terms);
  };

  MomentReport r;
  r.x.assign(x.begin(), x.end());
  r.n = n;
  r.quadrature = quad;
  r.mass = reduce([](const Point&) { return 1.0; });
  r.first = Eigen::VectorXd(d);
  r.second = Matrix(d, d);
  for (std::size_t i = 0; i < ud; ++i) {
    r.first(static_cast<Eigen::Index>(i)) = reduce([i](const Point& v) { return v[i]; });
    for (std::size_t j = 0; j <= i; ++j) {
      const double m = reduce([i, j](const Point& v) { return v[i] * v[j]; });
      r.second(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m;
      r.second(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = m;
    }
  }
  r.third_abs = reduce([](const Point& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s * std::sqrt(s);
  });
  return r;
}

namespace {

Matrix central_second(const MomentReport& r) {
  return r.second - r.first * r.first.transpose() / r.mass;
}

}  // namespace

AdmissibilityReport check_admissible(const KernelSpec& spec, const QuadratureConfig& quad, double tol,
                                     const std::vector<Point>& sample_points, int probe_n) {
  if (!(tol > 0.0)) throw std::invalid_argument("check_admissible: tolerance must be positive");
  if (sample_points.empty()) throw std::invalid_argument("check_admissible: need at least one sample point");
  if (probe_n < 1) throw std::invalid_argument("check_admissible: probe n must be >= 1");

  AdmissibilityReport rep;
  rep.tolerance = tol;
  rep.sample_points = sample_points;
  rep.probe_n = {probe_n, 2 * probe_n};

  bool classified = true;
  bool first_point = true;
  bool k3_ok = true;
  DriftClass cls = DriftClass::Zero;
  for (const Point& x : sample_points) {
    const MomentReport lo = moments(spec, x, probe_n, quad);
    const MomentReport hi = moments(spec, x, 2 * probe_n, quad);

    rep.mass_error = std::max({rep.mass_error, std::abs(lo.mass - 1.0), std::abs(hi.mass - 1.0)});

    // Drift decay: compare m1 at n and 2n.
    const double m_lo = lo.first.norm();
    const double m_hi = hi.first.norm();
    DriftClass here;
    if (!std::isfinite(m_lo) || !std::isfinite(m_hi)) {
      classified = false;
      here = DriftClass::Zero;
    } else if (m_lo <= tol && m_hi <= tol) {
      here = DriftClass::Zero;
    } else {
      const double ratio = m_hi / m_lo;
      if (std::abs(ratio - 1.0) < 0.1) {
        here = DriftClass::Constant;
      } else if (std::abs(ratio - 0.5) < 0.1) {
        here = DriftClass::InverseN;
      } else {
        classified = false;
        here = DriftClass::Constant;
      }
    }
    if (first_point) {
      cls = here;
      const double scale = here == DriftClass::InverseN ? 2.0 * probe_n : 1.0;
      rep.drift = hi.first * scale;
    } else if (here != cls) {
      // Mixed classes across x: report the slowest decay.
      if (here == DriftClass::Constant || (here == DriftClass::InverseN && cls == DriftClass::Zero)) cls = here;
    }

    // Second moment about the mean must not depend on n.
    const Matrix b_lo = central_second(lo);
    const Matrix b_hi = central_second(hi);
    if (!b_lo.allFinite() || !b_hi.allFinite()) {
      k3_ok = false;
    } else {
      const double scale = 1.0 + b_lo.cwiseAbs().maxCoeff();
      if ((b_lo - b_hi).cwiseAbs().maxCoeff() > tol * scale) k3_ok = false;
      rep.diffusion_bound = std::max(rep.diffusion_bound, b_lo.cwiseAbs().maxCoeff());
    }
    if (first_point) rep.diffusion = b_lo;
    first_point = false;
  }

  rep.k1_pass = rep.mass_error <= tol;
  rep.drift_class = cls;
  rep.k2_pass = classified;
  rep.k3_pass = k3_ok;
  return rep;
}

}  // namespace kkno
