#include "kkno/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kkno/parallel.hpp"

namespace kkno {

namespace {

void require_increasing(const std::vector<int>& n_list, std::size_t min_rows, const char* what) {
  if (n_list.size() < min_rows) {
    std::ostringstream msg;
    msg << what << ": need at least " << min_rows << " values of n";
    throw std::invalid_argument(msg.str());
  }
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw std::invalid_argument(std::string(what) + ": n must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw std::invalid_argument(std::string(what) + ": n list must be strictly increasing");
  }
}

// Probe grid nodes on [0,1]^d.
GridFunction probe_grid(int d, int resolution) {
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(resolution);
  return GridFunction(Domain::unit_box(d), resolution, std::vector<double>(total, 0.0));
}

// Max over probe nodes of |value(x)|, computed node-parallel.
template <typename NodeValue>
double sup_over_probe(int d, const ErrorProbe& probe, NodeValue&& value) {
  const GridFunction grid = probe_grid(d, probe.resolution);
  std::vector<double> vals(grid.size());
  parallel_for(grid.size(), probe.threads, [&](std::size_t i) {
    const Point x = grid.node(i);
    vals[i] = std::abs(value(std::span<const double>(x)));
  });
  return *std::max_element(vals.begin(), vals.end());
}

}  // namespace

namespace {

struct PairScan {
  double value = 0.0;
  double resolved_delta = 0.0;  // every direction is realized by an offset at least this long
};

PairScan scan_pairs(const ScalarField& f, double delta, const Domain& domain, int points_per_axis) {
  if (!(delta > 0.0)) throw std::invalid_argument("modulus: delta must be positive");
  if (points_per_axis < 1) throw std::invalid_argument("modulus: need at least one interval per axis");
  const int d = domain.dimension();
  const auto ud = static_cast<std::size_t>(d);
  const int m = points_per_axis;
  const std::size_t side = static_cast<std::size_t>(m) + 1;
  std::vector<double> h(ud);
  for (std::size_t a = 0; a < ud; ++a) h[a] = domain.axis(static_cast<int>(a)).width() / m;

  // Tabulate f on the closed (M+1)^d grid.
  std::size_t total = 1;
  for (std::size_t a = 0; a < ud; ++a) total *= side;
  std::vector<double> vals(total);
  std::vector<std::size_t> idx(ud, 0);
  Point x(ud);
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t a = 0; a < ud; ++a) x[a] = domain.axis(static_cast<int>(a)).lower + idx[a] * h[a];
    vals[k] = f(x);
    for (std::size_t a = ud; a-- > 0;) {
      if (++idx[a] < side) break;
      idx[a] = 0;
    }
  }

  // Integer offsets inside the delta-ball; keep one of each +-pair. Rounding
  // a vector to the nearest offset moves it by at most |h|/2 per endpoint.
  PairScan scan;
  double h2 = 0.0;
  for (double ha : h) h2 += ha * ha;
  scan.resolved_delta = std::max(0.0, delta - std::sqrt(h2));
  std::vector<std::vector<int>> offsets;
  std::vector<int> reach(ud);
  for (std::size_t a = 0; a < ud; ++a) reach[a] = static_cast<int>(std::floor(delta / h[a] + 1e-12));
  std::vector<int> o(ud);
  for (std::size_t a = 0; a < ud; ++a) o[a] = -reach[a];
  while (true) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < ud; ++a) r2 += (o[a] * h[a]) * (o[a] * h[a]);
    bool positive = false;
    for (std::size_t a = 0; a < ud; ++a) {
      if (o[a] != 0) {
        positive = o[a] > 0;
        break;
      }
    }
    if (positive && r2 <= delta * delta * (1.0 + 1e-12)) {
      offsets.push_back(o);
    }
    std::size_t a = ud;
    while (a-- > 0) {
      if (++o[a] <= reach[a]) break;
      o[a] = -reach[a];
    }
    if (a == static_cast<std::size_t>(-1)) break;
  }

  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    for (const auto& off : offsets) {
      std::size_t other = 0;
      bool inside = true;
      for (std::size_t a = 0; a < ud; ++a) {
        const long j = static_cast<long>(idx[a]) + off[a];
        if (j < 0 || j >= static_cast<long>(side)) {
          inside = false;
          break;
        }
        other = other * side + static_cast<std::size_t>(j);
      }
      if (inside) scan.value = std::max(scan.value, std::abs(vals[k] - vals[other]));
    }
    for (std::size_t a = ud; a-- > 0;) {
      if (++idx[a] < side) break;
      idx[a] = 0;
    }
  }
  return scan;
}

}  // namespace

double sampled_modulus(const ScalarField& f, double delta, const Domain& domain, int points_per_axis) {
  return scan_pairs(f, delta, domain, points_per_axis).value;
}

ModulusEstimate modulus(const TestFunction& f, double delta, const Domain& domain, int points_per_axis) {
  if (points_per_axis < 64) throw std::invalid_argument("modulus: need at least 64 points per axis");
  ModulusEstimate est;
  const PairScan scan = scan_pairs(f.value, delta, domain, points_per_axis);
  est.sampled = scan.value;
  if (f.modulus) {
    est.value = f.modulus(delta);
    est.from_formula = true;
    // Grid pairs cannot see the extremal direction at full length, so the
    // sample must land between the formula at resolved_delta (less 2%) and
    // the formula at delta.
    const double floor_value = f.modulus(scan.resolved_delta);
    est.cross_checked = est.sampled <= est.value * (1.0 + 1e-12) + 1e-15 &&
                        est.sampled >= 0.98 * floor_value - 1e-15;
  } else {
    est.value = est.sampled;
  }
  return est;
}

double sup_error(const OperatorConfig& cfg, const ScalarField& f, const ErrorProbe& probe) {
  const Layer layer(cfg);
  return sup_over_probe(cfg.kernel.dimension(), probe,
                        [&](std::span<const double> x) { return layer.apply(f, x) - f(x); });
}

ConvergenceTable convergence_table(const KernelSpec& kernel, const TestFunction& f, const std::vector<int>& n_list,
                                   const ErrorProbe& probe) {
  require_increasing(n_list, 3, "convergence_table");
  if (f.dimension != kernel.dimension()) throw std::invalid_argument("convergence_table: dimension mismatch");
  ConvergenceTable table;
  table.kernel_id = kernel.id();
  table.function_name = f.name;
  for (int n : n_list) {
    const OperatorConfig cfg{kernel, n, probe.quadrature, probe.threads};
    table.rows.push_back({n, sup_error(cfg, f.value, probe)});
  }
  return table;
}

double default_constant(const KernelSpec& kernel) {
  if (kernel.is_gaussian()) return 1.0 + kernel.diffusion().cwiseAbs().sum();
  if (kernel.is_cell_uniform()) return 1.0 + kernel.dimension() / 4.0;
  throw std::invalid_argument("default_constant: no closed-form constant for " + kernel.id() +
                              "; supply the constant explicitly");
}

BoundReport bound_check(const ConvergenceTable& table, const TestFunction& f, double constant,
                        const Domain& domain) {
  if (!(constant >= 0.0)) throw std::invalid_argument("bound_check: constant must be non-negative");
  BoundReport rep;
  rep.constant = constant;
  rep.pass = true;
  for (const auto& row : table.rows) {
    const double omega = modulus(f, 1.0 / row.n, domain).value;
    BoundRow b{row.n, row.sup_error, constant * omega, 0.0};
    b.margin = b.bound - b.error;
    if (b.margin < -1e-12) rep.pass = false;
    rep.rows.push_back(b);
  }
  return rep;
}

VoronovskayaReport voronovskaya(const KernelSpec& kernel, const TestFunction& f, const std::vector<int>& n_list,
                                int power, const ErrorProbe& probe) {
  require_increasing(n_list, 1, "voronovskaya");
  const int d = kernel.dimension();
  if (f.dimension != d) throw std::invalid_argument("voronovskaya: dimension mismatch");
  const auto ud = static_cast<std::size_t>(d);

  VoronovskayaReport rep;
  rep.power = power;
  ScalarField limit;
  if (power == 1) {
    if (kernel.drift_class() != DriftClass::Constant)
      throw std::invalid_argument("voronovskaya: p = 1 requires O(1) drift; kernel " + kernel.id() + " has drift " +
                                  to_string(kernel.drift_class()));
    if (!f.has_gradient()) throw std::invalid_argument("voronovskaya: p = 1 requires a gradient");
    rep.drift_term = "-a(x).grad f";
    rep.diffusion_term = "none";
    rep.note = "p=1: O(1) drift dominates; diffusion enters at O(1/n)";
    limit = [&kernel, &f, ud](std::span<const double> x) {
      std::vector<double> g(ud);
      f.gradient(x, g);
      const Point a = kernel.limiting_drift(x);
      double s = 0.0;
      for (std::size_t i = 0; i < ud; ++i) s -= a[i] * g[i];
      return s;
    };
  } else if (power == 2) {
    if (kernel.drift_class() != DriftClass::Zero)
      throw std::invalid_argument("voronovskaya: p = 2 requires zero drift; kernel " + kernel.id() + " has drift " +
                                  to_string(kernel.drift_class()));
    if (!f.has_hessian()) throw std::invalid_argument("voronovskaya: p = 2 requires a Hessian; " + f.name + " has none");
    rep.drift_term = "none";
    rep.diffusion_term = "1/2 B:D^2 f";
    rep.note = "p=2: zero-drift kernels have an O(1/n^2) leading error";
    const Matrix b = kernel.diffusion();
    limit = [b, &f, ud](std::span<const double> x) {
      std::vector<double> h(ud * ud);
      f.hessian(x, h);
      double s = 0.0;
      for (std::size_t i = 0; i < ud; ++i)
        for (std::size_t j = 0; j < ud; ++j)
          s += b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * h[i * ud + j];
      return 0.5 * s;
    };
  } else {
    throw std::invalid_argument("voronovskaya: normalization power must be 1 or 2");
  }

  rep.limit_sup = sup_over_probe(d, probe, limit);
  for (int n : n_list) {
    const Layer layer(OperatorConfig{kernel, n, probe.quadrature, probe.threads});
    const double scale = std::pow(static_cast<double>(n), power);
    const double r = sup_over_probe(d, probe, [&](std::span<const double> x) {
      return scale * (layer.apply(f.value, x) - f(x)) - limit(x);
    });
    rep.rows.push_back({n, r});
  }
  return rep;
}

double KorovkinReport::max_error(int n) const {
  double m = 0.0;
  for (const auto& r : rows)
    if (r.n == n) m = std::max(m, r.sup_error);
  return m;
}

KorovkinReport korovkin(const KernelSpec& kernel, const std::vector<int>& n_list, const ErrorProbe& probe) {
  require_increasing(n_list, 1, "korovkin");
  const int d = kernel.dimension();
  if (d > 3) throw std::invalid_argument("korovkin: dimension must be <= 3");

  std::vector<std::pair<std::string, TestFunction>> monomials;
  monomials.emplace_back("e0", test_function("const1", d));
  for (int i = 1; i <= d; ++i)
    monomials.emplace_back("e" + std::to_string(i), test_function("coord(" + std::to_string(i) + ")", d));
  for (int i = 1; i <= d; ++i)
    for (int j = i; j <= d; ++j)
      monomials.emplace_back("e" + std::to_string(i) + std::to_string(j),
                             test_function("quad(" + std::to_string(i) + "," + std::to_string(j) + ")", d));

  KorovkinReport rep;
  for (const auto& [label, f] : monomials) {
    for (int n : n_list) {
      const OperatorConfig cfg{kernel, n, probe.quadrature, probe.threads};
      rep.rows.push_back({label, n, sup_error(cfg, f.value, probe)});
    }
  }
  return rep;
}

RateFit fit_rate(const ConvergenceTable& table) {
  if (table.rows.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 rows");
  std::vector<double> lx, ly;
  for (const auto& r : table.rows) {
    if (!(r.sup_error > 1e-14))
      throw std::invalid_argument("fit_rate: error at n = " + std::to_string(r.n) +
                                  " is not positive; the rate is undefined");
    lx.push_back(std::log(static_cast<double>(r.n)));
    ly.push_back(std::log(r.sup_error));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: n values must differ");
  const double slope = sxy / sxx;
  RateFit fit;
  fit.alpha = -slope;
  fit.intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + slope * lx[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace kkno
