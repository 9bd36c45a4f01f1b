#include "kkno/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kkno {

Domain::Domain(std::vector<Interval> axes, bool periodic)
    : axes_(std::move(axes)), periodic_(periodic) {
  if (axes_.empty()) throw std::invalid_argument("Domain: dimension must be >= 1");
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (!(axes_[i].lower < axes_[i].upper)) {
      std::ostringstream msg;
      msg << "Domain: axis " << i << " has lower >= upper";
      throw std::invalid_argument(msg.str());
    }
  }
}

Domain Domain::unit_box(int dimension) {
  if (dimension < 1) throw std::invalid_argument("Domain: dimension must be >= 1");
  return Domain(std::vector<Interval>(static_cast<std::size_t>(dimension), Interval{0.0, 1.0}),
                true);
}

bool Domain::operator==(const Domain& other) const {
  if (periodic_ != other.periodic_ || axes_.size() != other.axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].lower != other.axes_[i].lower || axes_[i].upper != other.axes_[i].upper)
      return false;
  return true;
}

GridFunction::GridFunction(Domain domain, std::vector<int> resolution, std::vector<double> values)
    : domain_(std::move(domain)), resolution_(std::move(resolution)), values_(std::move(values)) {
  if (static_cast<int>(resolution_.size()) != domain_.dimension())
    throw std::invalid_argument("GridFunction: one resolution per axis required");
  std::size_t total = 1;
  for (int r : resolution_) {
    if (r < 1) throw std::invalid_argument("GridFunction: resolution must be positive");
    total *= static_cast<std::size_t>(r);
  }
  if (total != values_.size()) {
    std::ostringstream msg;
    msg << "GridFunction: expected " << total << " values, got " << values_.size();
    throw std::invalid_argument(msg.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "GridFunction: non-finite value at flat index " << i;
      throw std::domain_error(msg.str());
    }
  }
}

GridFunction::GridFunction(Domain domain, int resolution, std::vector<double> values)
    : GridFunction(domain, std::vector<int>(static_cast<std::size_t>(domain.dimension()), resolution),
                   std::move(values)) {}

double GridFunction::spacing(int axis) const {
  return domain_.axis(axis).width() / resolution(axis);
}

void GridFunction::node(std::size_t flat, std::span<double> out) const {
  for (int a = dimension() - 1; a >= 0; --a) {
    const auto r = static_cast<std::size_t>(resolution(a));
    const std::size_t i = flat % r;
    flat /= r;
    out[static_cast<std::size_t>(a)] = domain_.axis(a).lower + static_cast<double>(i) * spacing(a);
  }
}

Point GridFunction::node(std::size_t flat) const {
  Point x(static_cast<std::size_t>(dimension()));
  node(flat, x);
  return x;
}

bool GridFunction::same_shape(const GridFunction& other) const {
  return domain_ == other.domain_ && resolution_ == other.resolution_;
}

GridFunction sample_to_grid(const ScalarField& f, const Domain& domain, int resolution) {
  if (resolution < 2) throw std::invalid_argument("sample_to_grid: resolution must be >= 2");
  std::size_t total = 1;
  for (int a = 0; a < domain.dimension(); ++a) total *= static_cast<std::size_t>(resolution);
  // Build a throwaway grid to reuse the node-coordinate logic.
  GridFunction shape(domain, resolution, std::vector<double>(total, 0.0));
  std::vector<double> values(total);
  Point x(static_cast<std::size_t>(domain.dimension()));
  for (std::size_t k = 0; k < total; ++k) {
    shape.node(k, x);
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "sample_to_grid: non-finite sample at node " << k;
      throw std::domain_error(msg.str());
    }
    values[k] = v;
  }
  return GridFunction(domain, resolution, std::move(values));
}

double eval_interp(const GridFunction& g, std::span<const double> x) {
  const int d = g.dimension();
  if (d > 10) throw std::invalid_argument("eval_interp: dimension too large");

  // Per axis: lower index, upper index, and fractional offset.
  std::array<std::size_t, 10> lo{};
  std::array<std::size_t, 10> hi{};
  std::array<double, 10> frac{};
  std::array<std::size_t, 10> stride{};
  std::size_t s = 1;
  for (int a = d - 1; a >= 0; --a) {
    stride[static_cast<std::size_t>(a)] = s;
    s *= static_cast<std::size_t>(g.resolution(a));
  }

  const bool periodic = g.domain().periodic();
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const int r = g.resolution(a);
    const Interval& iv = g.domain().axis(a);
    double t = (x[ua] - iv.lower) / iv.width() * r;
    const double nearest = std::round(t);
    if (std::abs(t - nearest) < 1e-12 * std::max(1.0, std::abs(t))) t = nearest;
    if (periodic) {
      t -= r * std::floor(t / r);
      if (t >= r) t -= r;  // floor rounding on values just below r
    } else {
      t = std::clamp(t, 0.0, static_cast<double>(r - 1));
    }
    double cell = std::floor(t);
    int i0 = static_cast<int>(cell);
    if (!periodic && i0 >= r - 1) {
      i0 = std::max(0, r - 2);
      cell = i0;
    }
    frac[ua] = t - cell;
    lo[ua] = static_cast<std::size_t>(i0 % r);
    hi[ua] = static_cast<std::size_t>((i0 + 1) % r);
  }

  const int corners = 1 << d;
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const bool upper = (c >> a) & 1;
      const double wa = upper ? frac[ua] : 1.0 - frac[ua];
      if (wa == 0.0) {
        w = 0.0;
        break;
      }
      w *= wa;
      flat += (upper ? hi[ua] : lo[ua]) * stride[ua];
    }
    if (w != 0.0) acc += w * g[flat];
  }
  return acc;
}

double sup_norm_diff(const GridFunction& g1, const GridFunction& g2) {
  if (!g1.same_shape(g2)) throw std::invalid_argument("sup_norm_diff: grids differ in domain or resolution");
  double m = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) m = std::max(m, std::abs(g1[i] - g2[i]));
  return m;
}

double sup_norm(const GridFunction& g) {
  double m = 0.0;
  for (double v : g.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace kkno
