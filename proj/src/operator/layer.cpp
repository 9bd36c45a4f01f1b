#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kkno/operator.hpp"
#include "kkno/parallel.hpp"

namespace kkno {

Layer::Layer(OperatorConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.n < 1) throw std::invalid_argument("Layer: n must be >= 1");
  nodes_ = cfg_.kernel.base_nodes(cfg_.quadrature);
}

template <typename Eval>
double Layer::integrate(Eval&& eval, std::span<const double> x, std::span<double> point,
                        std::span<double> terms) const {
  const auto ud = static_cast<std::size_t>(dimension());
  const double inv_n = 1.0 / static_cast<double>(cfg_.n);
  const Point shift = cfg_.kernel.shift(x, cfg_.n);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto u = nodes_.point(k);
    for (std::size_t a = 0; a < ud; ++a) point[a] = x[a] - (u[a] + shift[a]) * inv_n;
    const double v = eval(std::span<const double>(point.data(), ud));
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "KKNO layer: non-finite integrand " << v << " at u = (";
      for (std::size_t a = 0; a < ud; ++a) msg << (a ? ", " : "") << u[a] + shift[a];
      msg << ")";
      throw std::domain_error(msg.str());
    }
    terms[k] = nodes_.weights[k] * v;
  }
  return pairwise_sum(terms.first(nodes_.size()));
}

double Layer::apply(const ScalarField& f, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension()) throw std::invalid_argument("Layer::apply: point dimension mismatch");
  Point point(x.size());
  std::vector<double> terms(nodes_.size());
  return integrate(f, x, point, terms);
}

GridFunction Layer::apply(const GridFunction& g) const {
  if (g.dimension() != dimension()) throw std::invalid_argument("Layer::apply: grid dimension mismatch");
  if (!g.domain().periodic()) throw std::invalid_argument("Layer::apply: grid functions must live on a periodic domain");
  const auto ud = static_cast<std::size_t>(dimension());
  std::vector<double> out(g.size());
  const unsigned threads = cfg_.threads == 0 ? 1 : cfg_.threads;
  const std::size_t chunks = std::min<std::size_t>(threads, g.size());
  // Each chunk owns its scratch buffers; every node is computed independently.
  const std::size_t per = (g.size() + chunks - 1) / chunks;
  parallel_for(chunks, threads, [&](std::size_t c) {
    Point x(ud);
    Point point(ud);
    std::vector<double> terms(nodes_.size());
    auto interp = [&g](std::span<const double> p) { return eval_interp(g, p); };
    const std::size_t end = std::min(g.size(), (c + 1) * per);
    for (std::size_t i = c * per; i < end; ++i) {
      g.node(i, x);
      out[i] = integrate(interp, x, point, terms);
    }
  });
  return GridFunction(g.domain(), g.resolution(), std::move(out));
}

double apply_point(const OperatorConfig& cfg, const ScalarField& f, std::span<const double> x) {
  return Layer(cfg).apply(f, x);
}

GridFunction apply_grid(const OperatorConfig& cfg, const GridFunction& g) { return Layer(cfg).apply(g); }

GridFunction compose(const OperatorConfig& cfg, GridFunction g, long m) {
  if (m < 0) throw std::invalid_argument("compose: depth must be >= 0");
  if (m == 0) return g;
  const Layer layer(cfg);
  for (long k = 0; k < m; ++k) g = layer.apply(g);
  return g;
}

CompositionSchedule schedule(int n, double t, int gamma) {
  if (n < 1) throw std::invalid_argument("schedule: n must be >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("schedule: depth-time t must be >= 0");
  if (gamma != 1 && gamma != 2) throw std::invalid_argument("schedule: gamma must be 1 or 2");
  const double scale = gamma == 1 ? static_cast<double>(n) : static_cast<double>(n) * n;
  const double product = scale * t;
  // Decimal t such as 0.29 is not exactly representable; a product within
  // rounding of an integer is taken as that integer.
  double m = std::floor(product);
  if (product - m > 1.0 - 1e-9 * std::max(1.0, product)) m += 1.0;
  return CompositionSchedule{n, t, gamma, static_cast<long>(m)};
}

}  // namespace kkno
