#include "kkno/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace kkno {

namespace {

constexpr int kMaxNewtonIterations = 100;

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

void require_order(int order, const char* what) {
  if (order < 1) {
    std::ostringstream msg;
    msg << what << ": quadrature order must be >= 1, got " << order;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

QuadratureRule legendre_rule(int order) {
  require_order(order, "legendre_rule");
  QuadratureRule rule;
  rule.kind = QuadratureKind::Legendre;
  rule.order = order;
  rule.nodes.assign(static_cast<std::size_t>(order), 0.0);
  rule.weights.assign(static_cast<std::size_t>(order), 0.0);
  if (order == 1) {
    rule.weights[0] = 2.0;
    return rule;
  }

  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      auto [p, d] = legendre_with_derivative(order, x);
      dp = d;
      const double step = p / d;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    dp = legendre_with_derivative(order, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(order - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  return rule;
}

// Newton iteration on the orthonormal Hermite recurrence, with the classical
// asymptotic initial guesses for the largest roots.
QuadratureRule hermite_rule(int order) {
  require_order(order, "hermite_rule");
  QuadratureRule rule;
  rule.kind = QuadratureKind::Hermite;
  rule.order = order;
  rule.nodes.assign(static_cast<std::size_t>(order), 0.0);
  rule.weights.assign(static_cast<std::size_t>(order), 0.0);

  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  const int n = order;
  const int half = (n + 1) / 2;
  std::vector<double> roots(static_cast<std::size_t>(half));
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * roots[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * roots[1];
    else
      z = 2.0 * z - roots[static_cast<std::size_t>(i - 2)];

    double pp = 0.0;
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p1 = pim4;
    double p2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
    }
    pp = std::sqrt(2.0 * n) * p2;

    roots[static_cast<std::size_t>(i)] = z;
    const double w = 2.0 / (pp * pp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -z;
    rule.nodes[hi] = z;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double pairwise_sum(std::span<const double> terms) {
  constexpr std::size_t kBlock = 8;
  if (terms.size() <= kBlock) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t mid = terms.size() / 2;
  return pairwise_sum(terms.first(mid)) + pairwise_sum(terms.subspan(mid));
}

double integrate_box(const ScalarField& f, const std::vector<Interval>& box,
                     const std::vector<QuadratureRule>& rules) {
  const std::size_t d = box.size();
  if (d == 0) throw std::invalid_argument("integrate_box: empty box");
  if (rules.size() != 1 && rules.size() != d)
    throw std::invalid_argument("integrate_box: need one rule, or one rule per axis");
  auto rule_for = [&](std::size_t axis) -> const QuadratureRule& {
    return rules.size() == 1 ? rules.front() : rules[axis];
  };
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    const auto& r = rule_for(a);
    if (r.kind != QuadratureKind::Legendre)
      throw std::invalid_argument("integrate_box: box integration requires Legendre rules");
    if (!(box[a].lower < box[a].upper))
      throw std::invalid_argument("integrate_box: interval lower bound must be below upper bound");
    total *= r.nodes.size();
  }

  std::vector<double> terms(total);
  std::vector<std::size_t> idx(d, 0);
  Point x(d);
  for (std::size_t k = 0; k < total; ++k) {
    double w = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      const auto& r = rule_for(a);
      const double half = 0.5 * box[a].width();
      x[a] = box[a].lower + half * (r.nodes[idx[a]] + 1.0);
      w *= half * r.weights[idx[a]];
    }
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "integrate_box: non-finite integrand " << v << " at node (";
      for (std::size_t a = 0; a < d; ++a) msg << (a ? ", " : "") << x[a];
      msg << ")";
      throw std::domain_error(msg.str());
    }
    terms[k] = w * v;
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < rule_for(a).nodes.size()) break;
      idx[a] = 0;
    }
  }
  return pairwise_sum(terms);
}

}  // namespace kkno
