#include <cmath>
#include <set>

#include "json.hpp"
#include "kkno/experiments.hpp"

namespace kkno {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Moments: return "moments";
    case ExperimentKind::Admissible: return "admissible";
    case ExperimentKind::Converge: return "converge";
    case ExperimentKind::Voronovskaya: return "voronovskaya";
    case ExperimentKind::Korovkin: return "korovkin";
    case ExperimentKind::Rate: return "rate";
    case ExperimentKind::Compose: return "compose";
    case ExperimentKind::PdeCompare: return "pde-compare";
  }
  return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) fail(prefix + key, "unknown key");
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
  return j;
}

double get_real(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < -1000000000LL || v > 1000000000LL) fail(field, "out of range");
  return static_cast<int>(v);
}

int get_positive_int(const json& j, const std::string& field) {
  const int v = get_int(j, field);
  if (v < 1) fail(field, "must be >= 1");
  return v;
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) fail(field, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_reals(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_real(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

KernelSpec parse_kernel(const json& j, const std::string& prefix, bool allow_drifted) {
  require_object(j, prefix);
  const std::string p = prefix + ".";
  if (!j.contains("variant")) fail(p + "variant", "required");
  const std::string variant = get_string(j["variant"], p + "variant");

  if (variant == "cell_uniform") {
    reject_unknown(j, p, {"variant", "dimension"});
    if (!j.contains("dimension")) fail(p + "dimension", "required");
    return make_cell_uniform(get_positive_int(j["dimension"], p + "dimension"));
  }

  if (variant == "gaussian") {
    reject_unknown(j, p, {"variant", "dimension", "precision"});
    if (!j.contains("dimension")) fail(p + "dimension", "required");
    const int d = get_positive_int(j["dimension"], p + "dimension");
    Matrix a = Matrix::Identity(d, d);
    if (j.contains("precision")) {
      const json& rows = j["precision"];
      const std::string f = p + "precision";
      if (!rows.is_array() || static_cast<int>(rows.size()) != d) fail(f, "expected " + std::to_string(d) + " rows");
      for (int r = 0; r < d; ++r) {
        const std::vector<double> row = get_reals(rows[static_cast<std::size_t>(r)], f + "[" + std::to_string(r) + "]");
        if (static_cast<int>(row.size()) != d) fail(f, "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
        for (int c = 0; c < d; ++c) a(r, c) = row[static_cast<std::size_t>(c)];
      }
    }
    try {
      return make_gaussian(a);
    } catch (const std::exception& e) {
      fail(p + "precision", e.what());
    }
  }

  if (variant == "drifted") {
    if (!allow_drifted) fail(p + "variant", "a drifted kernel cannot be the base of another drifted kernel");
    reject_unknown(j, p, {"variant", "base", "drift", "decay"});
    if (!j.contains("base")) fail(p + "base", "required");
    if (!j.contains("drift")) fail(p + "drift", "required");
    if (!j.contains("decay")) fail(p + "decay", "required");
    const KernelSpec base = parse_kernel(j["base"], p + "base", false);
    const std::vector<double> c = get_reals(j["drift"], p + "drift");
    if (static_cast<int>(c.size()) != base.dimension())
      fail(p + "drift", "length must equal the base dimension " + std::to_string(base.dimension()));
    const int decay = get_int(j["decay"], p + "decay");
    if (decay != 0 && decay != 1) fail(p + "decay", "must be 0 or 1");
    return make_drifted(base, c, decay);
  }

  fail(p + "variant", "unknown variant '" + variant + "' (expected gaussian, cell_uniform or drifted)");
}

ExperimentKind parse_kind(const json& j) {
  const std::string s = get_string(j, "experiment");
  for (ExperimentKind k : {ExperimentKind::Moments, ExperimentKind::Admissible, ExperimentKind::Converge,
                           ExperimentKind::Voronovskaya, ExperimentKind::Korovkin, ExperimentKind::Rate,
                           ExperimentKind::Compose, ExperimentKind::PdeCompare})
    if (to_string(k) == s) return k;
  fail("experiment", "unknown experiment '" + s + "'");
}

// Top-level keys each experiment accepts beyond the common ones.
std::set<std::string> kind_keys(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Moments: return {"points", "n", "checks"};
    case ExperimentKind::Admissible: return {"points", "n", "checks"};
    case ExperimentKind::Converge: return {"function", "n", "resolution", "bound", "checks"};
    case ExperimentKind::Voronovskaya: return {"function", "n", "resolution", "power", "checks"};
    case ExperimentKind::Korovkin: return {"n", "resolution", "checks"};
    case ExperimentKind::Rate: return {"function", "n", "resolution", "checks"};
    case ExperimentKind::Compose: return {"function", "n", "resolution", "t", "gamma"};
    case ExperimentKind::PdeCompare: return {"function", "n", "resolution", "work_resolution", "t", "gamma", "checks"};
  }
  return {};
}

std::set<std::string> check_keys(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Moments:
    case ExperimentKind::Admissible:
    case ExperimentKind::Korovkin: return {"tolerance"};
    case ExperimentKind::Converge: return {"monotone_slack"};
    case ExperimentKind::Voronovskaya: return {"max_relative_residual", "strictly_decreasing"};
    case ExperimentKind::Rate: return {"monotone_slack", "alpha", "alpha_tolerance"};
    case ExperimentKind::Compose: return {};
    case ExperimentKind::PdeCompare:
      return {"max_gap", "expected_amplitude", "amplitude_tolerance", "strictly_decreasing"};
  }
  return {};
}

std::vector<Point> default_points(int d) {
  std::vector<Point> pts;
  for (int k = 0; k < 5; ++k) pts.emplace_back(static_cast<std::size_t>(d), 0.1 + 0.2 * k);
  return pts;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  if (!root.contains("experiment")) fail("experiment", "required");
  if (!root.contains("kernel")) fail("kernel", "required");

  ExperimentConfig cfg;
  cfg.kind = parse_kind(root["experiment"]);
  std::set<std::string> allowed = {"experiment", "kernel", "quadrature", "output"};
  allowed.merge(kind_keys(cfg.kind));
  reject_unknown(root, "", allowed);

  cfg.kernel = parse_kernel(root["kernel"], "kernel", true);
  const int d = cfg.kernel.dimension();

  if (root.contains("quadrature")) {
    const json& q = require_object(root["quadrature"], "quadrature");
    reject_unknown(q, "quadrature.", {"legendre", "hermite"});
    if (q.contains("legendre")) cfg.quadrature.legendre_order = get_positive_int(q["legendre"], "quadrature.legendre");
    if (q.contains("hermite")) cfg.quadrature.hermite_order = get_positive_int(q["hermite"], "quadrature.hermite");
  }
  if (root.contains("output")) cfg.output = get_string(root["output"], "output");

  const bool needs_function = allowed.contains("function");
  if (needs_function) {
    if (!root.contains("function")) fail("function", "required");
    cfg.function = get_string(root["function"], "function");
    try {
      (void)test_function(cfg.function, d);
    } catch (const std::exception& e) {
      fail("function", e.what());
    }
  }

  if (root.contains("n")) {
    const json& nl = root["n"];
    if (!nl.is_array() || nl.empty()) fail("n", "expected a non-empty array of integers");
    for (std::size_t i = 0; i < nl.size(); ++i) cfg.n_list.push_back(get_positive_int(nl[i], "n[" + std::to_string(i) + "]"));
  }
  const bool point_kind = cfg.kind == ExperimentKind::Moments || cfg.kind == ExperimentKind::Admissible;
  if (point_kind) {
    if (cfg.n_list.empty()) cfg.n_list = {cfg.kind == ExperimentKind::Moments ? 1 : 8};
    if (cfg.n_list.size() != 1) fail("n", "expects exactly one value for " + to_string(cfg.kind));
  } else {
    if (cfg.n_list.empty()) fail("n", "required");
    for (std::size_t i = 1; i < cfg.n_list.size(); ++i)
      if (cfg.n_list[i] <= cfg.n_list[i - 1]) fail("n", "values must be strictly increasing");
  }
  const bool table_kind = cfg.kind == ExperimentKind::Converge || cfg.kind == ExperimentKind::Rate;
  if (table_kind && cfg.n_list.size() < 3) fail("n", "needs at least 3 values");

  if (root.contains("points")) {
    const json& pts = root["points"];
    if (!pts.is_array() || pts.empty()) fail("points", "expected a non-empty array of points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string f = "points[" + std::to_string(i) + "]";
      Point x = get_reals(pts[i], f);
      if (static_cast<int>(x.size()) != d) fail(f, "expected " + std::to_string(d) + " coordinates");
      cfg.points.push_back(std::move(x));
    }
  } else if (point_kind) {
    cfg.points = default_points(d);
  }

  if (root.contains("resolution")) {
    cfg.resolution = get_int(root["resolution"], "resolution");
    if (cfg.resolution < 2) fail("resolution", "must be >= 2");
  }
  if (root.contains("work_resolution")) {
    cfg.work_resolution = get_int(root["work_resolution"], "work_resolution");
    if (cfg.work_resolution < 0) fail("work_resolution", "must be >= 0 (0 selects n^2)");
  }
  if (root.contains("power")) {
    cfg.power = get_int(root["power"], "power");
    if (cfg.power != 1 && cfg.power != 2) fail("power", "must be 1 or 2");
  }
  if (allowed.contains("t")) {
    if (!root.contains("t")) fail("t", "required");
    cfg.t = get_real(root["t"], "t");
    if (cfg.t < 0.0) fail("t", "must be >= 0");
    if (root.contains("gamma")) {
      cfg.gamma = get_int(root["gamma"], "gamma");
      if (cfg.gamma != 1 && cfg.gamma != 2) fail("gamma", "must be 1 or 2");
    }
  }
  if (root.contains("bound")) {
    const json& b = require_object(root["bound"], "bound");
    reject_unknown(b, "bound.", {"constant"});
    cfg.bound = true;
    if (b.contains("constant")) {
      if (b["constant"].is_string()) {
        if (b["constant"].get<std::string>() != "default") fail("bound.constant", "expected a number or \"default\"");
      } else {
        cfg.bound_constant = get_real(b["constant"], "bound.constant");
        if (*cfg.bound_constant < 0.0) fail("bound.constant", "must be >= 0");
      }
    }
    if (!cfg.bound_constant && cfg.kernel.is_drifted())
      fail("bound.constant", "drifted kernels have no default constant; give a number");
  }

  Checks& ck = cfg.checks;
  switch (cfg.kind) {
    case ExperimentKind::Moments:
    case ExperimentKind::Admissible: ck.tolerance = 1e-8; break;
    case ExperimentKind::Korovkin: ck.tolerance = 1e-10; break;
    default: break;
  }
  if (root.contains("checks")) {
    const json& c = require_object(root["checks"], "checks");
    reject_unknown(c, "checks.", check_keys(cfg.kind));
    auto nonneg = [&](const char* key) {
      const double v = get_real(c[key], std::string("checks.") + key);
      if (v < 0.0) fail(std::string("checks.") + key, "must be >= 0");
      return v;
    };
    if (c.contains("tolerance")) ck.tolerance = nonneg("tolerance");
    if (c.contains("monotone_slack")) ck.monotone_slack = nonneg("monotone_slack");
    if (c.contains("max_relative_residual")) ck.max_relative_residual = nonneg("max_relative_residual");
    if (c.contains("strictly_decreasing")) ck.strictly_decreasing = get_bool(c["strictly_decreasing"], "checks.strictly_decreasing");
    if (c.contains("alpha")) ck.alpha = get_real(c["alpha"], "checks.alpha");
    if (c.contains("alpha_tolerance")) ck.alpha_tolerance = nonneg("alpha_tolerance");
    if (c.contains("max_gap")) ck.max_gap = nonneg("max_gap");
    if (c.contains("expected_amplitude")) ck.expected_amplitude = get_real(c["expected_amplitude"], "checks.expected_amplitude");
    if (c.contains("amplitude_tolerance")) ck.amplitude_tolerance = nonneg("amplitude_tolerance");
    if (c.contains("alpha_tolerance") && !ck.alpha) fail("checks.alpha_tolerance", "given without checks.alpha");
    if (c.contains("amplitude_tolerance") && !ck.expected_amplitude)
      fail("checks.amplitude_tolerance", "given without checks.expected_amplitude");
  }

  // Pairings that the library would reject later are reported now, before any work.
  if (cfg.kind == ExperimentKind::Voronovskaya) {
    const DriftClass dc = cfg.kernel.drift_class();
    if (cfg.power == 2 && dc != DriftClass::Zero) fail("power", "power 2 needs a zero-drift kernel");
    if (cfg.power == 1 && dc != DriftClass::Constant) fail("power", "power 1 needs an O(1) drift kernel");
    if (cfg.power == 2 && !test_function(cfg.function, d).has_hessian())
      fail("function", "'" + cfg.function + "' has no Hessian; power 2 needs one");
    if (cfg.power == 1 && !test_function(cfg.function, d).has_gradient())
      fail("function", "'" + cfg.function + "' has no gradient; power 1 needs one");
  }
  if (cfg.kind == ExperimentKind::Korovkin && d > 3) fail("kernel.dimension", "korovkin supports d <= 3");
  if (cfg.kind == ExperimentKind::PdeCompare) {
    const Domain domain = Domain::unit_box(d);
    try {
      (void)limiting_problem(cfg.kernel, cfg.gamma, GridFunction(domain, 2, std::vector<double>(std::size_t{1} << d, 0.0)),
                             cfg.t);
    } catch (const std::invalid_argument& e) {
      fail("gamma", e.what());
    }
  }
  return cfg;
}

}  // namespace kkno
