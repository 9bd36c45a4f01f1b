#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kkno/experiments.hpp"

namespace kkno {

namespace {

namespace fs = std::filesystem;

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::vector<Verdict> verdicts;
};

void verdict(Artifacts& a, std::string check, bool pass, std::string detail) {
  a.verdicts.push_back({std::move(check), pass, std::move(detail)});
}

std::string sci(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(4);
  s << std::scientific << v;
  return s.str();
}

void add_plot(Artifacts& a, std::ostream& diag, const std::string& title, const std::string& y_label,
              const std::vector<PlotSeries>& series) {
  try {
    const Plot p = render_plot(title, "n", y_label, series);
    if (!p.warning.empty()) diag << "warning: plot: " << p.warning << "\n";
    a.files.emplace_back("plot.svg", p.svg);
  } catch (const std::invalid_argument& e) {
    verdict(a, "plot", false, e.what());
  }
}

PlotSeries series_of(const std::string& name, const std::vector<int>& n, const std::vector<double>& y) {
  PlotSeries s{name, {}, y};
  for (int v : n) s.x.push_back(v);
  return s;
}

void check_monotone(Artifacts& a, const ConvergenceTable& table, double slack) {
  bool ok = true;
  std::string detail = "errors nonincreasing in n";
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].sup_error > table.rows[i - 1].sup_error + slack) {
      ok = false;
      detail = "error rises from n=" + std::to_string(table.rows[i - 1].n) + " to n=" + std::to_string(table.rows[i].n);
      break;
    }
  verdict(a, "monotone", ok, detail);
}

Artifacts run_moments(const ExperimentConfig& cfg) {
  Artifacts a;
  const int n = cfg.n_list.front();
  std::vector<MomentReport> reps;
  double mass_err = 0.0, first_err = 0.0, second_err = 0.0;
  const Matrix b = cfg.kernel.diffusion();
  for (const Point& x : cfg.points) {
    reps.push_back(moments(cfg.kernel, x, n, cfg.quadrature));
    const MomentReport& r = reps.back();
    // Symmetric base kernels: the first moment is the shift, the second the
    // base covariance plus the shift's outer product.
    const Point s = cfg.kernel.shift(x, n);
    const Eigen::Map<const Eigen::VectorXd> sv(s.data(), static_cast<Eigen::Index>(s.size()));
    mass_err = std::max(mass_err, std::abs(r.mass - 1.0));
    first_err = std::max(first_err, (r.first - sv).cwiseAbs().maxCoeff());
    second_err = std::max(second_err, (r.second - b - sv * sv.transpose()).cwiseAbs().maxCoeff());
  }
  a.files.emplace_back("moments.csv", to_csv(moments_csv(reps)));
  const double tol = cfg.checks.tolerance;
  verdict(a, "mass", mass_err <= tol, "max |mass - 1| = " + sci(mass_err));
  verdict(a, "first_moment", first_err <= tol, "max deviation from the closed form = " + sci(first_err));
  verdict(a, "second_moment", second_err <= tol, "max deviation from the closed form = " + sci(second_err));
  return a;
}

Artifacts run_admissible(const ExperimentConfig& cfg) {
  Artifacts a;
  const AdmissibilityReport r =
      check_admissible(cfg.kernel, cfg.quadrature, cfg.checks.tolerance, cfg.points, cfg.n_list.front());
  CsvTable t{{"check", "value", "pass"}, {}};
  t.rows.push_back({"K1_mass_error", format_real(r.mass_error), r.k1_pass ? "1" : "0"});
  t.rows.push_back({"K2_drift_norm", format_real(r.drift.size() ? r.drift.cwiseAbs().maxCoeff() : 0.0), r.k2_pass ? "1" : "0"});
  t.rows.push_back({"K3_diffusion_bound", format_real(r.diffusion_bound), r.k3_pass ? "1" : "0"});
  a.files.emplace_back("admissible.csv", to_csv(t));
  verdict(a, "K1", r.k1_pass, "max |mass - 1| = " + sci(r.mass_error));
  verdict(a, "K2", r.k2_pass, "drift class " + to_string(r.drift_class));
  verdict(a, "K3", r.k3_pass, "second moment bound " + sci(r.diffusion_bound));
  return a;
}

Artifacts run_converge(const ExperimentConfig& cfg, const ErrorProbe& probe, bool plot, std::ostream& diag) {
  Artifacts a;
  const TestFunction f = test_function(cfg.function, cfg.kernel.dimension());
  const ConvergenceTable table = convergence_table(cfg.kernel, f, cfg.n_list, probe);
  a.files.emplace_back("converge.csv", to_csv(converge_csv(table)));
  check_monotone(a, table, cfg.checks.monotone_slack);

  std::vector<double> err;
  for (const auto& r : table.rows) err.push_back(r.sup_error);
  std::vector<PlotSeries> series{series_of("sup_error", cfg.n_list, err)};

  if (cfg.bound) {
    const double c = cfg.bound_constant ? *cfg.bound_constant : default_constant(cfg.kernel);
    const BoundReport rep = bound_check(table, f, c, Domain::unit_box(cfg.kernel.dimension()));
    a.files.emplace_back("bound.csv", to_csv(bound_csv(rep)));
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) worst = std::min(worst, r.margin);
    verdict(a, "bound", rep.pass, "C = " + sci(c) + ", smallest margin " + sci(worst));
    std::vector<double> bound;
    for (const auto& r : rep.rows) bound.push_back(r.bound);
    series.push_back(series_of("bound", cfg.n_list, bound));
  }
  if (plot) add_plot(a, diag, "sup error, " + table.kernel_id + ", " + cfg.function, "sup error", series);
  return a;
}

Artifacts run_rate(const ExperimentConfig& cfg, const ErrorProbe& probe, bool plot, std::ostream& diag) {
  Artifacts a;
  const TestFunction f = test_function(cfg.function, cfg.kernel.dimension());
  const ConvergenceTable table = convergence_table(cfg.kernel, f, cfg.n_list, probe);
  a.files.emplace_back("converge.csv", to_csv(converge_csv(table)));
  check_monotone(a, table, cfg.checks.monotone_slack);
  const RateFit fit = fit_rate(table);
  a.files.emplace_back("rate.csv", to_csv(CsvTable{{"alpha", "intercept", "r_squared"},
                                                  {{format_real(fit.alpha), format_real(fit.intercept),
                                                    format_real(fit.r_squared)}}}));
  if (cfg.checks.alpha) {
    const double dev = std::abs(fit.alpha - *cfg.checks.alpha);
    verdict(a, "alpha", dev <= cfg.checks.alpha_tolerance,
            "fitted " + sci(fit.alpha) + ", expected " + sci(*cfg.checks.alpha) + " +- " + sci(cfg.checks.alpha_tolerance));
  }
  if (plot) {
    std::vector<double> err;
    for (const auto& r : table.rows) err.push_back(r.sup_error);
    add_plot(a, diag, "rate fit, " + table.kernel_id + ", " + cfg.function, "sup error",
             {series_of("sup_error", cfg.n_list, err)});
  }
  return a;
}

Artifacts run_voronovskaya(const ExperimentConfig& cfg, const ErrorProbe& probe, bool plot, std::ostream& diag) {
  Artifacts a;
  const TestFunction f = test_function(cfg.function, cfg.kernel.dimension());
  const VoronovskayaReport rep = voronovskaya(cfg.kernel, f, cfg.n_list, cfg.power, probe);
  a.files.emplace_back("voronovskaya.csv", to_csv(voronovskaya_csv(rep)));
  if (cfg.checks.strictly_decreasing) {
    bool ok = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) ok = ok && rep.rows[i].residual < rep.rows[i - 1].residual;
    verdict(a, "decreasing", ok, ok ? "residuals strictly decrease" : "residuals do not strictly decrease");
  }
  if (cfg.checks.max_relative_residual) {
    const double last = rep.rows.back().residual;
    const double cap = *cfg.checks.max_relative_residual * rep.limit_sup;
    verdict(a, "relative_residual", last <= cap,
            "r(" + std::to_string(rep.rows.back().n) + ") = " + sci(last) + ", cap " + sci(cap));
  }
  if (plot) {
    std::vector<double> res;
    for (const auto& r : rep.rows) res.push_back(r.residual);
    add_plot(a, diag, "Voronovskaya residual, p = " + std::to_string(cfg.power), "residual",
             {series_of("residual", cfg.n_list, res)});
  }
  return a;
}

Artifacts run_korovkin(const ExperimentConfig& cfg, const ErrorProbe& probe, bool plot, std::ostream& diag) {
  Artifacts a;
  const KorovkinReport rep = korovkin(cfg.kernel, cfg.n_list, probe);
  a.files.emplace_back("korovkin.csv", to_csv(korovkin_csv(rep)));
  const double tol = cfg.checks.tolerance;
  double e0 = 0.0, ei = 0.0;
  for (const auto& r : rep.rows) {
    if (r.monomial == "e0") e0 = std::max(e0, r.sup_error);
    else if (r.monomial.size() == 2) ei = std::max(ei, r.sup_error);
  }
  verdict(a, "e0", e0 <= tol, "max error " + sci(e0));
  if (cfg.kernel.drift_class() == DriftClass::Zero) verdict(a, "e_i", ei <= tol, "max error " + sci(ei));
  if (plot) {
    std::vector<double> worst;
    for (int n : cfg.n_list) worst.push_back(rep.max_error(n));
    add_plot(a, diag, "Korovkin test monomials, " + cfg.kernel.id(), "max sup error",
             {series_of("max_error", cfg.n_list, worst)});
  }
  return a;
}

Artifacts run_compose(const ExperimentConfig& cfg, unsigned threads) {
  Artifacts a;
  const int d = cfg.kernel.dimension();
  const TestFunction f = test_function(cfg.function, d);
  const GridFunction g0 = sample_to_grid(f.value, Domain::unit_box(d), cfg.resolution);
  const double sup0 = sup_norm(g0);
  CsvTable t{{"n", "gamma", "t", "m", "amplitude", "sup_norm"}, {}};
  bool contraction = true;
  for (int n : cfg.n_list) {
    const CompositionSchedule s = schedule(n, cfg.t, cfg.gamma);
    const GridFunction g = compose(OperatorConfig{cfg.kernel, n, cfg.quadrature, threads}, g0, s.depth);
    const double sup = sup_norm(g);
    contraction = contraction && sup <= sup0 + 1e-12;
    t.rows.push_back({std::to_string(n), std::to_string(cfg.gamma), format_real(cfg.t), std::to_string(s.depth),
                      format_real(first_mode_amplitude(g)), format_real(sup)});
  }
  a.files.emplace_back("compose.csv", to_csv(t));
  verdict(a, "contraction", contraction, "sup norm of every composition <= sup norm of the input");
  return a;
}

Artifacts run_pde_compare(const ExperimentConfig& cfg, unsigned threads, bool plot, std::ostream& diag) {
  Artifacts a;
  const TestFunction f = test_function(cfg.function, cfg.kernel.dimension());
  ComparisonConfig cc;
  cc.quadrature = cfg.quadrature;
  cc.work_resolution = cfg.work_resolution;
  cc.threads = threads;
  std::vector<ComparisonReport> reps;
  for (int n : cfg.n_list) reps.push_back(compare(cfg.kernel, n, cfg.t, cfg.gamma, f, cfg.resolution, cc));
  a.files.emplace_back("pde_compare.csv", to_csv(compare_csv(reps)));
  diag << "pde-compare: " << reps.front().scaling_note << "\n";

  const Checks& ck = cfg.checks;
  if (ck.strictly_decreasing && reps.size() > 1) {
    bool ok = true;
    for (std::size_t i = 1; i < reps.size(); ++i) ok = ok && reps[i].gap < reps[i - 1].gap;
    verdict(a, "gap_decreasing", ok, ok ? "gap strictly decreases in n" : "gap does not strictly decrease");
  }
  if (ck.max_gap) {
    double worst = 0.0;
    for (const auto& r : reps) worst = std::max(worst, r.gap);
    verdict(a, "max_gap", worst <= *ck.max_gap, "largest gap " + sci(worst) + ", cap " + sci(*ck.max_gap));
  }
  if (ck.expected_amplitude) {
    double worst = 0.0;
    for (const auto& r : reps)
      worst = std::max({worst, std::abs(r.amp_compose / *ck.expected_amplitude - 1.0),
                        std::abs(r.amp_pde / *ck.expected_amplitude - 1.0)});
    verdict(a, "amplitude", worst <= ck.amplitude_tolerance,
            "largest relative deviation " + sci(worst) + " from " + sci(*ck.expected_amplitude));
  }
  if (plot) {
    std::vector<double> gap;
    for (const auto& r : reps) gap.push_back(r.gap);
    add_plot(a, diag, "composition vs PDE, " + reps.front().kernel_id, "sup gap", {series_of("gap", cfg.n_list, gap)});
  }
  return a;
}

Artifacts execute(const ExperimentConfig& cfg, unsigned threads, bool plot, std::ostream& diag) {
  const ErrorProbe probe{cfg.resolution, cfg.quadrature, threads};
  switch (cfg.kind) {
    case ExperimentKind::Moments: return run_moments(cfg);
    case ExperimentKind::Admissible: return run_admissible(cfg);
    case ExperimentKind::Converge: return run_converge(cfg, probe, plot, diag);
    case ExperimentKind::Voronovskaya: return run_voronovskaya(cfg, probe, plot, diag);
    case ExperimentKind::Korovkin: return run_korovkin(cfg, probe, plot, diag);
    case ExperimentKind::Rate: return run_rate(cfg, probe, plot, diag);
    case ExperimentKind::Compose: return run_compose(cfg, threads);
    case ExperimentKind::PdeCompare: return run_pde_compare(cfg, threads, plot, diag);
  }
  throw std::logic_error("unhandled experiment kind");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

RunResult run(const RunOptions& options, std::ostream& diag) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();

  std::string text;
  ExperimentConfig cfg;
  try {
    std::ifstream in(options.config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + options.config_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    cfg = parse_config(text);
  } catch (const ConfigError& e) {
    diag << "error: " << e.what() << "\n";
    return result;
  }
  if (options.threads < 1) {
    diag << "error: thread count must be >= 1\n";
    return result;
  }

  if (options.out_dir) result.out_dir = *options.out_dir;
  else if (const char* env = std::getenv(kOutDirEnv); env && *env) result.out_dir = env;
  else if (!cfg.output.empty()) result.out_dir = cfg.output;
  else result.out_dir = "kkno_out";

  Artifacts art;
  try {
    art = execute(cfg, options.threads, options.plot, diag);
  } catch (const std::exception& e) {
    diag << "error: " << to_string(cfg.kind) << ": " << e.what() << "\n";
    return result;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool all_pass = true;
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& v : art.verdicts) {
    all_pass = all_pass && v.pass;
    verdicts.push_back({{"check", v.check}, {"verdict", v.pass ? "pass" : "fail"}, {"detail", v.detail}});
  }
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [name, content] : art.files) files.push_back(name);
  nlohmann::ordered_json manifest = {{"experiment", to_string(cfg.kind)},
                                     {"kernel", cfg.kernel.id()},
                                     {"config_sha256", sha256_hex(text)},
                                     {"tool_version", std::string(kToolVersion)},
                                     {"duration_seconds", seconds},
                                     {"threads", options.threads},
                                     {"verdicts", verdicts},
                                     {"files", files}};

  std::vector<fs::path> written;
  try {
    fs::create_directories(result.out_dir);
    // A stale manifest would claim a completed run while files are replaced.
    fs::remove(result.out_dir / "manifest.json");
    for (const auto& [name, content] : art.files) {
      written.push_back(result.out_dir / name);
      write_file(written.back(), content);
    }
    written.push_back(result.out_dir / "manifest.json");
    write_file(written.back(), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    return result;
  }

  for (const auto& [name, content] : art.files) result.files.push_back(name);
  result.files.push_back("manifest.json");
  result.verdicts = std::move(art.verdicts);
  for (const auto& v : result.verdicts)
    diag << (v.pass ? "pass  " : "FAIL  ") << v.check << ": " << v.detail << "\n";
  result.exit_code = all_pass ? 0 : 1;
  return result;
}

}  // namespace kkno
