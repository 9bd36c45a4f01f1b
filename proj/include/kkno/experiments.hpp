#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kkno/asymptotics.hpp"
#include "kkno/kernels.hpp"
#include "kkno/pde.hpp"

namespace kkno {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "KKNO_OUT_DIR";

/// Invalid or unreadable configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Moments, Admissible, Converge, Voronovskaya, Korovkin, Rate, Compose, PdeCompare };

std::string to_string(ExperimentKind kind);

/// Optional numeric checks. Unset fields fall back to per-experiment defaults.
struct Checks {
  double tolerance = 0.0;           // moments 1e-8, admissible 1e-8, korovkin 1e-10
  double monotone_slack = 1e-10;    // converge, rate
  std::optional<double> max_relative_residual;  // voronovskaya
  bool strictly_decreasing = true;  // voronovskaya residuals, pde-compare gaps
  std::optional<double> alpha;      // rate
  double alpha_tolerance = 0.1;
  std::optional<double> max_gap;    // pde-compare, at the first n
  std::optional<double> expected_amplitude;
  double amplitude_tolerance = 0.02;  // relative
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Converge;
  KernelSpec kernel = make_cell_uniform(1);
  std::string function;
  std::vector<int> n_list;
  std::vector<Point> points;  // moments, admissible
  double t = 0.0;
  int gamma = 2;
  int power = 2;
  int resolution = 64;
  int work_resolution = 0;
  QuadratureConfig quadrature;
  /// converge only: also check the quantitative bound. An empty constant
  /// selects default_constant.
  bool bound = false;
  std::optional<double> bound_constant;
  Checks checks;
  std::string output;
};

/// Parses and validates a JSON config. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text);

// ---- emit ----

/// 17 significant digits, independent of the locale.
std::string format_real(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const CsvTable& table);

CsvTable converge_csv(const ConvergenceTable& table);
CsvTable bound_csv(const BoundReport& report);
CsvTable voronovskaya_csv(const VoronovskayaReport& report);
CsvTable korovkin_csv(const KorovkinReport& report);
CsvTable compare_csv(const std::vector<ComparisonReport>& reports);
CsvTable moments_csv(const std::vector<MomentReport>& reports);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string svg;
  bool log_axes = true;
  std::string warning;  // set when falling back to linear axes
};

/// Static SVG line chart, log-log when every value is positive. Throws
/// std::invalid_argument for a series with fewer than two points.
Plot render_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                 const std::vector<PlotSeries>& series);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// ---- run ----

struct Verdict {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;  // overrides the environment and the config
  unsigned threads = 1;
  bool plot = false;
};

struct RunResult {
  int exit_code = 2;
  std::filesystem::path out_dir;
  std::vector<std::string> files;
  std::vector<Verdict> verdicts;
};

/// Exit code 0: every check passed. 1: a numeric check failed, artifacts
/// written. 2: config or IO error, nothing left behind.
RunResult run(const RunOptions& options, std::ostream& diagnostics);

}  // namespace kkno
