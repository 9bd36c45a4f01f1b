#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kkno/experiments.hpp"

using namespace kkno;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("kkno_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(KKNO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const char* kConverge = R"({
  "experiment": "converge",
  "kernel": {"variant": "cell_uniform", "dimension": 1},
  "function": "sin2pi",
  "n": [8, 16, 32, 64]
})";

}  // namespace

TEST(Config, ParsesAndDefaults) {
  const auto cfg = parse_config(kConverge);
  EXPECT_EQ(cfg.kind, ExperimentKind::Converge);
  EXPECT_EQ(cfg.kernel.id(), "cell_uniform");
  EXPECT_EQ(cfg.n_list, (std::vector<int>{8, 16, 32, 64}));
  EXPECT_EQ(cfg.resolution, 64);
  EXPECT_FALSE(cfg.bound);

  const auto m = parse_config(R"({"experiment":"moments","kernel":{"variant":"gaussian","dimension":2,
      "precision":[[4,0],[0,1]]}})");
  EXPECT_EQ(m.points.size(), 5u);
  EXPECT_EQ(m.checks.tolerance, 1e-8);
  EXPECT_NEAR(m.kernel.diffusion()(0, 0), 0.25, 1e-15);

  const auto d = parse_config(R"({"experiment":"pde-compare","kernel":{"variant":"drifted",
      "base":{"variant":"cell_uniform","dimension":1},"drift":[0.5],"decay":1},
      "function":"sin2pi","n":[16,32],"t":0.25,"gamma":2,"checks":{"max_gap":0.03}})");
  EXPECT_EQ(d.kernel.drift_class(), DriftClass::InverseN);
  EXPECT_EQ(*d.checks.max_gap, 0.03);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  EXPECT_NE(message(R"({"experiment":"converge","kernel":{"variant":"foo","dimension":1},"function":"sin2pi","n":[1,2,3]})")
                .find("kernel.variant"),
            std::string::npos);
  EXPECT_NE(message(R"({"experiment":"converge","kernel":{"variant":"cell_uniform","dimension":1},"function":"sin2pi",
      "n":[1,2,3],"colour":1})").find("colour"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"converge","kernel":{"variant":"cell_uniform","dimension":1,"extra":1},
      "function":"sin2pi","n":[1,2,3]})").find("kernel.extra"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"converge","kernel":{"variant":"cell_uniform","dimension":1},"function":"sin2pi",
      "n":[4,2,8]})").find("'n'"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"korovkin","kernel":{"variant":"cell_uniform","dimension":1},"n":[4],
      "function":"sin2pi"})").find("function"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"pde-compare","kernel":{"variant":"cell_uniform","dimension":1},
      "function":"sin2pi","n":[8],"t":0.5,"gamma":1})").find("gamma"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"voronovskaya","kernel":{"variant":"cell_uniform","dimension":1},
      "function":"absdev","n":[8,16]})").find("Hessian"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"converge","kernel":{"variant":"gaussian","dimension":2,"precision":[[1,2],[2,1]]},
      "function":"sin2pi","n":[1,2,3]})").find("kernel.precision"), std::string::npos);
  EXPECT_NE(message("{not json").find("JSON"), std::string::npos);
  EXPECT_NE(message(R"({"experiment":"rate","kernel":{"variant":"cell_uniform","dimension":1},"function":"sin2pi",
      "n":[8,16,32],"checks":{"alpha_tolerance":0.1}})").find("checks.alpha_tolerance"), std::string::npos);
}

TEST(Emit, RealsAndCsv) {
  EXPECT_EQ(format_real(0.5), "0.5");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(1e-20), "9.9999999999999995e-21");
  EXPECT_EQ(format_real(-2.0), "-2");

  ConvergenceTable empty;
  EXPECT_EQ(to_csv(converge_csv(empty)), "n,sup_error\n");
  ConvergenceTable t;
  t.rows = {{8, 0.5}, {16, 0.25}};
  EXPECT_EQ(to_csv(converge_csv(t)), "n,sup_error\n8,0.5\n16,0.25\n");

  EXPECT_EQ(to_csv(bound_csv({})), "n,sup_error,bound,margin\n");
  EXPECT_EQ(to_csv(voronovskaya_csv({})), "n,residual\n");
  EXPECT_EQ(to_csv(korovkin_csv({})), "monomial,n,sup_error\n");
  EXPECT_EQ(to_csv(compare_csv({})), "n,gamma,t,m,gap,amp_compose,amp_pde\n");
  EXPECT_EQ(to_csv(moments_csv({})), "x,component,value\n");

  const auto m = moments(make_cell_uniform(1), Point{0.25}, 1);
  const std::string csv = to_csv(moments_csv({m}));
  EXPECT_NE(csv.find("0.25,mass,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("0.25,m2_1_1,"), std::string::npos);
}

TEST(Emit, Plot) {
  const PlotSeries err{"error", {4, 8, 16}, {1e-1, 2.5e-2, 6.25e-3}};
  const PlotSeries bnd{"bound", {4, 8, 16}, {0.3, 0.15, 0.075}};
  const Plot p = render_plot("t", "n", "err", {err, bnd});
  EXPECT_TRUE(p.log_axes);
  EXPECT_TRUE(p.warning.empty());
  EXPECT_EQ(p.svg.rfind("<svg", 0), 0u);
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = p.svg.find("<polyline", pos)) != std::string::npos; ++pos) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(p.svg.find(">bound</text>"), std::string::npos);

  const Plot lin = render_plot("t", "n", "err", {{"e", {1, 2}, {0.0, 1.0}}});
  EXPECT_FALSE(lin.log_axes);
  EXPECT_FALSE(lin.warning.empty());
  EXPECT_THROW(render_plot("t", "n", "err", {{"e", {1}, {1.0}}}), std::invalid_argument);
}

TEST(Emit, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Run, ConvergeWritesArtifacts) {
  const fs::path dir = scratch("converge");
  const fs::path cfg = write_config(dir, kConverge);
  std::ostringstream diag;
  const RunResult r = run({cfg, dir / "out", 1, true}, diag);
  ASSERT_EQ(r.exit_code, 0) << diag.str();
  const std::string csv = slurp(dir / "out" / "converge.csv");
  std::istringstream lines(csv);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 5);
  EXPECT_TRUE(fs::exists(dir / "out" / "plot.svg"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["config_sha256"], sha256_hex(kConverge));
  EXPECT_EQ(manifest["verdicts"][0]["verdict"], "pass");
  EXPECT_EQ(manifest["files"].back(), "plot.svg");
}

TEST(Run, BoundWithZeroConstantFails) {
  const fs::path dir = scratch("bound0");
  const fs::path cfg = write_config(dir, R"({"experiment":"converge","kernel":{"variant":"cell_uniform","dimension":1},
      "function":"absdev","n":[8,16,32],"bound":{"constant":0}})");
  std::ostringstream diag;
  const RunResult r = run({cfg, dir / "out", 1, false}, diag);
  EXPECT_EQ(r.exit_code, 1);
  const std::string csv = slurp(dir / "out" / "bound.csv");
  EXPECT_EQ(csv.rfind("n,sup_error,bound,margin\n", 0), 0u);
  EXPECT_NE(csv.find(",0,-"), std::string::npos) << csv;
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Run, SingleRowPlotIsAFailedCheck) {
  const fs::path dir = scratch("plot1");
  const fs::path cfg = write_config(dir, R"({"experiment":"korovkin","kernel":{"variant":"cell_uniform","dimension":1},
      "n":[10]})");
  std::ostringstream diag;
  EXPECT_EQ(run({cfg, dir / "out", 1, true}, diag).exit_code, 1);
  EXPECT_EQ(run({cfg, dir / "out", 1, false}, diag).exit_code, 0);
}

TEST(Run, ConfigErrorWritesNothing) {
  const fs::path dir = scratch("bad");
  const fs::path cfg = write_config(dir, R"({"experiment":"converge","kernel":{"variant":"foo","dimension":1},
      "function":"sin2pi","n":[8,16,32]})");
  std::ostringstream diag;
  const RunResult r = run({cfg, dir / "out", 1, false}, diag);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(diag.str().find("kernel.variant"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_EQ(run({dir / "missing.json", dir / "out", 1, false}, diag).exit_code, 2);
}

TEST(Run, EnvironmentOverride) {
  const fs::path dir = scratch("env");
  const fs::path cfg = write_config(dir, kConverge);
  ::setenv(kOutDirEnv, (dir / "from_env").c_str(), 1);
  std::ostringstream diag;
  const RunResult r = run({cfg, std::nullopt, 1, false}, diag);
  ::unsetenv(kOutDirEnv);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(fs::exists(dir / "from_env" / "converge.csv"));
}

TEST(Run, ManifestHashTracksContent) {
  const fs::path dir = scratch("hash");
  std::ostringstream diag;
  const fs::path a = write_config(dir, kConverge);
  run({a, dir / "a", 1, false}, diag);
  std::ofstream(dir / "config.json") << std::string(kConverge) + "\n";
  run({a, dir / "b", 1, false}, diag);
  const auto ha = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"))["config_sha256"];
  const auto hb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"))["config_sha256"];
  EXPECT_NE(ha, hb);
  EXPECT_EQ(slurp(dir / "a" / "converge.csv"), slurp(dir / "b" / "converge.csv"));
}

TEST(Run, ByteIdenticalAcrossThreads) {
  const fs::path dir = scratch("threads");
  const fs::path cfg = write_config(dir, R"({"experiment":"pde-compare","kernel":{"variant":"drifted",
      "base":{"variant":"gaussian","dimension":2,"precision":[[2,0.5],[0.5,1]]},"drift":[0.5,-0.25],"decay":1},
      "function":"sin2pi","n":[4,6],"t":0.25,"gamma":2,"resolution":12})");
  std::ostringstream diag;
  ASSERT_NE(run({cfg, dir / "t1", 1, false}, diag).exit_code, 2) << diag.str();
  ASSERT_NE(run({cfg, dir / "t4", 4, false}, diag).exit_code, 2) << diag.str();
  ASSERT_NE(run({cfg, dir / "t1b", 1, false}, diag).exit_code, 2) << diag.str();
  const std::string a = slurp(dir / "t1" / "pde_compare.csv");
  EXPECT_EQ(a, slurp(dir / "t4" / "pde_compare.csv"));
  EXPECT_EQ(a, slurp(dir / "t1b" / "pde_compare.csv"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const fs::path good = write_config(dir, kConverge);
  EXPECT_EQ(cli("run " + good.string() + " --out " + (dir / "ok").string() + " --threads 2 --plot"), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "plot.svg"));
  EXPECT_EQ(cli("run " + (dir / "nope.json").string()), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("run " + good.string() + " --threads 0"), 2);
}

TEST(Cli, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(KKNO_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(parse_config(slurp(entry.path()))) << entry.path();
  }
}
