#include <iostream>

#include "CLI11.hpp"
#include "kkno/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kantorovich kernel operator experiments"};
  app.set_version_flag("--version", std::string(kkno::kToolVersion));
  app.require_subcommand(1);

  kkno::RunOptions opts;
  std::string config;
  std::string out;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--out", out, "Output directory (overrides KKNO_OUT_DIR and the config)");
  run->add_option("--threads", opts.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  run->add_flag("--plot", opts.plot, "Also write plot.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  opts.config_path = config;
  if (!out.empty()) opts.out_dir = out;
  const kkno::RunResult result = kkno::run(opts, std::cerr);
  if (result.exit_code != 2) std::cout << result.out_dir.string() << "\n";
  return result.exit_code;
}
