#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mmlab/cli/config.hpp"
#include "mmlab/cli/report.hpp"
#include "mmlab/cli/runner.hpp"
#include "mmlab/cli/spec_parser.hpp"

using namespace mmlab;
using namespace mmlab::cli;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidSpec, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature and tangent-cone audits on model metric measure spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir, expectations_path;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  auto* run_cmd = app.add_subcommand("run", "run the suites of a config file");
  run_cmd->add_option("--config", config_path, "YAML experiment config")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_option("--out", out_dir, "report directory (default: $MMLAB_OUT_DIR)");
  run_cmd->add_option("--jobs", jobs, "worker threads per audit");
  run_cmd->add_option("--expectations", expectations_path, "expected-verdict table (JSON)");

  std::string spec;
  auto* describe_cmd = app.add_subcommand("describe", "summarize a space spec");
  describe_cmd->add_option("spec", spec, "space spec, e.g. \"lp(2, p=1.5)\"")->required();

  std::string report_path, plot_dir = ".";
  auto* plot_cmd = app.add_subcommand("emit-plot-data", "write CSV profiles of a report");
  plot_cmd->add_option("report", report_path, "report or summary JSON")->required();
  plot_cmd->add_option("--out", plot_dir, "CSV directory");

  app.add_subcommand("list-suites", "list suites and their audits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*describe_cmd) {
      std::cout << describe_space(*parse_space(spec));
      return 0;
    }
    if (app.got_subcommand("list-suites")) {
      std::cout << list_suites();
      return 0;
    }
    if (*plot_cmd) {
      const auto j = Json::parse(read_file(report_path));
      for (const auto& path : emit_plot_data(j, plot_dir)) std::cout << path << "\n";
      return 0;
    }
    auto config = load_config_file(config_path);
    if (*seed_opt) config.seed = seed;
    if (jobs) config.jobs = jobs;
    if (!out_dir.empty())
      config.out_dir = out_dir;
    else if (config.out_dir.empty())
      if (const char* env = std::getenv("MMLAB_OUT_DIR")) config.out_dir = env;
    config.validate();
    const auto expectations = expectations_path.empty()
                                  ? Expectations::builtin()
                                  : Expectations::from_json(read_file(expectations_path));
    return run(config, expectations, std::cout).exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
