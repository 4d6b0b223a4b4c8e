#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "ablcli/cli.hpp"
#include "twotime/ensemble.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pre- and post-selected measurement probabilities (ABL, Kastner, Monte Carlo)",
               "abl-engine"};
  app.set_version_flag("--version", ABL_ENGINE_VERSION);

  ablcli::RunConfig cfg;
  std::string command;
  std::string format = "json";
  std::string out_path;

  app.add_option("command", command,
                 "abl | kastner | decomposition | inequality | product-rule | mc | scenario")
      ->required();
  app.add_option("scenario", cfg.scenario,
                 "scenario name: three-box | three-hole | spin-half | product-rule");
  app.add_option("--pre", cfg.pre, "pre-selected state (JSON)");
  app.add_option("--post", cfg.post, "post-selected state (JSON)");
  app.add_option("--observable", cfg.observable, "intervening observable (JSON)");
  app.add_option("--post-observable", cfg.post_observable,
                 "non-degenerate post observable for decomposition (JSON)");
  app.add_option("--x", cfg.x, "first observable for product-rule (JSON)");
  app.add_option("--x-value", cfg.x_value, "designated outcome label of --x");
  app.add_option("--y", cfg.y, "second observable for product-rule (JSON)");
  app.add_option("--y-value", cfg.y_value, "designated outcome label of --y");
  app.add_option("--variant", cfg.variant,
                 "scenario variant (three-hole: beeper set A | B | AB | none)");
  app.add_option("--a", cfg.dir_a, "spin-half pre direction x,y,z");
  app.add_option("--b", cfg.dir_b, "spin-half post direction x,y,z");
  app.add_option("--c", cfg.dir_c, "spin-half measured direction x,y,z");
  app.add_flag("--mc", cfg.mc, "add a Monte Carlo estimate");
  app.add_option("--trials", cfg.trials, "Monte Carlo trials")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--format", format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", out_path, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << R"({"error": {"code": "ValidationError", "message": ")" << e.what() << "\"}}\n";
    return ablcli::kExitValidation;
  }

  const auto cmd = ablcli::parse_command(command);
  if (!cmd) {
    std::cerr << R"({"error": {"code": "ValidationError", "message": "unknown command ')"
              << command << "'\"}}\n";
    return ablcli::kExitValidation;
  }
  cfg.command = *cmd;
  cfg.format = format == "csv" ? ablcli::Format::Csv : ablcli::Format::Json;
  cfg.threads = twotime::threads_from_env();
  if (cfg.command != ablcli::Command::Scenario && !cfg.scenario.empty()) {
    std::cerr << R"({"error": {"code": "ValidationError", "message": "unexpected argument ')"
              << cfg.scenario << "'\"}}\n";
    return ablcli::kExitValidation;
  }

  if (out_path.empty()) return ablcli::run(cfg, std::cout, std::cerr);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << R"({"error": {"code": "ValidationError", "message": "cannot open --out path"}})"
              << '\n';
    return ablcli::kExitValidation;
  }
  return ablcli::run(cfg, out, std::cerr);
}
