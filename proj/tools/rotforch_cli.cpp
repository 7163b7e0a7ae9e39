// rotforch command-line entry point.
//
//   rotforch simulate --config run.ini [--out DIR] [--seed N]
//   rotforch verify   --config run.ini --suite NAME [--out DIR] [--seed N]
//   rotforch certify  --config run.ini [--out DIR] [--seed N]
//   rotforch mms      --config run.ini [--out DIR]
//
// The output directory is --out, else $ROTFORCH_OUT_DIR, else [output] dir.

#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "rotforch/app.hpp"
#include "rotforch/errors.hpp"

int main(int argc, char** argv) {
  using namespace rotforch;
  CLI::App app{"Rotating Forchheimer flow: simulation and certification of a priori estimates"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string suite;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "run the solver and write trajectories");
  CLI::App* verify = app.add_subcommand("verify", "property-test a module");
  CLI::App* certify = app.add_subcommand("certify", "certify the a priori estimates");
  CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
  for (CLI::App* s : {simulate, verify, certify, mms}) add_common(s);
  verify->add_option("--suite", suite, "constitutive|elementary|exponents|calibrate|composites")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "rotforch: config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) cfg.seed = *seed;
  std::string out_dir = cfg.out_dir;
  if (const char* env = std::getenv("ROTFORCH_OUT_DIR"); env && *env) out_dir = env;
  if (!out.empty()) out_dir = out;

  CommandResult res;
  if (*simulate) res = run_simulate(cfg, out_dir);
  if (*verify) res = run_verify(cfg, suite, out_dir);
  if (*certify) res = run_certify(cfg, out_dir);
  if (*mms) res = run_mms(cfg, out_dir);

  const std::string status = res.report.value("status", "");
  std::cout << res.report.value("command", "") << ": " << status;
  if (res.report.contains("error")) std::cout << ": " << res.report["error"].value("message", "");
  std::cout << " (report in " << out_dir << "/report.json)\n";
  if (res.report.contains("checks")) {
    for (const auto& c : res.report["checks"]) {
      std::cout << "  [" << (c["pass"].get<bool>() ? "ok" : "FAIL") << "] " << c["name"].get<std::string>()
                << ": " << c["value"].dump() << ' ' << c["relation"].get<std::string>() << ' '
                << c["threshold"].dump() << (c["assertable"].get<bool>() ? "" : " (informational)")
                << '\n';
    }
  }
  return res.exit_code;
}
