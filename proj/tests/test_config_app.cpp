#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rotforch/app.hpp"
#include "rotforch/config.hpp"
#include "rotforch/errors.hpp"

using namespace rotforch;
namespace fs = std::filesystem;

namespace {

std::string minimal() { return default_config_text(); }

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotforch_test_" + name);
  fs::remove_all(p);
  return p.string();
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_key(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

const char* kClosed =
    "[domain]\nnx = 8\nny = 8\nporosity = 0.5 + 0.1*x\n"
    "[law]\ndegrees = 0, 1\ncoeffs = 1 + 0.2*sin(pi*x)*cos(pi*y); 1\n"
    "[rotation]\nomega = 1\n"
    "[initial]\nu0 = 0.5 + 0.25*cos(pi*x)*cos(pi*y)\n"
    "[solver]\npolicy = fixed\ndt = 1e-4\nt_end = 0.005\ndiag_every = 10\n";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig c = parse_config(minimal());
  CHECK(c.nx == 32);
  CHECK(c.degrees == std::vector<double>{0.0, 1.0});
  CHECK(c.coeffs.size() == 2);
  CHECK(c.p.size() == 5);
}

TEST_CASE("missing required keys are named") {
  CHECK(config_error_key("[law]\ndegrees = 0, 1\ncoeffs = 1; 1\n") == "initial.u0");
  CHECK(config_error_key("[law]\ndegrees = 0, 1\n[initial]\nu0 = 1\n") == "law.coeffs");
}

TEST_CASE("unknown sections and keys are errors") {
  CHECK(config_error_key(minimal() + "[solver]\nbogus = 1\n") == "solver.bogus");
  CHECK(config_error_key(minimal() + "[nonsense]\nx = 1\n") == "nonsense");
}

TEST_CASE("malformed values name their key") {
  CHECK(config_error_key(minimal() + "[domain]\nnx = ten\n") == "domain.nx");
  CHECK(config_error_key(minimal() + "[domain]\nporosity = 0.5 +\n") == "domain.porosity");
  CHECK(config_error_key(minimal() + "[estimates]\np = 1.05, 1.02\n") == "estimates.p");
  CHECK(config_error_key("[law]\ndegrees = 0, 1\ncoeffs = 1\n[initial]\nu0 = 1\n") == "law.coeffs");
}

TEST_CASE("duplicate keys are rejected") {
  CHECK_THROWS_AS(parse_config(minimal() + "[domain]\nnx = 8\nnx = 16\n"), ConfigError);
}

TEST_CASE("expressions keep commas and spaces") {
  const RunConfig c = parse_config(minimal() + "[boundary]\npsi1 = min(x, 0.5) * 2\n");
  CHECK(c.psi1 == "min(x, 0.5) * 2");
}

TEST_CASE("resolved config is echoed in schema order") {
  const auto j = parse_config(minimal()).to_json();
  auto it = j.begin();
  CHECK(it.key() == "domain");
  CHECK(j["initial"]["u0"] == "0.5 + 0.25*cos(pi*x)*cos(pi*y)");
  CHECK(j["estimates"]["r"] == 2.5);
}

TEST_CASE("simulate writes a constant mass column for a closed system") {
  const std::string out = scratch("closed");
  const CommandResult r = run_simulate(parse_config(kClosed), out);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.report["schema"] == kReportSchema);
  CHECK(r.report["version"] == kVersion);
  CHECK(r.report.contains("config"));
  std::ifstream diag(fs::path(out) / "diag.csv");
  REQUIRE(diag.good());
  std::string header, line;
  std::getline(diag, header);
  CHECK(header.find("mass") != std::string::npos);
  double first = -1.0;
  std::size_t rows = 0;
  const std::size_t col = [&] {
    std::size_t k = 0;
    std::stringstream hs(header);
    std::string name;
    while (std::getline(hs, name, ',')) {
      if (name == "mass") return k;
      ++k;
    }
    return k;
  }();
  while (std::getline(diag, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t k = 0; k <= col; ++k) std::getline(ls, cell, ',');
    const double m = std::stod(cell);
    if (first < 0.0) first = m;
    CHECK(std::abs(m - first) <= 1e-12 * first);
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("reports are byte-identical across reruns and output dirs") {
  const RunConfig c = parse_config(kClosed);
  const std::string a = scratch("det_a"), b = scratch("det_b");
  run_simulate(c, a);
  run_simulate(c, b);
  CHECK(read(fs::path(a) / "report.json") == read(fs::path(b) / "report.json"));
  RunConfig e = parse_config(minimal() + "[verify]\nelementary_samples = 20000\n");
  const CommandResult r1 = run_verify(e, "elementary", "");
  const CommandResult r2 = run_verify(e, "elementary", "");
  CHECK(r1.report.dump() == r2.report.dump());
  e.seed = 2;
  CHECK(run_verify(e, "elementary", "").report.dump() != r1.report.dump());
}

TEST_CASE("solver failures exit 2") {
  RunConfig c = parse_config(kClosed);
  c.max_steps = 3;
  const CommandResult r = run_simulate(c, "");
  CHECK(r.exit_code == kExitSolver);
  CHECK(r.report["error"]["kind"] == "stiffness");
}

TEST_CASE("composites without a calibration artifact exit 1") {
  const std::string out = scratch("nocal");
  const CommandResult r = run_verify(parse_config(minimal()), "composites", out);
  CHECK(r.exit_code == kExitConfig);
  CHECK(r.report["error"]["key"] == "verify.calibration");
  CHECK(r.report["error"]["message"].get<std::string>().find("calibrate") != std::string::npos);
}

TEST_CASE("calibrate then composites") {
  const std::string out = scratch("cal");
  RunConfig c = parse_config(minimal() + "[verify]\ncorpus_size = 60\n");
  CHECK(run_verify(c, "calibrate", out).exit_code == kExitOk);
  CHECK(fs::exists(fs::path(out) / "calibration.json"));
  const CommandResult r = run_verify(c, "composites", out);
  CHECK(r.exit_code == kExitOk);
}

TEST_CASE("unknown suite is a config error") {
  CHECK(run_verify(parse_config(minimal()), "nope", "").exit_code == kExitConfig);
}

TEST_CASE("certify with alpha below alpha_* exits 3 naming the term") {
  RunConfig c = parse_config(minimal() + "[estimates]\nalpha = 90\n");
  const CommandResult r = run_certify(c, "");
  CHECK(r.exit_code == kExitPrecondition);
  CHECK(r.report["error"]["kind"] == "invalid_exponent");
  CHECK(r.report["error"]["inequality"] == "alpha > 2r~(1+2/r_*) + 4 lambda/r_*");
}

TEST_CASE("certify with T beyond the smallness window reports the largest T") {
  const std::string text =
      "[domain]\nnx = 16\nny = 16\nporosity = 0.5 + 0.1*x\n"
      "[law]\ndegrees = 0, 1\ncoeffs = 1 + 0.2*sin(pi*x)*cos(pi*y); 1\n"
      "[boundary]\npsi1 = -0.5*(1 + 0.5*sin(2*pi*x))\n"
      "[initial]\nu0 = 0.5 + 0.25*cos(pi*x)*cos(pi*y)\n"
      "[estimates]\nT = 0.05\neps = 0.01\nomegas = 0\ncalibration_amplitudes = 1.3\n"
      "assertion_amplitudes = 1\nfine_nx = 32\nsweep_omegas = 0\nsweep_amplitudes = 1\n"
      "sweep_eps = 0.01\nsweep_nx = 8\n";
  const CommandResult r = run_certify(parse_config(text), "");
  CHECK(r.exit_code == kExitPrecondition);
  REQUIRE(r.report["error"]["kind"] == "smallness");
  const double tmax = r.report["error"]["largest_admissible_T"].get<double>();
  CHECK(tmax > 0.0);
  CHECK(tmax < 0.05);
}

TEST_CASE("mms without an exact solution is a config error") {
  const CommandResult r = run_mms(parse_config(minimal()), "");
  CHECK(r.exit_code == kExitConfig);
  CHECK(r.report["error"]["key"] == "mms.exact");
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"default.ini", "closed.ini", "mms.ini"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(ROTFORCH_CONFIG_DIR) + "/" + name));
  }
}
