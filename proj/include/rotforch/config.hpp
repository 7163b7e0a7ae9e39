#pragma once

// Run configuration: a sectioned key = value text file.
//
//   [domain]  lx ly nx ny porosity segments
//   [law]     degrees coeffs
//   [eos]     kind varpi c gamma
//   [rotation] omega gravity gravity_angle gravity_rate
//   [boundary] psi1 psi2
//   [initial] u0
//   [solver]  policy dt safety probe_interval eps_reg t_end snapshot_dt
//             max_steps diag_alphas diag_every
//   [estimates] alpha r r1 kappa_tilde p sigma T eps eta omegas
//             calibration_amplitudes assertion_amplitudes fine_nx
//             sweep_omegas sweep_amplitudes sweep_eps sweep_nx
//   [mms]     exact grids t_end temporal_grid temporal_t_end
//   [verify]  samples laws elementary_samples exponent_tuples corpus_size
//             calibration
//   [output]  dir
//   [run]     seed
//
// Lists are comma separated; field expressions are taken verbatim, and a
// list of expressions is separated by ';'. Lines starting with '#' or ';'
// are comments. Unknown sections or keys are errors.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotforch/errors.hpp"

namespace rotforch {

struct RunConfig {
  // [domain]
  double lx = 1.0;
  double ly = 1.0;
  int nx = 32;
  int ny = 32;
  std::string porosity = "0.5";
  // "side:s0:s1:tag; ..." or empty for all gamma1
  std::string segments;

  // [law]
  std::vector<double> degrees;
  std::vector<std::string> coeffs;

  // [eos]
  std::string eos_kind = "slightly_compressible";
  double varpi = 1.0;
  double eos_c = 1.0;
  double eos_gamma = 1.4;

  // [rotation]
  double omega = 0.0;
  double gravity = 0.0;
  double gravity_angle = 1.5707963267948966;
  double gravity_rate = 0.0;

  // [boundary]
  std::string psi1 = "0";
  std::string psi2 = "0";

  // [initial]
  std::string u0;

  // [solver]
  std::string policy = "adaptive";
  double dt = 1e-3;
  double safety = 0.5;
  int probe_interval = 5;
  double eps_reg = -1.0;
  double t_end = 0.01;
  double snapshot_dt = 0.0;
  std::uint64_t max_steps = 10000000;
  std::vector<double> diag_alphas;
  int diag_every = 1;

  // [estimates]
  double alpha = 0.0;  // 0 selects beta_1 = kappa~ alpha_0 with the default alpha_0
  double r = 2.5;
  double r1 = 0.8;
  double kappa_tilde = 1.1;
  std::vector<double> p{1.05, 1.02, 1.005, 1.05, 1.02};
  double sigma = 0.5;
  double T = 0.02;
  double eps = 0.01;
  double eta = 0.0;
  std::vector<double> omegas{0.0, 1.0, 2.0};
  std::vector<double> calibration_amplitudes{1.0};
  std::vector<double> assertion_amplitudes{0.5, 0.75};
  int fine_nx = 64;
  std::vector<double> sweep_omegas{0.0, 0.05, 0.1};
  std::vector<double> sweep_amplitudes{0.5, 1.0};
  std::vector<double> sweep_eps{0.005, 0.01};
  int sweep_nx = 16;

  // [mms]
  std::string mms_exact;
  std::vector<int> mms_grids{16, 32, 64, 128};
  double mms_t_end = 0.002;
  int mms_temporal_grid = 16;
  double mms_temporal_t_end = 0.01;

  // [verify]
  std::uint64_t verify_samples = 100000;
  int verify_laws = 20;
  std::uint64_t elementary_samples = 1000000;
  int exponent_tuples = 1000;
  int corpus_size = 200;
  std::string calibration;  // path of the calibration artifact

  // [output]
  std::string out_dir = "out";

  // [run]
  std::uint64_t seed = 1;

  // Every key with its resolved value, in schema order.
  nlohmann::ordered_json to_json() const;
};

// Parses text. Throws ConfigError whose key() is "section.key" at fault.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// A config with every required key present, usable as a template.
std::string default_config_text();

}  // namespace rotforch
