#pragma once

// Property tests for the inequality toolkit: the elementary inequalities,
// and the weighted Sobolev, trace and parabolic Sobolev inequalities on a
// synthetic corpus of functions with analytic gradients.

#include <cstdint>
#include <string>
#include <vector>

#include "rotforch/exponents.hpp"
#include "rotforch/field_expr.hpp"

namespace rotforch {

struct ElementaryReport {
  std::string name;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min of (rhs - lhs)/scale
};

// Samples each of the five elementary inequalities `count` times.
std::vector<ElementaryReport> fuzz_elementary(std::size_t count, std::uint64_t seed,
                                              double slack = 1e-12);

// One corpus function u(x, y) on the unit square with weights. The
// parabolic lemma uses u(x, y) m(t) with m(t) = 1 + tamp sin(2 pi t + tphase).
struct CorpusMember {
  std::string family;
  std::string u_text;
  std::string phi_text;
  std::string W_text;      // W_* (positive)
  std::string omega_text;  // omega (nonnegative)
  double tamp = 0.0;
  double tphase = 0.0;
};

struct FunctionCorpus {
  std::uint64_t seed = 0;
  std::vector<CorpusMember> members;
  // FNV-1a over the member texts.
  std::string hash() const;
};

FunctionCorpus generate_corpus(std::size_t size, std::uint64_t seed);

struct HarnessParams {
  double p = 1.5;
  double s = 2.0;
  double beta = 2.0;
  double r1 = 0.8;
  double r = 0.5;
  double alpha = 16.0;
  int quad_n = 64;       // cells per side
  int time_nodes = 16;   // midpoint nodes on (0, T)
  double T = 1.0;
  std::vector<double> eps{0.1, 1.0, 10.0};
  double safety = 1.1;
};

struct EmpiricalConstants {
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double c6 = 0.0;
  double c7 = 0.0;  // c-hat_{r1 p}
  double safety = 1.1;
  std::string provenance = "estimated";
  std::string corpus_hash;
  std::size_t corpus_size = 0;
  std::uint64_t corpus_seed = 0;
};

// Throws InvalidInput for fewer than 50 members.
EmpiricalConstants estimate_constants(const FunctionCorpus& corpus, const HarnessParams& hp);

struct LemmaReport {
  std::string lemma;
  std::size_t checked = 0;     // (member, eps) pairs
  std::size_t violations = 0;
  double min_log_margin = 0.0;  // min of log RHS - log LHS
  std::size_t skipped = 0;
  std::string skip_reason;
  std::size_t eps_sanity_failures = 0;
};

std::vector<LemmaReport> verify_composites(const FunctionCorpus& corpus,
                                           const EmpiricalConstants& c, const HarnessParams& hp);

}  // namespace rotforch
