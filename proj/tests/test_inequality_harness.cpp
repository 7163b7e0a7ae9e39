#include <cmath>

#include "doctest.h"
#include "rotforch/errors.hpp"
#include "rotforch/field_expr.hpp"
#include "rotforch/inequality_harness.hpp"

using namespace rotforch;

namespace {

HarnessParams quick() {
  HarnessParams hp;
  hp.quad_n = 32;
  hp.time_nodes = 8;
  return hp;
}

CorpusMember constant_member(const std::string& u) {
  CorpusMember m;
  m.family = "constant";
  m.u_text = u;
  m.phi_text = "1";
  m.W_text = "1";
  m.omega_text = "1";
  return m;
}

const EmpiricalConstants& calibrated() {
  static const EmpiricalConstants c = estimate_constants(generate_corpus(100, 11), quick());
  return c;
}

}  // namespace

TEST_CASE("elementary inequalities hold on fuzzed samples") {
  const auto reps = fuzz_elementary(100000, 3);
  REQUIRE(reps.size() == 5);
  for (const ElementaryReport& r : reps) {
    CAPTURE(r.name);
    CHECK(r.samples == 100000);
    CHECK(r.violations == 0);
    CHECK(r.worst_margin >= -1e-12);
  }
}

TEST_CASE("corpus is reproducible from its seed") {
  const FunctionCorpus a = generate_corpus(60, 5), b = generate_corpus(60, 5), c = generate_corpus(60, 6);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.members.size() == 60);
}

TEST_CASE("corpus expressions round-trip through the printer") {
  for (const CorpusMember& m : generate_corpus(100, 8).members) {
    for (const std::string& text : {m.u_text, m.phi_text, m.W_text, m.omega_text}) {
      const FieldExpr e = FieldExpr::parse(text);
      const std::string printed = e.to_string();
      CHECK(FieldExpr::parse(printed).to_string() == printed);
      const EvalContext c{0.31, 0.77, 0.0};
      CHECK(FieldExpr::parse(printed).eval(c) == e.eval(c));
    }
  }
}

TEST_CASE("small corpora are refused") {
  CHECK_THROWS_AS(estimate_constants(generate_corpus(49, 1), quick()), InvalidInput);
}

TEST_CASE("trace constant dominates the constant-function ratio") {
  const EmpiricalConstants& c = calibrated();
  CHECK(c.c5 >= 4.0);
  CHECK(c.c3 > 0.0);
  CHECK(c.c6 > 0.0);
  CHECK(c.c7 > 0.0);
  CHECK(c.safety == 1.1);
  CHECK(c.corpus_size == 100);
}

TEST_CASE("adding members never lowers the estimates") {
  const EmpiricalConstants small = estimate_constants(generate_corpus(60, 11), quick());
  const EmpiricalConstants& big = calibrated();
  CHECK(big.c3 >= small.c3);
  CHECK(big.c5 >= small.c5);
  CHECK(big.c6 >= small.c6);
  CHECK(big.c7 >= small.c7);
}

TEST_CASE("estimates are stable when the corpus doubles") {
  const EmpiricalConstants& half = calibrated();
  const EmpiricalConstants full = estimate_constants(generate_corpus(200, 11), quick());
  CHECK(full.c3 <= 1.1 * half.c3);
  CHECK(full.c6 <= 1.1 * half.c6);
  CHECK(full.c7 <= 1.1 * half.c7);
}

TEST_CASE("zero and constant functions satisfy the composite lemmas") {
  FunctionCorpus corpus;
  corpus.members = {constant_member("0"), constant_member("0.5"), constant_member("3")};
  HarnessParams hp = quick();
  hp.r = 0.0;
  for (const LemmaReport& r : verify_composites(corpus, calibrated(), hp)) {
    CAPTURE(r.lemma);
    CAPTURE(r.skip_reason);
    CHECK(r.violations == 0);
    if (r.lemma == "weighted_sobolev") CHECK(r.checked == 9);
  }
}

TEST_CASE("composite lemmas hold on a disjoint assertion corpus") {
  const auto reps = verify_composites(generate_corpus(60, 12), calibrated(), quick());
  REQUIRE(reps.size() == 3);
  for (const LemmaReport& r : reps) {
    CAPTURE(r.lemma);
    CHECK(r.checked > 0);
    CHECK(r.violations == 0);
    CHECK(r.eps_sanity_failures == 0);
    CHECK(r.min_log_margin >= 0.0);
  }
}
