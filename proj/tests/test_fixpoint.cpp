#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "quantimetric/fixpoint.hpp"
#include "quantimetric/systems.hpp"

using namespace quantimetric;

namespace {

Carrier plain(std::uint64_t n) { return Carrier{n, {}}; }

struct DetMachine {
  std::vector<bool> accept;
  std::vector<std::vector<Index>> succ;  // [state][letter]

  MachineCoalgebra coalgebra() const {
    MachineCoalgebra c;
    c.carrier = plain(accept.size());
    c.alphabet_size = std::uint32_t(succ.empty() ? 0 : succ[0].size());
    c.step = [*this](Index x) {
      MachineValue v;
      v.accept = accept[x];
      v.succ = succ[x];
      return v;
    };
    return c;
  }
};

DetMachine random_machine(std::mt19937& rng, int max_states, int max_letters) {
  std::uniform_int_distribution<int> st(1, max_states);
  std::uniform_int_distribution<int> le(1, max_letters);
  std::uniform_int_distribution<int> coin(0, 1);
  int n = st(rng), k = le(rng);
  DetMachine m;
  m.accept.resize(n);
  m.succ.assign(n, std::vector<Index>(k));
  std::uniform_int_distribution<int> tgt(0, n - 1);
  for (int x = 0; x < n; ++x) {
    m.accept[x] = coin(rng) == 1;
    for (int a = 0; a < k; ++a) m.succ[x][a] = Index(tgt(rng));
  }
  return m;
}

VRel random_rel(const Quantale& q, std::uint64_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  VRel r(plain(n), q.bottom());
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      r.set_raw(x, y, q.id() == QuantaleId::Bool2 ? (u01(rng) < 0.5 ? 0.0 : 1.0) : u01(rng));
  return r;
}

} // namespace

TEST_CASE("identity map echoes the relation") {
  Quantale q{QuantaleId::UnitIntervalRev};
  MonotoneMap id = identity_map(q.id());
  VRel d(plain(3), q.make(1.0));
  d.set_raw(0, 2, 0.3);
  CHECK(id.query(d, 0, 2) == doctest::Approx(0.3));
  CHECK(id.query(d, 1, 1) == doctest::Approx(1.0));
  REQUIRE(id.at);
  CHECK(id.at(d.lookup(), 0, 2) == doctest::Approx(0.3));
}

TEST_CASE("one-step map follows the literal formula on random machines") {
  std::mt19937 rng(2024);
  Quantale u{QuantaleId::UnitIntervalRev};
  double c = 0.5;
  for (int round = 0; round < 30; ++round) {
    DetMachine m = random_machine(rng, 6, 3);
    MachineCoalgebra coalg = m.coalgebra();
    MonotoneMap b = build_b(u, machine_discount(coalg.alphabet_size, c), coalg);
    VRel d = random_rel(u, m.accept.size(), rng);
    for (Index x = 0; x < m.accept.size(); ++x)
      for (Index y = 0; y < m.accept.size(); ++y) {
        double expected;
        if (m.accept[x] != m.accept[y]) {
          expected = 1.0;
        } else {
          double worst = 0.0;
          for (std::size_t a = 0; a < m.succ[x].size(); ++a)
            worst = std::max(worst, d.at_raw(m.succ[x][a], m.succ[y][a]));
          expected = c * worst;
        }
        CHECK(b.query(d, x, y) == doctest::Approx(expected).epsilon(1e-9));
      }
  }
}

TEST_CASE("one-step map on bool2 is bisimulation progression") {
  std::mt19937 rng(77);
  Quantale b2{QuantaleId::Bool2};
  for (int round = 0; round < 30; ++round) {
    DetMachine m = random_machine(rng, 5, 2);
    MachineCoalgebra coalg = m.coalgebra();
    MonotoneMap b = build_b(b2, machine_canonical(coalg.alphabet_size), coalg);
    VRel d = random_rel(b2, m.accept.size(), rng);
    for (Index x = 0; x < m.accept.size(); ++x)
      for (Index y = 0; y < m.accept.size(); ++y) {
        double expected = 1.0;
        if (m.accept[x] != m.accept[y]) {
          expected = 0.0;
        } else {
          for (std::size_t a = 0; a < m.succ[x].size(); ++a)
            expected = std::min(expected, d.at_raw(m.succ[x][a], m.succ[y][a]));
        }
        CHECK(b.query(d, x, y) == expected);
      }
  }
}

TEST_CASE("fixpoint values on a hand-solved chain") {
  // 0 -> 1 -> 2 (accepting, loops), 3 loops without accepting.
  DetMachine m;
  m.accept = {false, false, true, false};
  m.succ = {{1}, {2}, {2}, {3}};
  Quantale u{QuantaleId::UnitIntervalRev};
  MonotoneMap b = build_b(u, machine_discount(1, 0.5), m.coalgebra());
  GfpResult res = gfp(u, b, plain(4));
  REQUIRE(res.converged);
  CHECK(res.rel.at_raw(0, 3) == doctest::Approx(0.25));
  CHECK(res.rel.at_raw(1, 3) == doctest::Approx(0.5));
  CHECK(res.rel.at_raw(2, 3) == doctest::Approx(1.0));
  CHECK(res.rel.at_raw(0, 1) == doctest::Approx(0.5));
  CHECK(res.rel.at_raw(0, 2) == doctest::Approx(1.0));
  CHECK(res.rel.at_raw(3, 3) == doctest::Approx(0.0));
}

TEST_CASE("parallel and serial fixpoints agree") {
  std::mt19937 rng(99);
  for (QuantaleId id : {QuantaleId::Bool2, QuantaleId::UnitIntervalRev}) {
    Quantale q{id};
    for (int round = 0; round < 10; ++round) {
      DetMachine m = random_machine(rng, 6, 2);
      MachineCoalgebra coalg = m.coalgebra();
      EvaluationMap ev = id == QuantaleId::Bool2 ? machine_canonical(coalg.alphabet_size)
                                                 : machine_discount(coalg.alphabet_size, 0.5);
      MonotoneMap b = build_b(q, ev, coalg);
      std::vector<Index> states;
      for (Index s = 0; s < m.accept.size(); ++s) states.push_back(s);
      auto pairs = all_pairs(states);
      GfpResult par = gfp(q, b, plain(m.accept.size()), pairs);
      GfpResult ser = gfp_serial(q, b, plain(m.accept.size()), pairs);
      REQUIRE(par.converged);
      REQUIRE(ser.converged);
      CHECK(par.iterations == ser.iterations);
      CHECK(par.rel.eq(ser.rel, q));
    }
  }
}

TEST_CASE("fixpoint on the determinized twin chains") {
  Nfa nfa = gen_twin_chains(3);
  MachineCoalgebra coalg = determinize(nfa);
  Quantale u{QuantaleId::UnitIntervalRev};
  MonotoneMap b = build_b(u, machine_discount(coalg.alphabet_size, 0.5), coalg);
  Index left = *nfa.state_of_label("x0");
  Index right = *nfa.state_of_label("y0");
  auto pairs = reachable_pairs(nfa, Index{1} << left, Index{1} << right);
  GfpResult res = gfp(u, b, coalg.carrier, pairs);
  REQUIRE(res.converged);
  CHECK(res.pair_count == 15);
  CHECK(res.rel.at_raw(Index{1} << left, Index{1} << right) == doctest::Approx(0.125));
}

TEST_CASE("fixpoint bookkeeping on edge inputs") {
  Quantale u{QuantaleId::UnitIntervalRev};
  DetMachine m;
  m.accept = {false};
  m.succ = {{0}};
  MonotoneMap b = build_b(u, machine_discount(1, 0.5), m.coalgebra());
  std::vector<std::pair<Index, Index>> none;
  GfpResult res = gfp(u, b, plain(1), none);
  CHECK(res.converged);
  CHECK(res.pair_count == 0);

  GfpOptions tight;
  tight.max_iter = 1;
  Nfa nfa = gen_twin_chains(3);
  MachineCoalgebra coalg = determinize(nfa);
  MonotoneMap bb = build_b(u, machine_discount(coalg.alphabet_size, 0.5), coalg);
  auto pairs = reachable_pairs(nfa, Index{1} << 0, Index{1} << 4);
  GfpResult capped = gfp(u, bb, coalg.carrier, pairs, tight);
  CHECK(!capped.converged);
  CHECK(capped.iterations == 1);
}

TEST_CASE("apply on pairs only touches the pair list") {
  Quantale u{QuantaleId::UnitIntervalRev};
  MonotoneMap id = identity_map(u.id());
  VRel d(plain(3), u.make(1.0));
  d.set_raw(0, 1, 0.3);
  d.set_raw(1, 2, 0.6);
  std::vector<std::pair<Index, Index>> pairs = {{0, 1}};
  VRel out = apply_on_pairs(u, id, d, pairs, u.make(1.0));
  CHECK(out.at_raw(0, 1) == doctest::Approx(0.3));
  CHECK(out.at_raw(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("witness checking certifies a self-supporting relation") {
  // Two bisimilar accepting loop states; the zero-distance claim holds as is.
  DetMachine m;
  m.accept = {true, true};
  m.succ = {{0}, {1}};
  Quantale u{QuantaleId::UnitIntervalRev};
  MonotoneMap b = build_b(u, machine_discount(1, 0.5), m.coalgebra());
  Witness w;
  w.rel = VRel(plain(2), u.bottom());
  w.rel.set_raw(0, 1, 0.0);
  w.claim_left = 0;
  w.claim_right = 1;
  w.bound = u.make(0.0);
  CheckVerdict v = check_witness(u, w, b, identity_map(u.id()));
  CHECK(v.certified);
  CHECK(v.inequality_holds);
  CHECK(v.claim_met);
  CHECK(v.pairs_checked >= 1);
}

TEST_CASE("witness checking refutes without a closing technique") {
  Nfa nfa = gen_twin_chains(3);
  MachineCoalgebra coalg = determinize(nfa);
  Quantale u{QuantaleId::UnitIntervalRev};
  MonotoneMap b = build_b(u, machine_discount(coalg.alphabet_size, 0.5), coalg);
  Witness w = twin_chains_witness(3, 0.5);
  CheckVerdict v = check_witness(u, w, b, identity_map(u.id()));
  CHECK(!v.certified);
  CHECK(!v.inequality_holds);
  REQUIRE(v.counterexample.has_value());
  CHECK(v.counterexample->lhs == doctest::Approx(0.125));
  CHECK(v.counterexample->rhs == doctest::Approx(0.5));
  // The frontier names the successor pair that broke the inequality.
  bool found = false;
  for (auto& [a, bb, val] : v.counterexample->frontier)
    found = found || (a == 0b11 && bb == (Index{1} << 4));
  CHECK(found);
}

TEST_CASE("witness checking rejects an overreaching claim") {
  DetMachine m;
  m.accept = {true, true};
  m.succ = {{0}, {1}};
  Quantale u{QuantaleId::UnitIntervalRev};
  MonotoneMap b = build_b(u, machine_discount(1, 0.5), m.coalgebra());
  Witness w;
  w.rel = VRel(plain(2), u.bottom());
  w.rel.set_raw(0, 1, 0.4);
  w.claim_left = 0;
  w.claim_right = 1;
  w.bound = u.make(0.2);  // stronger than what the relation carries
  CheckVerdict v = check_witness(u, w, b, identity_map(u.id()));
  CHECK(v.inequality_holds);
  CHECK(!v.claim_met);
  CHECK(!v.certified);
}

TEST_CASE("compatibility probe accepts the identity") {
  std::mt19937 rng(5);
  Quantale u{QuantaleId::UnitIntervalRev};
  DetMachine m = random_machine(rng, 5, 2);
  MachineCoalgebra coalg = m.coalgebra();
  MonotoneMap b = build_b(u, machine_discount(coalg.alphabet_size, 0.5), coalg);
  std::vector<Index> states(m.accept.size());
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = Index(i);
  ProbeReport rep = compatibility_probe(u, b, identity_map(u.id()), coalg.carrier, states, 30);
  CHECK(rep.ok());
  CHECK(rep.samples == 30);
  CHECK(rep.checks > 0);
}

TEST_CASE("compatibility probe catches an unsound shrinking map") {
  Quantale u{QuantaleId::UnitIntervalRev};
  DetMachine m;
  m.accept = {true, false};
  m.succ = {{0}, {1}};
  MachineCoalgebra coalg = m.coalgebra();
  MonotoneMap b = build_b(u, machine_discount(1, 0.5), coalg);
  MonotoneMap halve;
  halve.name = "halve";
  halve.quantale = u.id();
  halve.query = [](const VRel& d, Index x, Index y) { return d.at_raw(x, y) / 2.0; };
  halve.at = [](const RelLookup& d, Index x, Index y) { return d(x, y) / 2.0; };
  std::vector<Index> states = {0, 1};
  ProbeReport rep = compatibility_probe(u, b, halve, coalg.carrier, states, 20);
  CHECK(!rep.ok());
  REQUIRE(!rep.counterexamples.empty());
  // The acceptance-separated pair pins b at bottom while the shrunk input
  // claims an impossible improvement.
  CHECK(rep.counterexamples.front().fb == doctest::Approx(0.5));
  CHECK(rep.counterexamples.front().bf == doctest::Approx(1.0));
}
