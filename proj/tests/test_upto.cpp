#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>
#include <vector>

#include "quantimetric/errors.hpp"
#include "quantimetric/fixpoint.hpp"
#include "quantimetric/systems.hpp"
#include "quantimetric/upto.hpp"

using namespace quantimetric;

namespace {

Carrier plain(std::uint64_t n) { return Carrier{n, {}}; }

VRel sparse_random(const Quantale& q, const Carrier& c, std::mt19937& rng,
                   int entries) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, c.size - 1);
  VRel r(c, q.bottom());
  for (int i = 0; i < entries; ++i) {
    double v = q.id() == QuantaleId::Bool2 ? 1.0 : u01(rng);
    r.set_raw(pick(rng), pick(rng), v);
  }
  return r;
}

// Every family of subset states, keyed toward its union, for a 3-state base
// system: the union map is a complete algebra enumeration on 8 subsets.
std::vector<std::pair<FunctorValue, Index>> union_algebra_3() {
  std::vector<std::pair<FunctorValue, Index>> out;
  for (std::uint32_t family = 0; family < 256; ++family) {
    PowValue members;
    Index target = 0;
    for (Index s = 0; s < 8; ++s)
      if (family & (1u << s)) {
        members.elems.push_back(s);
        target |= s;
      }
    out.push_back({members, target});
  }
  return out;
}

} // namespace

TEST_CASE("reflexive closure adds the diagonal at unit") {
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel d(plain(3), u.bottom());
  d.set_raw(0, 1, 0.4);
  d.set_raw(1, 1, 0.2);
  VRel r = up_ref(u, d);
  CHECK(r.at_raw(0, 0) == doctest::Approx(0.0));
  CHECK(r.at_raw(1, 1) == doctest::Approx(0.0));
  CHECK(r.at_raw(2, 2) == doctest::Approx(0.0));
  CHECK(r.at_raw(0, 1) == doctest::Approx(0.4));
  CHECK(r.at_raw(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("symmetric closure joins with the transpose") {
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel d(plain(3), u.bottom());
  d.set_raw(0, 1, 0.4);
  d.set_raw(1, 0, 0.7);
  d.set_raw(1, 2, 0.5);
  VRel s = up_sym(u, d);
  CHECK(s.at_raw(0, 1) == doctest::Approx(0.4));
  CHECK(s.at_raw(1, 0) == doctest::Approx(0.4));
  CHECK(s.at_raw(2, 1) == doctest::Approx(0.5));
  CHECK(s.at_raw(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("transitive closure chains tensors") {
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel d(plain(3), u.make(1.0));
  d.set_raw(0, 1, 0.2);
  d.set_raw(1, 2, 0.3);
  VRel t = up_trn(u, d);
  CHECK(t.at_raw(0, 2) == doctest::Approx(0.5));
  CHECK(t.at_raw(0, 1) == doctest::Approx(0.2));
  CHECK(t.at_raw(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("transitive closure keeps the cheapest route") {
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel d(plain(4), u.bottom());
  d.set_raw(0, 1, 0.1);
  d.set_raw(1, 3, 0.1);
  d.set_raw(0, 2, 0.05);
  d.set_raw(2, 3, 0.3);
  VRel t = up_trn(u, d);
  // 0.1 + 0.1 beats 0.05 + 0.3.
  CHECK(t.at_raw(0, 3) == doctest::Approx(0.2));
}

TEST_CASE("transitive closure stays support-local on virtual carriers") {
  Quantale u{QuantaleId::UnitIntervalRev};
  Carrier big = subset_carrier(40);
  VRel d(big, u.bottom());
  Index a = Index{1} << 35, b = (Index{1} << 35) | 1, c = (Index{1} << 39) | 7;
  d.set_raw(a, b, 0.2);
  d.set_raw(b, c, 0.25);
  VRel t = up_trn(u, d);
  CHECK(t.at_raw(a, c) == doctest::Approx(0.45));

  // A non-bottom default would need the whole square; that must refuse.
  VRel dense(big, u.make(0.5));
  CHECK_THROWS_AS((void)up_trn(u, dense), UsageError);
}

TEST_CASE("metric closure equals composing the three closures") {
  std::mt19937 rng(8);
  for (QuantaleId id : {QuantaleId::Bool2, QuantaleId::UnitIntervalRev}) {
    Quantale q{id};
    for (int round = 0; round < 20; ++round) {
      VRel d = sparse_random(q, plain(5), rng, 7);
      VRel direct = up_mtr(q, d);
      Technique composed = combine(
          q, {tech_ref(q), tech_sym(q), tech_trn(q)}, CombineMode::Compose);
      REQUIRE(composed.map.sparse_apply);
      VRel via_techniques = composed.map.sparse_apply(d);
      // The composed route adds the diagonal only at support-touched states,
      // so it matches the full closure on touched pairs and stays below it
      // (in the quantale order) everywhere else.
      std::set<Index> touched;
      for (const auto& [xy, v] : d.entries()) {
        touched.insert(xy.first);
        touched.insert(xy.second);
      }
      for (Index x = 0; x < 5; ++x)
        for (Index y = 0; y < 5; ++y) {
          CHECK(q.leq_raw(via_techniques.at_raw(x, y), direct.at_raw(x, y)));
          if (!touched.count(x) || !touched.count(y)) continue;
          CHECK(direct.at_raw(x, y) ==
                doctest::Approx(via_techniques.at_raw(x, y)).epsilon(1e-9));
          CHECK(composed.map.query(d, x, y) ==
                doctest::Approx(direct.at_raw(x, y)).epsilon(1e-9));
        }
      CHECK(is_reflexive(q, direct));
      CHECK(is_symmetric(q, direct));
      CHECK(is_transitive(q, direct));
    }
  }
}

TEST_CASE("behavioural-equivalence closure joins over fibres") {
  Quantale u{QuantaleId::UnitIntervalRev};
  Partition part;
  part.elements = {0, 1, 2};
  part.class_of = {0, 0, 1};
  part.class_count = 2;
  VRel d(plain(4), u.bottom());
  d.set_raw(0, 2, 0.4);
  d.set_raw(1, 2, 0.1);
  VRel b = up_bhv(u, d, part);
  // 1 sits in 0's class, so (0, 2) picks up the cheaper (1, 2) value.
  CHECK(b.at_raw(0, 2) == doctest::Approx(0.1));
  CHECK(b.at_raw(1, 2) == doctest::Approx(0.1));
  // 3 is outside the partition and stays a singleton.
  CHECK(b.at_raw(3, 2) == doctest::Approx(1.0));
}

TEST_CASE("union-congruence query on the twin chain certificate") {
  Quantale u{QuantaleId::UnitIntervalRev};
  Witness w = twin_chains_witness(3, 0.5);
  // {x0, x1} and {y0} are covered by ({x0},{y0}) at 0.125 and ({x1},{y0})
  // at 0.25; the worse member sets the value.
  Index x01 = 0b11, y0 = Index{1} << 4;
  CHECK(up_ctx_union(u, w.rel, x01, y0).v == doctest::Approx(0.25));
  CHECK(up_ctx_union(u, w.rel, 1, y0).v == doctest::Approx(0.125));
  // Empty against empty is derivable from nothing.
  CHECK(up_ctx_union(u, w.rel, 0, 0).v == doctest::Approx(0.0));
  // Equal subsets fold through the shared-bits rule.
  CHECK(up_ctx_union(u, w.rel, x01, x01).v == doctest::Approx(0.0));
  // Nothing covers {x3}: the chain ends are not in the certificate.
  CHECK(up_ctx_union(u, w.rel, Index{1} << 3, y0).v == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)up_ctx_union(u, w.rel, Index{1} << 60, y0), UsageError);
}

TEST_CASE("union-congruence query matches the enumerated algebra closure") {
  std::mt19937 rng(21);
  auto algebra = union_algebra_3();
  for (QuantaleId id : {QuantaleId::Bool2, QuantaleId::UnitIntervalRev}) {
    Quantale q{id};
    for (int round = 0; round < 6; ++round) {
      VRel d = sparse_random(q, subset_carrier(3), rng, 9);
      // The enumerated closure sees singleton identity pairs through the
      // reflexive closure; the threshold query folds them in itself.
      VRel closed = up_ctx(q, pow_canonical(), algebra, up_ref(q, d));
      for (Index q1 = 0; q1 < 8; ++q1)
        for (Index q2 = 0; q2 < 8; ++q2)
          CHECK(up_ctx_union(q, d, q1, q2).v ==
                doctest::Approx(closed.at_raw(q1, q2)).epsilon(1e-9));
    }
  }
}

TEST_CASE("enumerated algebra closure refuses oversized enumerations") {
  Quantale u{QuantaleId::UnitIntervalRev};
  auto algebra = union_algebra_3();
  VRel d(subset_carrier(3), u.bottom());
  CHECK_THROWS_AS((void)up_ctx(u, pow_canonical(), algebra, d, 100), UsageError);
}

TEST_CASE("convexity closure decomposes a two-component mixture") {
  Quantale u{QuantaleId::UnitIntervalRev};
  // Carrier: four point distributions and the two half-half mixtures.
  std::vector<DistValue> dists = {
      dirac(0), dirac(1), dirac(2), dirac(3),
      make_dist({{0, 0.5}, {1, 0.5}}), make_dist({{2, 0.5}, {3, 0.5}})};
  VRel d(plain(6), u.bottom());
  d.set_raw(0, 2, 0.2);  // component pair one
  d.set_raw(1, 3, 0.2);  // component pair two
  CvxValue res = up_cvx(u, d, dists, 4, 5);
  CHECK(!res.lower_confidence);
  CHECK(res.value.v == doctest::Approx(0.2));
}

TEST_CASE("convexity closure prefers a direct support entry when cheaper") {
  Quantale u{QuantaleId::UnitIntervalRev};
  std::vector<DistValue> dists = {
      dirac(0), dirac(1), dirac(2), dirac(3),
      make_dist({{0, 0.5}, {1, 0.5}}), make_dist({{2, 0.5}, {3, 0.5}})};
  VRel d(plain(6), u.bottom());
  d.set_raw(0, 2, 0.2);
  d.set_raw(1, 3, 0.2);
  d.set_raw(4, 5, 0.15);
  CHECK(up_cvx(u, d, dists, 4, 5).value.v == doctest::Approx(0.15));
}

TEST_CASE("convexity closure flags truncated decompositions") {
  Quantale u{QuantaleId::UnitIntervalRev};
  std::vector<DistValue> dists = {
      dirac(0), dirac(1), dirac(2), dirac(3),
      make_dist({{0, 0.5}, {1, 0.5}}), make_dist({{2, 0.5}, {3, 0.5}})};
  VRel d(plain(6), u.bottom());
  d.set_raw(0, 2, 0.2);
  d.set_raw(1, 3, 0.2);
  d.set_raw(0, 3, 0.9);
  d.set_raw(1, 2, 0.9);
  CvxValue res = up_cvx(u, d, dists, 4, 5, 1);
  CHECK(res.lower_confidence);
  // Whatever survives the cut is still an upper bound on the distance.
  CHECK(res.value.v >= 0.2 - 1e-12);
  CHECK_THROWS_AS((void)up_cvx(Quantale{QuantaleId::Bool2}, d, dists, 4, 5), UsageError);
}

TEST_CASE("technique wrappers answer like the closures") {
  std::mt19937 rng(13);
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel d = sparse_random(u, plain(4), rng, 6);
  CHECK(tech_ref(u).map.query(d, 2, 2) == doctest::Approx(up_ref(u, d).at_raw(2, 2)));
  CHECK(tech_sym(u).map.query(d, 1, 0) == doctest::Approx(up_sym(u, d).at_raw(1, 0)));
  CHECK(tech_trn(u).map.query(d, 0, 3) == doctest::Approx(up_trn(u, d).at_raw(0, 3)));
  Witness w = twin_chains_witness(2, 0.5);
  CHECK(tech_ctx_union(u).map.query(w.rel, 0b11, Index{1} << 3) ==
        doctest::Approx(up_ctx_union(u, w.rel, 0b11, Index{1} << 3).v));
  for (const Technique& t :
       {tech_id(u), tech_ref(u), tech_sym(u), tech_trn(u), tech_mtr(u), tech_ctx_union(u)})
    CHECK(!t.basis.empty());
}

TEST_CASE("joined techniques take the pointwise best") {
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel d(plain(3), u.bottom());
  d.set_raw(0, 1, 0.6);
  d.set_raw(1, 0, 0.3);
  Technique j = combine(u, {tech_ref(u), tech_sym(u)}, CombineMode::Join);
  CHECK(j.map.name == "ref|sym");
  // ref leaves (0, 1) alone, sym pulls the transpose down to 0.3.
  CHECK(j.map.query(d, 0, 1) == doctest::Approx(0.3));
  CHECK(j.map.query(d, 0, 0) == doctest::Approx(0.0));
  CHECK(!j.basis.empty());
}

TEST_CASE("chained techniques need a lax lifting in scope") {
  Quantale b{QuantaleId::Bool2};
  std::vector<Technique> ts = {tech_ref(b), tech_sym(b)};
  CHECK_THROWS_AS((void)combine(b, ts, CombineMode::Chain), UsageError);
  CHECK_THROWS_AS((void)combine(b, ts, CombineMode::Chain, bool_diamond()), UsageError);
  Technique chained = combine(b, ts, CombineMode::Chain, pow_canonical());
  CHECK(chained.map.name == "ref*sym");
  VRel d(plain(2), b.make(0.0));
  d.set_raw(0, 1, 1.0);
  // Tensor on bool2 is conjunction of the two closure values.
  CHECK(chained.map.query(d, 0, 1) == 1.0);
  CHECK(chained.map.query(d, 1, 0) == 0.0);
}

TEST_CASE("composition refuses inner maps it cannot materialize") {
  Quantale u{QuantaleId::UnitIntervalRev};
  Technique opaque;
  opaque.map.name = "opaque";
  opaque.map.quantale = u.id();
  opaque.map.query = [](const VRel& d, Index x, Index y) { return d.at_raw(x, y); };
  opaque.basis = {"test stub"};
  Technique c = combine(u, {opaque, tech_ref(u)}, CombineMode::Compose);
  VRel d(plain(2), u.bottom());
  CHECK_THROWS_AS((void)c.map.query(d, 0, 1), UsageError);
}

TEST_CASE("combining nothing is an error") {
  Quantale u{QuantaleId::UnitIntervalRev};
  CHECK_THROWS_AS((void)combine(u, {}, CombineMode::Compose), UsageError);
}

TEST_CASE("certification is gated on a declared soundness basis") {
  Quantale u{QuantaleId::UnitIntervalRev};
  // Machine: both roots silent, their successors split on acceptance.
  MachineCoalgebra coalg;
  coalg.carrier = plain(4);
  coalg.alphabet_size = 1;
  coalg.step = [](Index x) {
    MachineValue v;
    v.accept = x == 2;
    v.succ = {x < 2 ? x + 2 : x};
    return v;
  };
  MonotoneMap b = build_b(u, machine_discount(1, 0.5), coalg);

  Witness w;
  w.rel = VRel(plain(4), u.bottom());
  w.rel.set_raw(0, 1, 0.3);
  w.claim_left = 0;
  w.claim_right = 1;
  w.bound = u.make(0.3);

  Technique halve;
  halve.map.name = "halve";
  halve.map.quantale = u.id();
  halve.map.query = [](const VRel& d, Index x, Index y) { return d.at_raw(x, y) / 2.0; };

  // No soundness basis: refused outright.
  CHECK_THROWS_AS((void)certify(u, w, b, halve), UsageError);

  // Forced through, the unsound map "certifies" a bound below the real
  // distance of 0.5; this is exactly what the gate protects against.
  CheckVerdict forced = certify(u, w, b, halve, true);
  CHECK(forced.certified);
  GfpResult real = gfp(u, b, plain(4));
  CHECK(real.rel.at_raw(0, 1) == doctest::Approx(0.5));

  // The identity technique keeps the check honest: the same witness fails.
  CheckVerdict honest = certify(u, w, b, tech_id(u));
  CHECK(!honest.certified);
}

TEST_CASE("certified twin chain bound through the union congruence") {
  Nfa nfa = gen_twin_chains(4);
  MachineCoalgebra coalg = determinize(nfa);
  Quantale u{QuantaleId::UnitIntervalRev};
  EvaluationMap ev = machine_discount(coalg.alphabet_size, 0.5);
  MonotoneMap b = build_b(u, ev, coalg);
  Witness w = twin_chains_witness(4, 0.5);
  Technique f = combine(u, {tech_ref(u), tech_ctx_union(u)}, CombineMode::Compose, ev);
  CheckVerdict v = certify(u, w, b, f);
  CHECK(v.certified);
  CHECK(v.pairs_checked <= 4 * 5 * 5);
  CHECK(!f.basis.empty());
  CHECK(f.map.name == "ref,ctx-union");
}
