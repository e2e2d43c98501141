#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <vector>

#include "quantimetric/errors.hpp"
#include "quantimetric/vrel.hpp"

using namespace quantimetric;

namespace {

Carrier plain(std::uint64_t n) { return Carrier{n, {}}; }

VRel random_rel(const Quantale& q, const Carrier& c, double dflt, std::mt19937& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  VRel r(c, q.make(dflt));
  for (Index x = 0; x < c.size; ++x)
    for (Index y = 0; y < c.size; ++y)
      if (u01(rng) < 0.6)
        r.set_raw(x, y, q.id() == QuantaleId::Bool2 ? (u01(rng) < 0.5 ? 0.0 : 1.0) : u01(rng));
  return r;
}

} // namespace

TEST_CASE("sparse storage drops defaults") {
  Quantale q{QuantaleId::UnitIntervalRev};
  VRel r(plain(3), q.make(1.0));
  r.set_raw(0, 1, 0.3);
  r.set_raw(1, 2, 1.0);  // equals the default, must not be stored
  CHECK(r.support_size() == 1);
  CHECK(r.at_raw(0, 1) == doctest::Approx(0.3));
  CHECK(r.at_raw(1, 2) == doctest::Approx(1.0));
  CHECK(r.at_raw(2, 2) == doctest::Approx(1.0));
  r.set_raw(0, 1, 1.0);  // overwrite with the default erases the entry
  CHECK(r.support_size() == 0);
  CHECK_THROWS_AS(r.set_raw(3, 0, 0.5), UsageError);
}

TEST_CASE("predicate storage mirrors the relation behaviour") {
  Quantale q{QuantaleId::UnitIntervalRev};
  VPred p(plain(4), q.make(1.0));
  p.set_raw(2, 0.25);
  CHECK(p.at_raw(2) == doctest::Approx(0.25));
  CHECK(p.at_raw(0) == doctest::Approx(1.0));
  CHECK(p.entries().size() == 1);
  CHECK_THROWS_AS(p.set_raw(9, 0.5), UsageError);
}

TEST_CASE("subset carrier is virtual beyond the cap") {
  Carrier small = subset_carrier(4);
  CHECK(small.size == 16);
  require_materializable(small, "test");  // must not throw
  Carrier big = subset_carrier(40);
  CHECK(big.size == (std::uint64_t{1} << 40));
  CHECK_THROWS_AS(require_materializable(big, "test"), UsageError);
  Carrier full = subset_carrier(64);
  CHECK(full.size == ~std::uint64_t{0});
}

TEST_CASE("composition chains costs through the middle element") {
  Quantale q{QuantaleId::UnitIntervalRev};
  VRel p(plain(3), q.make(1.0));
  VRel r(plain(3), q.make(1.0));
  p.set_raw(0, 1, 0.2);
  r.set_raw(1, 2, 0.3);
  VRel pr = compose(q, p, r);
  CHECK(pr.at_raw(0, 2) == doctest::Approx(0.5));
  // No middle element connects 1 to 0 below the default.
  CHECK(pr.at_raw(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("composition joins over all middle elements") {
  Quantale q{QuantaleId::UnitIntervalRev};
  VRel p(plain(4), q.make(1.0));
  VRel r(plain(4), q.make(1.0));
  p.set_raw(0, 1, 0.4);
  p.set_raw(0, 2, 0.1);
  r.set_raw(1, 3, 0.1);
  r.set_raw(2, 3, 0.3);
  // Routes: 0.4 + 0.1 = 0.5 and 0.1 + 0.3 = 0.4; the join keeps the cheaper.
  CHECK(compose(q, p, r).at_raw(0, 3) == doctest::Approx(0.4));
}

TEST_CASE("diagonal is the composition unit") {
  std::mt19937 rng(3);
  for (QuantaleId id : {QuantaleId::Bool2, QuantaleId::UnitIntervalRev}) {
    Quantale q{id};
    VRel r = random_rel(q, plain(4), q.bottom_raw(), rng);
    VRel d = diagonal(q, plain(4));
    CHECK(compose(q, d, r).eq(r, q));
    CHECK(compose(q, r, d).eq(r, q));
  }
}

TEST_CASE("relation property checks") {
  Quantale q{QuantaleId::UnitIntervalRev};
  VRel d(plain(3), q.make(1.0));
  d.set_raw(0, 1, 0.1);
  d.set_raw(1, 2, 0.1);
  d.set_raw(0, 2, 0.5);
  for (Index x = 0; x < 3; ++x) d.set_raw(x, x, 0.0);
  // 0.1 + 0.1 = 0.2 beats the stored 0.5, so transitivity fails.
  CHECK(!is_transitive(q, d));
  CHECK(is_reflexive(q, d));
  CHECK(!is_symmetric(q, d));
  d.set_raw(0, 2, 0.2);
  CHECK(is_transitive(q, d));
  d.set_raw(1, 0, 0.1);
  d.set_raw(2, 1, 0.1);
  d.set_raw(2, 0, 0.2);
  CHECK(is_symmetric(q, d));
}

TEST_CASE("reflexivity needs the whole diagonal at unit") {
  Quantale q{QuantaleId::Bool2};
  VRel d(plain(2), q.make(0.0));
  d.set_raw(0, 0, 1.0);
  CHECK(!is_reflexive(q, d));
  d.set_raw(1, 1, 1.0);
  CHECK(is_reflexive(q, d));
}

TEST_CASE("reindex and direct image are adjoint") {
  std::mt19937 rng(17);
  Quantale q{QuantaleId::UnitIntervalRev};
  FiniteMap f(plain(5), plain(3), {0, 1, 1, 2, 0});
  for (int round = 0; round < 50; ++round) {
    VRel p = random_rel(q, plain(5), 1.0, rng);
    VRel r = random_rel(q, plain(3), 1.0, rng);
    CHECK(adjunction_holds(q, f, p, r));
    // Spelled out: direct_image(f, p) <= r  iff  p <= reindex(f, r).
    CHECK((direct_image(q, f, p).leq(r, q)) == p.leq(reindex(f, r), q));
  }
}

TEST_CASE("direct image joins over preimage boxes") {
  Quantale q{QuantaleId::Bool2};
  FiniteMap f(plain(3), plain(2), {0, 0, 1});
  VRel p(plain(3), q.make(0.0));
  p.set_raw(0, 2, 1.0);
  VRel img = direct_image(q, f, p);
  CHECK(img.at_raw(0, 1) == 1.0);
  CHECK(img.at_raw(1, 0) == 0.0);
}

TEST_CASE("pointwise order compares defaults off the support") {
  Quantale q{QuantaleId::UnitIntervalRev};
  VRel lo(plain(3), q.make(1.0));
  VRel hi(plain(3), q.make(0.0));
  lo.set_raw(0, 1, 0.5);
  CHECK(lo.leq(hi, q));
  CHECK(!hi.leq(lo, q));
  VRel lo2 = lo;
  CHECK(lo.eq(lo2, q));
  lo2.set_raw(2, 2, 0.9);
  CHECK(!lo.eq(lo2, q));
}

TEST_CASE("partition lookup and classes") {
  Partition part;
  part.elements = {3, 5, 9, 12};
  part.class_of = {0, 1, 0, 1};
  part.class_count = 2;
  REQUIRE(part.find(9).has_value());
  CHECK(*part.find(9) == 0);
  CHECK(*part.find(12) == 1);
  CHECK(!part.find(4).has_value());
  auto cls = part.classes();
  REQUIRE(cls.size() == 2);
  CHECK(cls[0] == std::vector<Index>{3, 9});
  CHECK(cls[1] == std::vector<Index>{5, 12});
}

TEST_CASE("quantale mismatch between relations is rejected") {
  Quantale b{QuantaleId::Bool2};
  Quantale u{QuantaleId::UnitIntervalRev};
  VRel p(plain(2), b.make(0.0));
  VRel r(plain(2), u.make(1.0));
  CHECK_THROWS_AS((void)compose(b, p, r), UsageError);
}
