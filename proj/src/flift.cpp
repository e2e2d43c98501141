#include "quantimetric/flift.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "quantimetric/errors.hpp"

namespace quantimetric {

namespace {

const char* tag_name(FunctorTag t) {
  switch (t) {
    case FunctorTag::Pow: return "pow";
    case FunctorTag::Machine: return "machine";
    case FunctorTag::Dist: return "dist";
  }
  return "?";
}

FunctorTag value_tag(const FunctorValue& v) {
  if (std::holds_alternative<PowValue>(v)) return FunctorTag::Pow;
  if (std::holds_alternative<MachineValue>(v)) return FunctorTag::Machine;
  return FunctorTag::Dist;
}

FunctorTag value_tag(const FunctorOfV& v) {
  if (std::holds_alternative<PowOfV>(v)) return FunctorTag::Pow;
  if (std::holds_alternative<MachineOfV>(v)) return FunctorTag::Machine;
  return FunctorTag::Dist;
}

template <typename V>
void require_shape(const EvaluationMap& ev, const V& v) {
  if (value_tag(v) != ev.functor.tag)
    throw UsageError(std::string("functor value does not match evaluation map (expected ") +
                     tag_name(ev.functor.tag) + ")");
  if constexpr (std::is_same_v<V, FunctorValue>) {
    if (const auto* m = std::get_if<MachineValue>(&v))
      if (m->succ.size() != ev.functor.alphabet_size)
        throw UsageError("machine value has wrong alphabet size");
  } else {
    if (const auto* m = std::get_if<MachineOfV>(&v))
      if (m->succ.size() != ev.functor.alphabet_size)
        throw UsageError("machine value has wrong alphabet size");
  }
}

double meet_all(const Quantale& q, const std::vector<double>& vs) {
  double acc = q.top_raw();
  for (double v : vs) acc = q.meet_raw(acc, q.make(v).v);
  return acc;
}

void check_dist_of_v(const Quantale& q, const DistOfV& d) {
  double total = 0.0;
  for (const auto& [v, p] : d.mass) {
    q.make(v);
    if (p < 0.0) throw UsageError("distribution mass must be nonnegative");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-6) throw UsageError("distribution masses must sum to one");
}

} // namespace

PowValue make_pow(std::vector<Index> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  return {std::move(elems)};
}

DistValue make_dist(std::vector<std::pair<Index, double>> mass, double eps) {
  std::sort(mass.begin(), mass.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Index, double>> merged;
  for (const auto& [x, p] : mass) {
    if (p < 0.0) throw UsageError("distribution mass must be nonnegative");
    if (!merged.empty() && merged.back().first == x)
      merged.back().second += p;
    else
      merged.push_back({x, p});
  }
  double total = 0.0;
  double kept = 0.0;
  std::vector<std::pair<Index, double>> out;
  for (const auto& [x, p] : merged) {
    total += p;
    if (p > eps) {
      out.push_back({x, p});
      kept += p;
    }
  }
  if (std::fabs(total - 1.0) > 1e-6) throw UsageError("distribution masses must sum to one");
  if (out.empty()) throw UsageError("distribution has empty support");
  for (auto& [x, p] : out) p /= kept;  // renormalize after dropping dust
  return {std::move(out)};
}

DistValue dirac(Index x) { return {{{x, 1.0}}}; }

const char* EvaluationMap::name() const {
  switch (kind) {
    case EvalKind::PowCanonical: return "pow-canonical";
    case EvalKind::DistExpectation: return "dist-expectation";
    case EvalKind::DistCanonical: return "dist-canonical";
    case EvalKind::MachineDiscount: return "machine-discount";
    case EvalKind::MachineCanonical: return "machine-canonical";
    case EvalKind::BoolDiamond: return "bool-diamond";
  }
  return "?";
}

EvaluationMap pow_canonical() {
  EvaluationMap ev;
  ev.functor = {FunctorTag::Pow, 0};
  ev.kind = EvalKind::PowCanonical;
  return ev;
}

EvaluationMap dist_expectation() {
  EvaluationMap ev;
  ev.functor = {FunctorTag::Dist, 0};
  ev.kind = EvalKind::DistExpectation;
  return ev;
}

EvaluationMap dist_canonical() {
  EvaluationMap ev;
  ev.functor = {FunctorTag::Dist, 0};
  ev.kind = EvalKind::DistCanonical;
  return ev;
}

EvaluationMap machine_discount(std::uint32_t alphabet_size, double c) {
  if (alphabet_size == 0) throw UsageError("machine functor needs at least one letter");
  if (!(c > 0.0 && c < 1.0)) throw UsageError("discount must lie strictly between 0 and 1");
  EvaluationMap ev;
  ev.functor = {FunctorTag::Machine, alphabet_size};
  ev.kind = EvalKind::MachineDiscount;
  ev.discount = c;
  return ev;
}

EvaluationMap machine_canonical(std::uint32_t alphabet_size) {
  if (alphabet_size == 0) throw UsageError("machine functor needs at least one letter");
  EvaluationMap ev;
  ev.functor = {FunctorTag::Machine, alphabet_size};
  ev.kind = EvalKind::MachineCanonical;
  return ev;
}

EvaluationMap bool_diamond() {
  EvaluationMap ev;
  ev.functor = {FunctorTag::Pow, 0};
  ev.kind = EvalKind::BoolDiamond;
  // Fails the unit condition at the empty set and the lax tensor condition on
  // disjoint witnesses; declared here so combine() and basis claims stay honest.
  ev.unit_condition = false;
  ev.lax_tensor = false;
  return ev;
}

void require_compatible(const EvaluationMap& ev, QuantaleId q) {
  switch (ev.kind) {
    case EvalKind::PowCanonical:
    case EvalKind::MachineCanonical:
      return;
    case EvalKind::DistExpectation:
    case EvalKind::DistCanonical:
      if (q != QuantaleId::UnitIntervalRev)
        throw UsageError(std::string(ev.name()) + " requires the unit-rev quantale");
      return;
    case EvalKind::MachineDiscount:
      if (q != QuantaleId::UnitIntervalRev && q != QuantaleId::ExtNonNegRev)
        throw UsageError("machine-discount requires unit-rev or ext-rev");
      return;
    case EvalKind::BoolDiamond:
      if (q != QuantaleId::Bool2) throw UsageError("bool-diamond requires the bool2 quantale");
      return;
  }
}

QuantaleValue eval(const Quantale& q, const EvaluationMap& ev, const FunctorOfV& u) {
  require_compatible(ev, q.id());
  require_shape(ev, u);
  switch (ev.kind) {
    case EvalKind::PowCanonical:
      return {q.id(), meet_all(q, std::get<PowOfV>(u).elems)};
    case EvalKind::BoolDiamond: {
      double acc = q.bottom_raw();
      for (double v : std::get<PowOfV>(u).elems) acc = q.join_raw(acc, q.make(v).v);
      return {q.id(), acc};
    }
    case EvalKind::DistExpectation: {
      const auto& d = std::get<DistOfV>(u);
      check_dist_of_v(q, d);
      double acc = 0.0;
      for (const auto& [v, p] : d.mass) acc += v * p;
      return {q.id(), std::clamp(acc, 0.0, 1.0)};
    }
    case EvalKind::DistCanonical: {
      const auto& d = std::get<DistOfV>(u);
      check_dist_of_v(q, d);
      double acc = q.top_raw();
      for (const auto& [v, p] : d.mass)
        if (p > 0.0) acc = q.meet_raw(acc, v);
      return {q.id(), acc};
    }
    case EvalKind::MachineDiscount: {
      const auto& m = std::get<MachineOfV>(u);
      double worst = 0.0;  // real max; accept bit is not part of the value
      for (double v : m.succ) worst = std::max(worst, q.make(v).v);
      return {q.id(), ev.discount * worst};
    }
    case EvalKind::MachineCanonical: {
      const auto& m = std::get<MachineOfV>(u);
      return {q.id(), meet_all(q, m.succ)};
    }
  }
  throw UsageError("unknown evaluation kind");
}

QuantaleValue canonical_eval(const Quantale& q, FunctorId f, const FunctorOfV& u) {
  if (value_tag(u) != f.tag) throw UsageError("functor value does not match functor id");
  switch (f.tag) {
    case FunctorTag::Pow:
      return {q.id(), meet_all(q, std::get<PowOfV>(u).elems)};
    case FunctorTag::Machine: {
      const auto& m = std::get<MachineOfV>(u);
      if (m.succ.size() != f.alphabet_size) throw UsageError("machine value has wrong alphabet size");
      return {q.id(), meet_all(q, m.succ)};
    }
    case FunctorTag::Dist: {
      const auto& d = std::get<DistOfV>(u);
      check_dist_of_v(q, d);
      double acc = q.top_raw();
      for (const auto& [v, p] : d.mass)
        if (p > 0.0) acc = q.meet_raw(acc, v);
      return {q.id(), acc};
    }
  }
  throw UsageError("unknown functor");
}

QuantaleValue lift_pred(const Quantale& q, const EvaluationMap& ev, const VPred& p,
                        const FunctorValue& u) {
  if (p.quantale() != q.id()) throw UsageError("predicate quantale mismatch");
  require_shape(ev, u);
  FunctorOfV pushed;
  if (const auto* s = std::get_if<PowValue>(&u)) {
    PowOfV out;
    out.elems.reserve(s->elems.size());
    for (Index x : s->elems) out.elems.push_back(p.at_raw(x));
    pushed = std::move(out);
  } else if (const auto* m = std::get_if<MachineValue>(&u)) {
    MachineOfV out;
    out.accept = m->accept;
    out.succ.reserve(m->succ.size());
    for (Index x : m->succ) out.succ.push_back(p.at_raw(x));
    pushed = std::move(out);
  } else {
    const auto& d = std::get<DistValue>(u);
    DistOfV out;
    out.mass.reserve(d.mass.size());
    for (const auto& [x, pr] : d.mass) out.mass.push_back({p.at_raw(x), pr});
    pushed = std::move(out);
  }
  return eval(q, ev, pushed);
}

namespace {

// Closed form of the powerset Wasserstein lifting under the canonical
// evaluation, valid in any quantale:
//   meet( meet_{x1} join_{x2} r , meet_{x2} join_{x1} r ).
// Empty joins are bottom and empty meets are top, which gives
// top on (empty, empty) and bottom when exactly one side is empty.
double pow_canonical_lift(const Quantale& q, const VRel& r, const PowValue& a, const PowValue& b) {
  double acc = q.top_raw();
  for (Index x1 : a.elems) {
    double best = q.bottom_raw();
    for (Index x2 : b.elems) best = q.join_raw(best, r.at_raw(x1, x2));
    acc = q.meet_raw(acc, best);
  }
  for (Index x2 : b.elems) {
    double best = q.bottom_raw();
    for (Index x1 : a.elems) best = q.join_raw(best, r.at_raw(x1, x2));
    acc = q.meet_raw(acc, best);
  }
  return acc;
}

// Join over all couplings of two finite sets, evaluating the pushforward of r
// through ev on each. A coupling is a subset of a x b whose projections hit
// every element of a and of b.
double pow_coupling_lift(const Quantale& q, const EvaluationMap& ev, const VRel& r,
                         const PowValue& a, const PowValue& b, std::size_t max_enum) {
  const std::size_t n1 = a.elems.size(), n2 = b.elems.size();
  const std::size_t cells = n1 * n2;
  if (cells > max_enum)
    throw CapError("pow lifting: coupling enumeration cap exceeded");
  std::vector<double> cell_val(cells);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      cell_val[i * n2 + j] = r.at_raw(a.elems[i], b.elems[j]);
  double acc = q.bottom_raw();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
    std::uint64_t rows = 0, cols = 0;
    PowOfV pushed;
    for (std::size_t c = 0; c < cells; ++c)
      if (mask >> c & 1) {
        rows |= std::uint64_t{1} << (c / n2);
        cols |= std::uint64_t{1} << (c % n2);
        pushed.elems.push_back(cell_val[c]);
      }
    const bool rows_ok = n1 == 0 || rows == (std::uint64_t{1} << n1) - 1;
    const bool cols_ok = n2 == 0 || cols == (std::uint64_t{1} << n2) - 1;
    if (!rows_ok || !cols_ok) continue;
    acc = q.join_raw(acc, eval(q, ev, FunctorOfV{std::move(pushed)}).v);
  }
  return acc;
}

} // namespace

double machine_wasserstein_raw(const Quantale& q, const EvaluationMap& ev,
                               const MachineValue& s1, const MachineValue& s2,
                               const RelLookup& rel) {
  if (s1.succ.size() != s2.succ.size() || s1.succ.size() != ev.functor.alphabet_size)
    throw UsageError("machine values have mismatched alphabets");
  if (s1.accept != s2.accept) return q.bottom_raw();
  // The unique coupling pairs successors letterwise, so the lifting is the
  // evaluation of the letter-indexed vector of relation values.
  switch (ev.kind) {
    case EvalKind::MachineDiscount: {
      double worst = 0.0;
      for (std::size_t l = 0; l < s1.succ.size(); ++l)
        worst = std::max(worst, rel(s1.succ[l], s2.succ[l]));
      return ev.discount * worst;
    }
    case EvalKind::MachineCanonical: {
      double acc = q.top_raw();
      for (std::size_t l = 0; l < s1.succ.size(); ++l)
        acc = q.meet_raw(acc, rel(s1.succ[l], s2.succ[l]));
      return acc;
    }
    default:
      throw UsageError("machine lifting needs a machine evaluation map");
  }
}

QuantaleValue wasserstein(const Quantale& q, const EvaluationMap& ev, const VRel& r,
                          const FunctorValue& t1, const FunctorValue& t2,
                          const CouplingOptions& opt) {
  require_compatible(ev, q.id());
  if (r.quantale() != q.id()) throw UsageError("relation quantale mismatch");
  require_shape(ev, t1);
  require_shape(ev, t2);
  switch (ev.functor.tag) {
    case FunctorTag::Pow: {
      const auto& a = std::get<PowValue>(t1);
      const auto& b = std::get<PowValue>(t2);
      if (ev.kind == EvalKind::PowCanonical)
        return {q.id(), pow_canonical_lift(q, r, a, b)};
      return {q.id(), pow_coupling_lift(q, ev, r, a, b, opt.max_enum)};
    }
    case FunctorTag::Machine: {
      const auto& a = std::get<MachineValue>(t1);
      const auto& b = std::get<MachineValue>(t2);
      return {q.id(), machine_wasserstein_raw(q, ev, a, b, r.lookup())};
    }
    case FunctorTag::Dist: {
      const auto& a = std::get<DistValue>(t1);
      const auto& b = std::get<DistValue>(t2);
      std::vector<double> supply, demand;
      supply.reserve(a.mass.size());
      demand.reserve(b.mass.size());
      for (const auto& [x, p] : a.mass) supply.push_back(p);
      for (const auto& [x, p] : b.mass) demand.push_back(p);
      auto cost = [&](std::size_t i, std::size_t j) {
        return r.at_raw(a.mass[i].first, b.mass[j].first);
      };
      double d = ev.kind == EvalKind::DistExpectation
                     ? min_cost_transport(supply, demand, cost, opt.transport)
                     : bottleneck_transport(supply, demand, cost, opt.transport);
      return q.make(std::clamp(d, 0.0, 1.0));
    }
  }
  throw UsageError("unknown functor");
}

QuantaleValue hausdorff(const Quantale& q, const VRel& r, const PowValue& x1, const PowValue& x2) {
  if (q.id() == QuantaleId::Bool2)
    throw UsageError("hausdorff formula needs a reversed real quantale");
  if (r.quantale() != q.id()) throw UsageError("relation quantale mismatch");
  // Both directions read r with its first argument in x1: the cost need not
  // be symmetric, so the second sup ranges over x2 while the inf stays on x1.
  double fwd = 0.0;  // real sup over an empty side
  for (Index x : x1.elems) {
    double inner = q.bottom_raw();  // real inf over an empty side
    for (Index y : x2.elems) inner = std::min(inner, r.at_raw(x, y));
    fwd = std::max(fwd, inner);
  }
  double bwd = 0.0;
  for (Index y : x2.elems) {
    double inner = q.bottom_raw();
    for (Index x : x1.elems) inner = std::min(inner, r.at_raw(x, y));
    bwd = std::max(bwd, inner);
  }
  return q.make(std::max(fwd, bwd));
}

namespace {

double random_raw(const Quantale& q, std::mt19937_64& rng) {
  switch (q.id()) {
    case QuantaleId::Bool2:
      return static_cast<double>(rng() & 1);
    case QuantaleId::UnitIntervalRev:
      return static_cast<double>(rng() % 9) / 8.0;
    case QuantaleId::ExtNonNegRev: {
      static constexpr double vals[] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, kInf};
      return vals[rng() % 7];
    }
  }
  return 0.0;
}

FunctorValue random_functor_value(const EvaluationMap& ev, std::uint64_t m, std::mt19937_64& rng) {
  switch (ev.functor.tag) {
    case FunctorTag::Pow: {
      std::vector<Index> elems;
      const std::uint64_t mask = rng() % (std::uint64_t{1} << m);
      for (std::uint64_t i = 0; i < m; ++i)
        if (mask >> i & 1) elems.push_back(i);
      return make_pow(std::move(elems));
    }
    case FunctorTag::Machine: {
      MachineValue v;
      v.accept = rng() & 1;
      v.succ.resize(ev.functor.alphabet_size);
      for (auto& s : v.succ) s = rng() % m;
      return v;
    }
    case FunctorTag::Dist: {
      const std::size_t k = 1 + rng() % std::min<std::uint64_t>(m, 3);
      std::vector<std::pair<Index, double>> mass;
      std::int64_t total = 0;
      std::vector<std::int64_t> units(k);
      for (auto& u : units) {
        u = 1 + static_cast<std::int64_t>(rng() % 4);
        total += u;
      }
      for (std::size_t i = 0; i < k; ++i)
        mass.push_back({rng() % m, static_cast<double>(units[i]) / static_cast<double>(total)});
      return make_dist(std::move(mass));
    }
  }
  return PowValue{};
}

std::string describe(const FunctorValue& v) {
  std::ostringstream os;
  if (const auto* s = std::get_if<PowValue>(&v)) {
    os << "pow {";
    for (std::size_t i = 0; i < s->elems.size(); ++i) os << (i ? "," : "") << s->elems[i];
    os << "}";
  } else if (const auto* ma = std::get_if<MachineValue>(&v)) {
    os << "machine " << (ma->accept ? "acc" : "rej") << " [";
    for (std::size_t i = 0; i < ma->succ.size(); ++i) os << (i ? "," : "") << ma->succ[i];
    os << "]";
  } else {
    const auto& d = std::get<DistValue>(v);
    os << "dist {";
    for (std::size_t i = 0; i < d.mass.size(); ++i)
      os << (i ? "," : "") << d.mass[i].first << ":" << d.mass[i].second;
    os << "}";
  }
  return os.str();
}

// Reflexive-symmetric-transitive closure of a random relation; the iteration
// is bounded because each pass only grows entries in the quantale order over
// a finite value grid.
VRel random_metric(const Quantale& q, const Carrier& c, std::mt19937_64& rng) {
  VRel r(c, q.bottom());
  for (Index x = 0; x < c.size; ++x)
    for (Index y = 0; y < c.size; ++y)
      r.set_raw(x, y, x == y ? q.unit_raw() : random_raw(q, rng));
  VRel sym(c, q.bottom());
  for (Index x = 0; x < c.size; ++x)
    for (Index y = 0; y < c.size; ++y)
      sym.set_raw(x, y, q.join_raw(r.at_raw(x, y), r.at_raw(y, x)));
  for (int round = 0; round < 8; ++round) {
    VRel sq = compose(q, sym, sym);
    VRel next(c, q.bottom());
    for (Index x = 0; x < c.size; ++x)
      for (Index y = 0; y < c.size; ++y)
        next.set_raw(x, y, q.join_raw(sym.at_raw(x, y), sq.at_raw(x, y)));
    if (next.eq(sym, q)) break;
    sym = std::move(next);
  }
  return sym;
}

std::vector<FunctorValue> vcat_family(const Quantale&, const EvaluationMap& ev, std::uint64_t m,
                                      std::mt19937_64& rng) {
  std::vector<FunctorValue> fam;
  switch (ev.functor.tag) {
    case FunctorTag::Pow:
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<Index> elems;
        for (std::uint64_t i = 0; i < m; ++i)
          if (mask >> i & 1) elems.push_back(i);
        fam.push_back(make_pow(std::move(elems)));
      }
      break;
    case FunctorTag::Machine:
      for (int i = 0; i < 6; ++i) fam.push_back(random_functor_value(ev, m, rng));
      break;
    case FunctorTag::Dist:
      for (Index x = 0; x < m; ++x) fam.push_back(dirac(x));
      for (int i = 0; i < 4; ++i) fam.push_back(random_functor_value(ev, m, rng));
      break;
  }
  return fam;
}

} // namespace

WellBehavedReport check_wellbehaved(const Quantale& q, const EvaluationMap& ev,
                                    std::size_t sample_count, std::uint64_t seed) {
  require_compatible(ev, q.id());
  WellBehavedReport rep;
  std::mt19937_64 rng(seed);
  constexpr std::size_t kMaxViolations = 32;
  auto note = [&](std::string msg) {
    if (rep.violations.size() < kMaxViolations) rep.violations.push_back(std::move(msg));
  };

  for (std::size_t s = 0; s < sample_count; ++s) {
    const std::uint64_t m = 2 + rng() % 3;
    Carrier c{m, {}};
    FunctorValue u = random_functor_value(ev, m, rng);

    VPred unit_pred(c, q.unit());
    QuantaleValue lifted_unit = lift_pred(q, ev, unit_pred, u);
    ++rep.unit_checks;
    if (!q.leq(q.unit(), lifted_unit))
      note("unit condition violated at " + describe(u));

    VPred p(c, q.bottom()), p2(c, q.bottom()), pq(c, q.bottom());
    for (Index x = 0; x < m; ++x) {
      p.set_raw(x, random_raw(q, rng));
      p2.set_raw(x, random_raw(q, rng));
      pq.set_raw(x, q.tensor_raw(p.at_raw(x), p2.at_raw(x)));
    }
    QuantaleValue lhs = lift_pred(q, ev, pq, u);
    QuantaleValue rhs = q.tensor(lift_pred(q, ev, p, u), lift_pred(q, ev, p2, u));
    ++rep.tensor_checks;
    if (!q.leq(rhs, lhs))
      note("tensor condition violated at " + describe(u));
  }

  const std::size_t rounds = sample_count / 8 + 1;
  for (std::size_t round = 0; round < rounds; ++round) {
    const std::uint64_t m = 2 + rng() % 2;
    Carrier c{m, {}};
    VRel metric = random_metric(q, c, rng);
    std::vector<FunctorValue> fam = vcat_family(q, ev, m, rng);
    Carrier fc{fam.size(), {}};
    VRel lifted(fc, q.bottom());
    for (std::size_t i = 0; i < fam.size(); ++i)
      for (std::size_t j = 0; j < fam.size(); ++j)
        lifted.set_raw(i, j, wasserstein(q, ev, metric, fam[i], fam[j]).v);
    rep.vcat_checks += 3;
    if (!is_reflexive(q, lifted))
      note("lifting broke reflexivity (round " + std::to_string(round) + ")");
    if (!is_transitive(q, lifted))
      note("lifting broke transitivity (round " + std::to_string(round) + ")");
    if (!is_symmetric(q, lifted))
      note("lifting broke symmetry (round " + std::to_string(round) + ")");
  }
  return rep;
}

} // namespace quantimetric
