#include "quantimetric/fixpoint.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "quantimetric/errors.hpp"

namespace quantimetric {

namespace {

void require_same_quantale(const Quantale& q, const MonotoneMap& m) {
  if (m.quantale != q.id()) throw UsageError("monotone map quantale mismatch");
}

// Pointwise change between iterates; exact-equality first so that
// inf == inf counts as no change.
double change_between(double a, double b) {
  if (a == b) return 0.0;
  return std::fabs(a - b);
}

// Value of m(d) at one pair, preferring the sparse evaluator.
double eval_map(const MonotoneMap& m, const VRel& d, Index x, Index y) {
  if (m.query) return m.query(d, x, y);
  RelLookup lk = d.lookup();
  return m.at(lk, x, y);
}

} // namespace

VRel apply_on_pairs(const Quantale& q, const MonotoneMap& m, const VRel& d,
                    std::span<const std::pair<Index, Index>> pairs, QuantaleValue dflt) {
  require_same_quantale(q, m);
  if (d.quantale() != q.id()) throw UsageError("relation quantale mismatch");
  VRel out(d.carrier(), dflt);
  for (const auto& [x, y] : pairs) out.set_raw(x, y, eval_map(m, d, x, y));
  return out;
}

MonotoneMap identity_map(QuantaleId id) {
  MonotoneMap m;
  m.name = "id";
  m.quantale = id;
  m.at = [](const RelLookup& lk, Index x, Index y) { return lk(x, y); };
  m.query = [](const VRel& d, Index x, Index y) { return d.at_raw(x, y); };
  m.sparse_apply = [](const VRel& d) { return d; };
  m.step_pairs = [](Index x, Index y) {
    return std::vector<std::pair<Index, Index>>{{x, y}};
  };
  return m;
}

MonotoneMap build_b(const Quantale& q, const EvaluationMap& ev, const MachineCoalgebra& coalg) {
  if (ev.functor.tag != FunctorTag::Machine)
    throw UsageError("build_b needs a machine evaluation map");
  require_compatible(ev, q.id());
  if (coalg.alphabet_size != ev.functor.alphabet_size)
    throw UsageError("coalgebra and evaluation map disagree on the alphabet");
  if (!coalg.step) throw UsageError("coalgebra has no step function");

  MonotoneMap b;
  b.name = std::string("b[") + ev.name() + "]";
  b.quantale = q.id();
  auto step = coalg.step;
  b.at = [q, ev, step](const RelLookup& lk, Index x, Index y) {
    return machine_wasserstein_raw(q, ev, step(x), step(y), lk);
  };
  b.query = [q, ev, step](const VRel& d, Index x, Index y) {
    RelLookup lk = [&d](Index a, Index bb) { return d.at_raw(a, bb); };
    return machine_wasserstein_raw(q, ev, step(x), step(y), lk);
  };
  b.step_pairs = [step](Index x, Index y) {
    std::vector<std::pair<Index, Index>> out;
    MachineValue sx = step(x), sy = step(y);
    if (sx.accept != sy.accept) return out;
    for (std::size_t l = 0; l < sx.succ.size(); ++l) out.push_back({sx.succ[l], sy.succ[l]});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  return b;
}

GfpResult gfp(const Quantale& q, const MonotoneMap& b, const Carrier& carrier,
              std::span<const std::pair<Index, Index>> pairs, const GfpOptions& opt) {
  require_same_quantale(q, b);
  if (!(opt.tol > 0.0)) throw UsageError("tolerance must be positive");
  GfpResult res;
  res.rel = VRel(carrier, q.top());
  res.pair_count = pairs.size();
  if (pairs.empty()) {
    res.converged = true;
    return res;
  }
  const std::size_t n = pairs.size();
  std::vector<double> vals(n);
  for (std::size_t iter = 1; iter <= opt.max_iter; ++iter) {
    const VRel& cur = res.rel;
    if (b.at) {
      RelLookup lk = cur.lookup();
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < static_cast<long long>(n); ++i)
        vals[i] = b.at(lk, pairs[i].first, pairs[i].second);
    } else {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < static_cast<long long>(n); ++i)
        vals[i] = b.query(cur, pairs[i].first, pairs[i].second);
    }
    double change = 0.0;
    VRel next(carrier, q.top());
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, change_between(vals[i], cur.at_raw(pairs[i].first, pairs[i].second)));
      next.set_raw(pairs[i].first, pairs[i].second, vals[i]);
    }
    res.rel = std::move(next);
    res.iterations = iter;
    if (change < opt.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

GfpResult gfp_serial(const Quantale& q, const MonotoneMap& b, const Carrier& carrier,
                     std::span<const std::pair<Index, Index>> pairs, const GfpOptions& opt) {
  require_same_quantale(q, b);
  if (!(opt.tol > 0.0)) throw UsageError("tolerance must be positive");
  GfpResult res;
  res.rel = VRel(carrier, q.top());
  res.pair_count = pairs.size();
  if (pairs.empty()) {
    res.converged = true;
    return res;
  }
  for (std::size_t iter = 1; iter <= opt.max_iter; ++iter) {
    double change = 0.0;
    VRel next(carrier, q.top());
    for (const auto& [x, y] : pairs) {
      double v = eval_map(b, res.rel, x, y);
      change = std::max(change, change_between(v, res.rel.at_raw(x, y)));
      next.set_raw(x, y, v);
    }
    res.rel = std::move(next);
    res.iterations = iter;
    if (change < opt.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

GfpResult gfp(const Quantale& q, const MonotoneMap& b, const Carrier& carrier,
              const GfpOptions& opt) {
  require_materializable(carrier, "gfp");
  std::vector<Index> states(carrier.size);
  for (Index i = 0; i < carrier.size; ++i) states[i] = i;
  return gfp(q, b, carrier, all_pairs(states), opt);
}

std::vector<std::pair<Index, Index>> all_pairs(std::span<const Index> states) {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(states.size() * states.size());
  for (Index x : states)
    for (Index y : states) out.push_back({x, y});
  return out;
}

CheckVerdict check_witness(const Quantale& q, const Witness& w, const MonotoneMap& b,
                           const MonotoneMap& f) {
  require_same_quantale(q, b);
  require_same_quantale(q, f);
  if (w.rel.quantale() != q.id() || w.bound.id != q.id())
    throw UsageError("witness quantale mismatch");

  std::set<std::pair<Index, Index>> to_check;
  for (const auto& [key, v] : w.rel.entries()) to_check.insert(key);
  to_check.insert({w.claim_left, w.claim_right});
  if (b.step_pairs)
    for (const auto& p : b.step_pairs(w.claim_left, w.claim_right)) to_check.insert(p);

  // b reads f(d) lazily at the successor pairs it steps to.
  RelLookup f_of_d = [&](Index x, Index y) { return f.query(w.rel, x, y); };
  auto rhs_at = [&](Index x, Index y) {
    if (b.at) return b.at(f_of_d, x, y);
    if (f.sparse_apply) return b.query(f.sparse_apply(w.rel), x, y);
    throw UsageError("map combination cannot be evaluated lazily");
  };

  CheckVerdict verdict;
  verdict.inequality_holds = true;
  for (const auto& [x, y] : to_check) {
    ++verdict.pairs_checked;
    const double lhs = w.rel.at_raw(x, y);
    const double rhs = rhs_at(x, y);
    if (!q.leq_raw(lhs, rhs)) {
      verdict.inequality_holds = false;
      CheckCounterexample cex;
      cex.x = x;
      cex.y = y;
      cex.lhs = lhs;
      cex.rhs = rhs;
      if (b.step_pairs)
        for (const auto& [sx, sy] : b.step_pairs(x, y))
          cex.frontier.push_back({sx, sy, f.query(w.rel, sx, sy)});
      verdict.counterexample = std::move(cex);
      break;
    }
  }
  verdict.claim_met = q.leq(w.bound, w.rel.at(w.claim_left, w.claim_right));
  verdict.certified = verdict.inequality_holds && verdict.claim_met;
  return verdict;
}

namespace {

double random_carrier_value(const Quantale& q, std::mt19937_64& rng) {
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

} // namespace

ProbeReport compatibility_probe(const Quantale& q, const MonotoneMap& b, const MonotoneMap& f,
                                const Carrier& carrier, std::span<const Index> states,
                                std::size_t samples, std::uint64_t seed) {
  require_same_quantale(q, b);
  require_same_quantale(q, f);
  ProbeReport rep;
  std::mt19937_64 rng(seed);
  const auto pairs = all_pairs(states);
  for (std::size_t s = 0; s < samples; ++s) {
    VRel d(carrier, q.bottom());
    for (const auto& [x, y] : pairs) d.set_raw(x, y, random_carrier_value(q, rng));
    VRel bd = apply_on_pairs(q, b, d, pairs, q.bottom());
    RelLookup f_of_d = [&](Index x, Index y) { return f.query(d, x, y); };
    ++rep.samples;
    for (const auto& [x, y] : pairs) {
      const double fb = f.query(bd, x, y);
      const double bf = b.at ? b.at(f_of_d, x, y)
                             : (f.sparse_apply ? b.query(f.sparse_apply(d), x, y)
                                               : throw UsageError("probe cannot evaluate b after f"));
      ++rep.checks;
      if (!q.leq_raw(fb, bf) && rep.counterexamples.size() < 16)
        rep.counterexamples.push_back({s, x, y, fb, bf});
    }
  }
  return rep;
}

} // namespace quantimetric
