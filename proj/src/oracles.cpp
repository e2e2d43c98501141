#include "quantimetric/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "quantimetric/errors.hpp"

namespace quantimetric {

namespace {

// Joins eval over every coupling reachable by giving row `i` a nonempty
// partner set; `cols` tracks column coverage.
void pow_couplings(const Quantale& q, const EvaluationMap& ev, const VRel& r, const PowValue& a,
                   const PowValue& b, std::size_t i, std::uint64_t cols,
                   std::vector<double>& picked, double& acc) {
  const std::size_t nb = b.elems.size();
  if (i == a.elems.size()) {
    if (cols + 1 != (std::uint64_t{1} << nb)) return;  // some column unmatched
    PowOfV pushed{picked};
    acc = q.join_raw(acc, eval(q, ev, FunctorOfV{pushed}).v);
    return;
  }
  for (std::uint64_t partners = 1; partners < (std::uint64_t{1} << nb); ++partners) {
    const std::size_t before = picked.size();
    for (std::size_t j = 0; j < nb; ++j)
      if (partners >> j & 1) picked.push_back(r.at_raw(a.elems[i], b.elems[j]));
    pow_couplings(q, ev, r, a, b, i + 1, cols | partners, picked, acc);
    picked.resize(before);
  }
}

} // namespace

QuantaleValue pow_lift_bruteforce(const Quantale& q, const EvaluationMap& ev, const VRel& r,
                                  const PowValue& a, const PowValue& b, std::size_t cell_cap) {
  if (ev.functor.tag != FunctorTag::Pow)
    throw UsageError("pow_lift_bruteforce needs a powerset evaluation map");
  require_compatible(ev, q.id());
  if (a.elems.size() * b.elems.size() > cell_cap)
    throw CapError("pow_lift_bruteforce: too many cells");
  if (a.elems.empty() != b.elems.empty()) return q.bottom();
  if (a.elems.empty()) return eval(q, ev, FunctorOfV{PowOfV{}});
  double acc = q.bottom_raw();
  std::vector<double> picked;
  pow_couplings(q, ev, r, a, b, 0, 0, picked, acc);
  return q.make(acc);
}

namespace {

// Smallest denominator that turns every mass into an integer.
std::uint64_t common_denominator(const DistValue& a, const DistValue& b, std::uint64_t cap) {
  for (std::uint64_t den = 1; den <= cap; ++den) {
    bool ok = true;
    for (const auto& [x, p] : a.mass)
      ok = ok && std::fabs(p * double(den) - std::round(p * double(den))) < 1e-7;
    for (const auto& [x, p] : b.mass)
      ok = ok && std::fabs(p * double(den) - std::round(p * double(den))) < 1e-7;
    if (ok) return den;
  }
  throw CapError("distribution masses are not rationals below the denominator cap");
}

struct SaturationState {
  std::vector<std::int64_t> supply, demand;
  std::vector<double> cost;  // row-major |supply| x |demand|
  double best_expectation = kInf;
  double best_bottleneck = kInf;
};

// Enumerates every order of greedily saturating a (row, column) pair with
// positive residuals. Each complete order reaches an extreme coupling; both
// objectives keep their running minimum.
void saturate(SaturationState& st, double expectation, double bottleneck, std::int64_t total,
              std::uint64_t denominator) {
  if (total == 0) {
    st.best_expectation = std::min(st.best_expectation, expectation);
    st.best_bottleneck = std::min(st.best_bottleneck, bottleneck);
    return;
  }
  if (expectation >= st.best_expectation && bottleneck >= st.best_bottleneck) return;
  const std::size_t m = st.supply.size(), n = st.demand.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (st.supply[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (st.demand[j] == 0) continue;
      const std::int64_t t = std::min(st.supply[i], st.demand[j]);
      st.supply[i] -= t;
      st.demand[j] -= t;
      const double c = st.cost[i * n + j];
      saturate(st, expectation + double(t) / double(denominator) * c, std::max(bottleneck, c),
               total - t, denominator);
      st.supply[i] += t;
      st.demand[j] += t;
    }
  }
}

SaturationState scaled_state(const VRel& r, const DistValue& a, const DistValue& b,
                             std::uint64_t den) {
  SaturationState st;
  for (const auto& [x, p] : a.mass)
    st.supply.push_back(std::llround(p * double(den)));
  for (const auto& [y, p] : b.mass)
    st.demand.push_back(std::llround(p * double(den)));
  st.cost.resize(a.mass.size() * b.mass.size());
  for (std::size_t i = 0; i < a.mass.size(); ++i)
    for (std::size_t j = 0; j < b.mass.size(); ++j)
      st.cost[i * b.mass.size() + j] = r.at_raw(a.mass[i].first, b.mass[j].first);
  return st;
}

} // namespace

double dist_expectation_oracle(const VRel& r, const DistValue& a, const DistValue& b,
                               std::uint64_t denominator_cap) {
  const std::uint64_t den = common_denominator(a, b, denominator_cap);
  SaturationState st = scaled_state(r, a, b, den);
  const std::int64_t total = std::accumulate(st.supply.begin(), st.supply.end(), std::int64_t{0});
  saturate(st, 0.0, 0.0, total, den);
  return st.best_expectation;
}

double dist_bottleneck_oracle(const VRel& r, const DistValue& a, const DistValue& b,
                              std::uint64_t denominator_cap) {
  const std::uint64_t den = common_denominator(a, b, denominator_cap);
  SaturationState st = scaled_state(r, a, b, den);
  const std::int64_t total = std::accumulate(st.supply.begin(), st.supply.end(), std::int64_t{0});
  saturate(st, 0.0, 0.0, total, den);
  return st.best_bottleneck;
}

} // namespace quantimetric
