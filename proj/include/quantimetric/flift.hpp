#ifndef QUANTIMETRIC_FLIFT_HPP
#define QUANTIMETRIC_FLIFT_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "quantimetric/quantale.hpp"
#include "quantimetric/transport.hpp"
#include "quantimetric/vrel.hpp"

namespace quantimetric {

// The three supported set functors: finite powerset, deterministic machine
// 2 x X^A (accept bit plus one successor per letter), finitely supported
// probability distributions.
enum class FunctorTag { Pow, Machine, Dist };

struct FunctorId {
  FunctorTag tag = FunctorTag::Pow;
  std::uint32_t alphabet_size = 0;  // Machine only, >= 1
};

// Functor values over an index carrier.
struct PowValue {
  std::vector<Index> elems;  // strictly increasing
};

struct MachineValue {
  bool accept = false;
  std::vector<Index> succ;  // one entry per letter
};

struct DistValue {
  std::vector<std::pair<Index, double>> mass;  // sorted by index, masses > 0, sum 1
};

using FunctorValue = std::variant<PowValue, MachineValue, DistValue>;

PowValue make_pow(std::vector<Index> elems);
// Merges duplicates, drops masses below eps, checks the total is 1.
DistValue make_dist(std::vector<std::pair<Index, double>> mass, double eps = kDefaultEps);
DistValue dirac(Index x);

// Functor values over the quantale carrier itself (inputs of evaluation maps).
struct PowOfV {
  std::vector<double> elems;  // set semantics; duplicates are harmless
};
struct MachineOfV {
  bool accept = false;
  std::vector<double> succ;
};
struct DistOfV {
  std::vector<std::pair<double, double>> mass;  // (value, probability)
};
using FunctorOfV = std::variant<PowOfV, MachineOfV, DistOfV>;

// Monotone evaluation maps F(V) -> V. Each kind fixes the functor; the
// quantale compatibility is checked by require_compatible.
//
//   PowCanonical     meet of the set (canonical powerset evaluation)
//   DistExpectation  expected value (unit interval only)
//   DistCanonical    meet of the support (canonical distribution evaluation)
//   MachineDiscount  c * real-max over successor values, accept ignored
//   MachineCanonical meet over successor values, accept ignored
//   BoolDiamond      "some element is 1" (Bool2 powerset diamond)
enum class EvalKind {
  PowCanonical,
  DistExpectation,
  DistCanonical,
  MachineDiscount,
  MachineCanonical,
  BoolDiamond,
};

struct EvaluationMap {
  FunctorId functor;
  EvalKind kind = EvalKind::PowCanonical;
  double discount = 0.0;  // MachineDiscount only, in (0,1)

  // Structural conditions declared per kind and probe-tested elsewhere:
  // lift of the constant-unit predicate dominates unit, and
  // lift(p tensor q) >= lift(p) tensor lift(q).
  bool unit_condition = true;
  bool lax_tensor = true;

  const char* name() const;
};

EvaluationMap pow_canonical();
EvaluationMap dist_expectation();
EvaluationMap dist_canonical();
EvaluationMap machine_discount(std::uint32_t alphabet_size, double c);
EvaluationMap machine_canonical(std::uint32_t alphabet_size);
EvaluationMap bool_diamond();

// Rejects kind/quantale combinations outside the map's precondition.
void require_compatible(const EvaluationMap& ev, QuantaleId q);

QuantaleValue eval(const Quantale& q, const EvaluationMap& ev, const FunctorOfV& u);

// Canonical evaluation of functor F at u: join of all r such that u lies in
// F of the upper set of r. Closed forms per functor.
QuantaleValue canonical_eval(const Quantale& q, FunctorId f, const FunctorOfV& u);

// Predicate lifting: push p through the functor value, then evaluate.
QuantaleValue lift_pred(const Quantale& q, const EvaluationMap& ev, const VPred& p, const FunctorValue& u);

struct CouplingOptions {
  std::size_t max_enum = 12;  // Pow brute force: |t1| * |t2| cells
  TransportOptions transport;
};

// Wasserstein-style lifting of a relation to a pair of functor values: join
// over couplings of the evaluated pushforward. Dispatch:
//   Pow + PowCanonical      closed form (Hausdorff in quantale terms)
//   Pow + other kinds       brute force over couplings, capped by max_enum
//   Machine kinds           closed form over the letter-indexed successors
//   Dist + DistExpectation  exact min-cost transportation
//   Dist + DistCanonical    bottleneck transportation
QuantaleValue wasserstein(const Quantale& q, const EvaluationMap& ev, const VRel& r,
                          const FunctorValue& t1, const FunctorValue& t2,
                          const CouplingOptions& opt = {});

// Real-arithmetic Hausdorff formula (reversed real quantales only):
//   max( sup_{x1} inf_{x2} r, sup_{x2} inf_{x1} r )
// with sup over an empty side = 0 and inf over an empty side = bottom.
QuantaleValue hausdorff(const Quantale& q, const VRel& r, const PowValue& x1, const PowValue& x2);

// Machine-lifting kernel shared with the fixpoint step map: reads the
// relation through raw lookups.
double machine_wasserstein_raw(const Quantale& q, const EvaluationMap& ev,
                               const MachineValue& s1, const MachineValue& s2,
                               const RelLookup& rel);

// Sampled well-behavedness report for an evaluation map: unit condition,
// lax tensor condition, and preservation of reflexivity / transitivity /
// symmetry by the induced lifting. Violations are recorded, not asserted.
struct WellBehavedReport {
  std::size_t unit_checks = 0;
  std::size_t tensor_checks = 0;
  std::size_t vcat_checks = 0;
  std::vector<std::string> violations;  // capped

  bool ok() const { return violations.empty(); }
};

WellBehavedReport check_wellbehaved(const Quantale& q, const EvaluationMap& ev,
                                    std::size_t sample_count, std::uint64_t seed = 0x5eed);

// Lifting-of-natural-transformation condition ev_f <= ev_g . zeta, tested on
// explicit samples. The sample type is opaque; callers provide both
// evaluations and the component of zeta at the quantale carrier.
template <typename U, typename W>
bool check_nat_lifting(const Quantale& q,
                       const std::function<QuantaleValue(const U&)>& ev_f,
                       const std::function<QuantaleValue(const W&)>& ev_g,
                       const std::function<W(const U&)>& zeta,
                       std::span<const U> samples) {
  for (const U& u : samples)
    if (!q.leq(ev_f(u), ev_g(zeta(u)))) return false;
  return true;
}

} // namespace quantimetric

#endif
