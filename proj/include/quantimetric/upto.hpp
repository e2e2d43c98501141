#ifndef QUANTIMETRIC_UPTO_HPP
#define QUANTIMETRIC_UPTO_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quantimetric/fixpoint.hpp"
#include "quantimetric/flift.hpp"
#include "quantimetric/quantale.hpp"
#include "quantimetric/vrel.hpp"

namespace quantimetric {

// A monotone map packaged with the conditions that back its soundness as an
// up-to technique. An empty basis means unproven; certify() refuses those
// unless explicitly overridden.
struct Technique {
  MonotoneMap map;
  std::vector<std::string> basis;
};

// Enumerated closure operators. up_ref needs a materializable carrier (the
// full diagonal is added); up_sym is support-local and works anywhere;
// up_trn is exact on any carrier when the default is bottom (off-support
// intermediates contribute bottom), and needs a materializable carrier
// otherwise.
VRel up_ref(const Quantale& q, const VRel& d);
VRel up_sym(const Quantale& q, const VRel& d);
VRel up_trn(const Quantale& q, const VRel& d);
VRel up_mtr(const Quantale& q, const VRel& d);

// Fibrewise join: value at (x, y) is the join of d over the equivalence
// classes of x and y; elements outside the partition are singletons.
VRel up_bhv(const Quantale& q, const VRel& d, const Partition& equiv);

// Generic contextual closure over an explicitly enumerated algebra, given as
// (u, alpha(u)) pairs: value at (x1, x2) is the join of the lifted relation
// over all decompositions alpha(u1) = x1, alpha(u2) = x2. The total number
// of decomposition pairs examined is capped.
VRel up_ctx(const Quantale& q, const EvaluationMap& ev_t,
            std::span<const std::pair<FunctorValue, Index>> algebra, const VRel& d,
            std::size_t pair_cap = std::size_t{1} << 20);

// Union-congruence closure query on subset states (indices are bitsets over
// the base automaton). Intended for sparse d with default bottom: the value
// at (Q1, Q2) is the best threshold r such that the support pairs at or
// above r (plus the singleton diagonal at unit, plus the empty pair) cover
// Q1 and Q2 by unions componentwise; bottom when no threshold works.
QuantaleValue up_ctx_union(const Quantale& q, const VRel& d, Index q1, Index q2);

struct CvxValue {
  QuantaleValue value;
  bool lower_confidence = false;  // decomposition list was truncated at the cap
};

// Convexity closure query on distribution states: the cheapest mixture
// weighting of support pairs and point-mass pairs that reconstructs both
// queried distributions. state_dists maps each carrier index to its
// distribution over the base set. Unit-interval quantale only; the result is
// always a sound upper bound on the real distance, truncation only loosens it.
CvxValue up_cvx(const Quantale& q, const VRel& d, std::span<const DistValue> state_dists,
                Index delta, Index theta, std::size_t decomposition_cap = 64);

// Lazy technique forms of the operators above. The sparse_apply of ref,
// ctx-union and cvx is support-local and may under-approximate off-support
// values; queries are exact.
Technique tech_id(const Quantale& q);
Technique tech_ref(const Quantale& q);
Technique tech_sym(const Quantale& q);
Technique tech_trn(const Quantale& q);
Technique tech_mtr(const Quantale& q);
Technique tech_bhv(const Quantale& q, Partition equiv);
Technique tech_ctx_union(const Quantale& q);
Technique tech_cvx(const Quantale& q, std::vector<DistValue> state_dists,
                   std::size_t decomposition_cap = 64);

enum class CombineMode { Compose, Join, Chain };

// Compose applies the techniques innermost-first in listed order (so
// {ref, sym, trn} is the metric closure); join and chain combine the
// individual results pointwise by join and tensor. Chain additionally
// requires a lifting declared to satisfy the lax tensor condition. The
// combined basis is the union, or empty if any component is unproven.
Technique combine(const Quantale& q, std::vector<Technique> ts, CombineMode mode,
                  const std::optional<EvaluationMap>& active_lifting = std::nullopt);

// Basis-gated witness check: refuses techniques with no declared soundness
// basis unless unsafe is set.
CheckVerdict certify(const Quantale& q, const Witness& w, const MonotoneMap& b,
                     const Technique& f, bool unsafe = false);

} // namespace quantimetric

#endif
