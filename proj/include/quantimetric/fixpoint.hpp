#ifndef QUANTIMETRIC_FIXPOINT_HPP
#define QUANTIMETRIC_FIXPOINT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "quantimetric/flift.hpp"
#include "quantimetric/quantale.hpp"
#include "quantimetric/vrel.hpp"

namespace quantimetric {

// Monotone endomap on quantale-valued relations over one (possibly virtual)
// carrier. Both evaluators return the value of m(d) at a single pair: `at`
// reads d through an arbitrary lookup, `query` reads a sparse relation and
// may inspect its support. Maps whose value depends on the support (the
// union-congruence closure, convexity) only exist in query form, so `at` is
// optional.
struct MonotoneMap {
  std::string name;
  QuantaleId quantale = QuantaleId::Bool2;
  std::function<double(const RelLookup&, Index, Index)> at;  // optional
  std::function<double(const VRel&, Index, Index)> query;    // required
  // Sparse image m(d); may under-approximate (in the quantale order) off the
  // produced support. Used to materialize inner maps in compositions.
  std::function<VRel(const VRel&)> sparse_apply;             // optional
  // Pairs the value at (x, y) reads one coalgebra step away; unset for maps
  // without step structure.
  std::function<std::vector<std::pair<Index, Index>>(Index, Index)> step_pairs;  // optional
};

// Applies m at an explicit pair list; pairs outside the list keep dflt.
VRel apply_on_pairs(const Quantale& q, const MonotoneMap& m, const VRel& d,
                    std::span<const std::pair<Index, Index>> pairs, QuantaleValue dflt);

MonotoneMap identity_map(QuantaleId id);

// Deterministic transition structure x -> (accept, successor per letter)
// over a possibly virtual carrier, e.g. the subset space of an NFA.
struct MachineCoalgebra {
  Carrier carrier;
  std::uint32_t alphabet_size = 0;
  std::function<MachineValue(Index)> step;
};

// One-step distance map b(d)(x, y) = machine lifting of d at (step x, step y).
MonotoneMap build_b(const Quantale& q, const EvaluationMap& ev, const MachineCoalgebra& coalg);

struct GfpOptions {
  double tol = 1e-9;
  std::size_t max_iter = 100'000;
};

struct GfpResult {
  VRel rel;  // default = top; entries at the iterated pairs
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t pair_count = 0;
};

// Greatest fixpoint by Kleene iteration from the top-constant relation over
// an explicit pair list. The list must be closed under the map's step
// structure (pairs outside it read as top); reachable_pairs builds such
// lists. Within one sweep the per-pair evaluations run in parallel.
GfpResult gfp(const Quantale& q, const MonotoneMap& b, const Carrier& carrier,
              std::span<const std::pair<Index, Index>> pairs, const GfpOptions& opt = {});

// Plain-loop reference implementation with identical semantics, kept for
// differential tests and as the benchmark baseline.
GfpResult gfp_serial(const Quantale& q, const MonotoneMap& b, const Carrier& carrier,
                     std::span<const std::pair<Index, Index>> pairs, const GfpOptions& opt = {});

// Convenience: iterate over every pair of a materializable carrier. Virtual
// carriers must supply an explicit pair list instead.
GfpResult gfp(const Quantale& q, const MonotoneMap& b, const Carrier& carrier,
              const GfpOptions& opt = {});

std::vector<std::pair<Index, Index>> all_pairs(std::span<const Index> states);

// A claimed bound on the behavioural distance: rel is the candidate relation
// (default bottom), and the claim asserts rel(left, right) >= bound in the
// quantale order, i.e. the real distance is at most the bound.
struct Witness {
  VRel rel;
  Index claim_left = 0;
  Index claim_right = 0;
  QuantaleValue bound;
};

struct CheckCounterexample {
  Index x = 0, y = 0;
  double lhs = 0.0;  // d(x, y)
  double rhs = 0.0;  // b(f(d))(x, y)
  // One-step successor pairs with their f(d) values, when b exposes them.
  std::vector<std::tuple<Index, Index, double>> frontier;
};

struct CheckVerdict {
  bool certified = false;        // inequality_holds && claim_met
  bool inequality_holds = false;
  bool claim_met = false;        // bound <= rel(left, right) in quantale order
  std::size_t pairs_checked = 0;
  std::optional<CheckCounterexample> counterexample;
};

// Proof rule d <= b(f(d)), checked at every support pair of the witness, at
// the claim pair, and at the pairs one step from the claim. Off-support
// pairs hold automatically (default bottom), so success certifies the
// greatest fixpoint of b dominates rel, hence the claimed bound.
CheckVerdict check_witness(const Quantale& q, const Witness& w, const MonotoneMap& b,
                           const MonotoneMap& f);

struct ProbeCounterexample {
  std::size_t sample = 0;
  Index x = 0, y = 0;
  double fb = 0.0;  // f(b(d))(x, y)
  double bf = 0.0;  // b(f(d))(x, y)
};

struct ProbeReport {
  std::size_t samples = 0;
  std::size_t checks = 0;
  std::vector<ProbeCounterexample> counterexamples;  // capped at 16

  bool ok() const { return counterexamples.empty(); }
};

// Samples random relations d over the enumerated states and tests the
// compatibility inequality f(b(d)) <= b(f(d)) pointwise on all state pairs.
// A diagnostic sampler, not a proof.
ProbeReport compatibility_probe(const Quantale& q, const MonotoneMap& b, const MonotoneMap& f,
                                const Carrier& carrier, std::span<const Index> states,
                                std::size_t samples, std::uint64_t seed = 0x5eed);

} // namespace quantimetric

#endif
