#ifndef QUANTIMETRIC_ORACLES_HPP
#define QUANTIMETRIC_ORACLES_HPP

#include <cstdint>

#include "quantimetric/flift.hpp"
#include "quantimetric/quantale.hpp"
#include "quantimetric/vrel.hpp"

namespace quantimetric {

// Reference computations with deliberately different algorithms from the
// main code paths. They are slow and exist to cross-check results; the CLI
// exposes them behind --oracle and the test suite diffs them against the
// production routines.

// Lifting of r to powerset values by direct recursive enumeration of
// relation couplings: each element of `a` picks a nonempty partner set in
// `b`, leaves failing column coverage are discarded, and the evaluated
// pushforward is joined over the survivors. Throws CapError when |a| * |b|
// exceeds cell_cap.
QuantaleValue pow_lift_bruteforce(const Quantale& q, const EvaluationMap& ev, const VRel& r,
                                  const PowValue& a, const PowValue& b,
                                  std::size_t cell_cap = 20);

// Minimum expected cost over couplings of two finitely supported
// distributions, by enumerating every greedy cell-saturation order on
// integer-scaled masses (every extreme coupling arises from some order).
// Masses must be rational with denominator at most denominator_cap.
double dist_expectation_oracle(const VRel& r, const DistValue& a, const DistValue& b,
                               std::uint64_t denominator_cap = 1'000'000);

// Same enumeration, minimising the largest cost on a used cell instead.
double dist_bottleneck_oracle(const VRel& r, const DistValue& a, const DistValue& b,
                              std::uint64_t denominator_cap = 1'000'000);

} // namespace quantimetric

#endif
