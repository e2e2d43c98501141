#ifndef QUANTIMETRIC_SERIALIZE_HPP
#define QUANTIMETRIC_SERIALIZE_HPP

#include <string>

#include "json.hpp"

#include "quantimetric/fixpoint.hpp"
#include "quantimetric/flift.hpp"
#include "quantimetric/systems.hpp"

namespace quantimetric {

using Json = nlohmann::json;

// Automaton format:
//   {
//     "states": 3 | ["s0", "s1", "s2"],
//     "alphabet": ["a", "b"],
//     "finals": ["s2"],
//     "transitions": [{"from": "s0", "letter": "a", "to": ["s0", "s1"]}, ...]
//   }
// A numeric "states" autogenerates labels s0..s(n-1). Malformed input throws
// UsageError (shape) or nlohmann's parse errors (syntax).
Nfa nfa_from_json(const Json& j);
Json nfa_to_json(const Nfa& nfa);

// A witness with the context it was computed in. The quantale and discount
// stored in the file take precedence over command-line flags when checking.
struct WitnessFile {
  Witness witness;
  QuantaleId quantale = QuantaleId::UnitIntervalRev;
  double c = 0.5;  // machine lifting discount (real quantales)
};

// Witness format (subset states are arrays of state labels):
//   {
//     "quantale": "unit-rev", "c": 0.5, "default": 1.0,
//     "claim": {"left": ["x0"], "right": ["y0"], "bound": 0.125},
//     "entries": [[["x0"], ["y0"], 0.125], ...]
//   }
WitnessFile witness_from_json(const Json& j, const Nfa& nfa);
Json witness_to_json(const WitnessFile& w, const Nfa& nfa);

// Relation entries alone, same shape as the witness "entries"/"default".
VRel vrel_from_json(const Json& j, const Nfa& nfa, QuantaleId quantale);
Json vrel_to_json(const VRel& r, const Nfa& nfa);

// Functor values, tagged by shape:
//   {"pow": [0, 2]}
//   {"machine": {"accept": true, "succ": [1, 0]}}
//   {"dist": [[0, 0.5], [1, 0.5]]}
FunctorValue functor_value_from_json(const Json& j);
Json functor_value_to_json(const FunctorValue& v);

} // namespace quantimetric

#endif
