#ifndef QUANTIMETRIC_SYSTEMS_HPP
#define QUANTIMETRIC_SYSTEMS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quantimetric/fixpoint.hpp"
#include "quantimetric/vrel.hpp"

namespace quantimetric {

// Nondeterministic finite automaton on at most 64 states. Successor sets and
// the accepting set are bitsets, which is also how subset states are indexed
// after determinization.
struct Nfa {
  std::uint32_t states = 0;
  std::vector<std::string> alphabet;
  std::vector<std::string> labels;   // one per state
  std::vector<std::uint64_t> delta;  // state * |alphabet| + letter -> bitset
  std::uint64_t finals = 0;

  std::uint64_t next(std::uint64_t subset, std::uint32_t letter) const;
  bool accepts(std::uint64_t subset) const { return (subset & finals) != 0; }
  std::optional<std::uint32_t> state_of_label(const std::string& name) const;
};

void validate(const Nfa& nfa);

// Subset construction as a deterministic coalgebra on the 2^n carrier. The
// carrier is virtual for large n; nothing here enumerates it.
MachineCoalgebra determinize(const Nfa& nfa);

// Twin chain family over {a, b}: two root states that loop on both letters,
// each feeding an n-step chain to an accepting end, the left root launching
// its chain on a, the right root on b. The roots accept languages that
// disagree only in the letter n positions before the end, so they are a
// natural hard case for distance computations. States x0..xn then y0..yn.
Nfa gen_twin_chains(std::uint32_t n);  // n >= 1

// Hand-built certificate for the twin chain family at discount c: singleton
// pairs ({x_i}, {y_j}) carry c^(n - max(i, j)) for i, j < n, and the claim
// bounds the root pair ({x0}, {y0}) by c^n.
Witness twin_chains_witness(std::uint32_t n, double c);

// Breadth-first search on the product of subset spaces; returns the letter
// indices of a shortest word accepted from exactly one side, or nullopt when
// the subset states are language equivalent. Throws CapError past `cap`
// expanded product pairs.
std::optional<std::vector<std::uint32_t>> shortest_distinguishing_word(
    const Nfa& nfa, Index s1, Index s2, std::size_t cap = 1'000'000);

// Language equivalence classes of the given subset states, decided per pair
// by union-find refutation on the product graph (an accept mismatch anywhere
// in a merged class refutes it).
Partition lang_equiv_partition(const Nfa& nfa, std::span<const Index> subset_states,
                               std::size_t cap = 1'000'000);

// Product-reachable subset pairs from (s1, s2), sorted. Closed under the
// determinized step, so gfp can iterate on exactly this list.
std::vector<std::pair<Index, Index>> reachable_pairs(const Nfa& nfa, Index s1, Index s2,
                                                     std::size_t cap = 1'000'000);

// Subset states reachable from `start`, sorted.
std::vector<Index> reachable_subsets(const Nfa& nfa, Index start,
                                     std::size_t cap = 1'000'000);

// Bitset of the named states; unknown names throw UsageError.
std::uint64_t subset_of_labels(const Nfa& nfa, std::span<const std::string> names);

// Display form of a subset state, e.g. "{x0,x1}".
std::string subset_name(const Nfa& nfa, Index subset);

} // namespace quantimetric

#endif
