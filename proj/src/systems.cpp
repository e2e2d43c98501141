#include "quantimetric/systems.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <set>

#include "quantimetric/errors.hpp"

namespace quantimetric {

std::uint64_t Nfa::next(std::uint64_t subset, std::uint32_t letter) const {
  std::uint64_t out = 0;
  for (std::uint32_t s = 0; s < states; ++s)
    if (subset >> s & 1) out |= delta[std::size_t{s} * alphabet.size() + letter];
  return out;
}

std::optional<std::uint32_t> Nfa::state_of_label(const std::string& name) const {
  for (std::uint32_t s = 0; s < states; ++s)
    if (labels[s] == name) return s;
  return std::nullopt;
}

void validate(const Nfa& nfa) {
  if (nfa.states == 0 || nfa.states > 64) throw UsageError("automaton needs 1 to 64 states");
  if (nfa.alphabet.empty()) throw UsageError("automaton needs a nonempty alphabet");
  if (nfa.labels.size() != nfa.states) throw UsageError("automaton needs one label per state");
  if (nfa.delta.size() != std::size_t{nfa.states} * nfa.alphabet.size())
    throw UsageError("transition table size disagrees with states x alphabet");
  const std::uint64_t mask =
      nfa.states == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nfa.states) - 1;
  if ((nfa.finals & ~mask) != 0) throw UsageError("accepting set names a state out of range");
  for (std::uint64_t row : nfa.delta)
    if ((row & ~mask) != 0) throw UsageError("transition names a state out of range");
  std::set<std::string> seen;
  for (const std::string& l : nfa.labels)
    if (l.empty() || !seen.insert(l).second)
      throw UsageError("state labels must be nonempty and distinct");
  seen.clear();
  for (const std::string& a : nfa.alphabet)
    if (a.empty() || !seen.insert(a).second)
      throw UsageError("alphabet letters must be nonempty and distinct");
}

MachineCoalgebra determinize(const Nfa& nfa) {
  validate(nfa);
  auto shared = std::make_shared<const Nfa>(nfa);
  MachineCoalgebra coalg;
  coalg.carrier = subset_carrier(nfa.states);
  coalg.alphabet_size = static_cast<std::uint32_t>(nfa.alphabet.size());
  coalg.step = [shared](Index s) {
    MachineValue v;
    v.accept = shared->accepts(s);
    v.succ.reserve(shared->alphabet.size());
    for (std::uint32_t a = 0; a < shared->alphabet.size(); ++a)
      v.succ.push_back(shared->next(s, a));
    return v;
  };
  return coalg;
}

Nfa gen_twin_chains(std::uint32_t n) {
  if (n < 1 || n > 31) throw UsageError("twin chains need 1 <= n <= 31");
  Nfa nfa;
  nfa.states = 2 * n + 2;
  nfa.alphabet = {"a", "b"};
  nfa.labels.resize(nfa.states);
  for (std::uint32_t i = 0; i <= n; ++i) {
    nfa.labels[i] = "x" + std::to_string(i);
    nfa.labels[n + 1 + i] = "y" + std::to_string(i);
  }
  nfa.delta.assign(std::size_t{nfa.states} * 2, 0);
  auto bit = [](std::uint32_t s) { return std::uint64_t{1} << s; };
  auto set = [&](std::uint32_t s, std::uint32_t letter, std::uint64_t to) {
    nfa.delta[std::size_t{s} * 2 + letter] = to;
  };
  set(0, 0, bit(0) | bit(1));  // x0 -a-> {x0, x1}
  set(0, 1, bit(0));           // x0 -b-> {x0}
  set(n + 1, 0, bit(n + 1));   // y0 -a-> {y0}
  set(n + 1, 1, bit(n + 1) | bit(n + 2));
  for (std::uint32_t i = 1; i < n; ++i) {
    set(i, 0, bit(i + 1));
    set(i, 1, bit(i + 1));
    set(n + 1 + i, 0, bit(n + 2 + i));
    set(n + 1 + i, 1, bit(n + 2 + i));
  }
  nfa.finals = bit(n) | bit(2 * n + 1);  // xn, yn; no outgoing edges
  validate(nfa);
  return nfa;
}

Witness twin_chains_witness(std::uint32_t n, double c) {
  if (!(c > 0.0 && c < 1.0)) throw UsageError("twin chain witness needs 0 < c < 1");
  const Nfa nfa = gen_twin_chains(n);
  const Quantale q{QuantaleId::UnitIntervalRev};
  Witness w;
  w.rel = VRel(subset_carrier(nfa.states), q.bottom());
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) {
      const double v = std::pow(c, double(n - std::max(i, j)));
      w.rel.set_raw(Index{1} << i, Index{1} << (n + 1 + j), v);
    }
  w.claim_left = Index{1};
  w.claim_right = Index{1} << (n + 1);
  w.bound = q.make(std::pow(c, double(n)));
  return w;
}

namespace {

using PairKey = std::pair<Index, Index>;

} // namespace

std::optional<std::vector<std::uint32_t>> shortest_distinguishing_word(const Nfa& nfa, Index s1,
                                                                       Index s2,
                                                                       std::size_t cap) {
  validate(nfa);
  const std::uint32_t na = static_cast<std::uint32_t>(nfa.alphabet.size());
  std::map<PairKey, std::pair<PairKey, std::uint32_t>> parent;  // child -> (parent, letter)
  std::deque<PairKey> queue;
  auto distinguishing = [&](const PairKey& k) { return nfa.accepts(k.first) != nfa.accepts(k.second); };
  auto word_to = [&](PairKey k) {
    std::vector<std::uint32_t> word;
    PairKey start{s1, s2};
    while (k != start) {
      const auto& [p, letter] = parent.at(k);
      word.push_back(letter);
      k = p;
    }
    std::reverse(word.begin(), word.end());
    return word;
  };
  const PairKey start{s1, s2};
  if (distinguishing(start)) return std::vector<std::uint32_t>{};
  parent.emplace(start, std::make_pair(start, 0u));
  queue.push_back(start);
  while (!queue.empty()) {
    const PairKey cur = queue.front();
    queue.pop_front();
    for (std::uint32_t a = 0; a < na; ++a) {
      const PairKey nxt{nfa.next(cur.first, a), nfa.next(cur.second, a)};
      if (parent.count(nxt)) continue;
      parent.emplace(nxt, std::make_pair(cur, a));
      if (distinguishing(nxt)) return word_to(nxt);
      if (parent.size() > cap) throw CapError("product search exceeded the pair cap");
      queue.push_back(nxt);
    }
  }
  return std::nullopt;
}

namespace {

// Union-find over subset-state keys, path halving.
struct SubsetUf {
  std::map<Index, Index> parent;

  Index find(Index x) {
    auto it = parent.emplace(x, x).first;
    while (it->second != x) {
      Index up = parent[it->second];
      it->second = up;
      x = it->second;
      it = parent.find(x);
    }
    return x;
  }

  void unite(Index a, Index b) { parent[find(a)] = find(b); }
};

// Merges the languages of a and b; false plus no rollback when an accept
// mismatch shows up, so callers must use a scratch structure per query.
bool merge_equiv(const Nfa& nfa, SubsetUf& uf, Index a, Index b, std::size_t cap) {
  std::vector<PairKey> stack{{a, b}};
  std::size_t steps = 0;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if (nfa.accepts(x) != nfa.accepts(y)) return false;
    const Index rx = uf.find(x), ry = uf.find(y);
    if (rx == ry) continue;
    uf.unite(rx, ry);
    if (++steps > cap) throw CapError("equivalence search exceeded the pair cap");
    for (std::uint32_t l = 0; l < nfa.alphabet.size(); ++l)
      stack.push_back({nfa.next(x, l), nfa.next(y, l)});
  }
  return true;
}

} // namespace

Partition lang_equiv_partition(const Nfa& nfa, std::span<const Index> subset_states,
                               std::size_t cap) {
  validate(nfa);
  std::vector<Index> elems(subset_states.begin(), subset_states.end());
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());

  SubsetUf known;  // only ever merged on confirmed equivalences
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (std::size_t j = i + 1; j < elems.size(); ++j) {
      if (known.find(elems[i]) == known.find(elems[j])) continue;
      SubsetUf scratch = known;
      if (merge_equiv(nfa, scratch, elems[i], elems[j], cap)) known = std::move(scratch);
    }

  Partition part;
  part.elements = elems;
  part.class_of.resize(elems.size());
  std::map<Index, std::uint32_t> root_class;
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const Index r = known.find(elems[i]);
    auto it = root_class.find(r);
    if (it == root_class.end())
      it = root_class.emplace(r, static_cast<std::uint32_t>(root_class.size())).first;
    part.class_of[i] = it->second;
  }
  part.class_count = root_class.size();
  return part;
}

std::vector<std::pair<Index, Index>> reachable_pairs(const Nfa& nfa, Index s1, Index s2,
                                                     std::size_t cap) {
  validate(nfa);
  std::set<PairKey> seen{{s1, s2}};
  std::deque<PairKey> queue{{s1, s2}};
  while (!queue.empty()) {
    const PairKey cur = queue.front();
    queue.pop_front();
    for (std::uint32_t a = 0; a < nfa.alphabet.size(); ++a) {
      const PairKey nxt{nfa.next(cur.first, a), nfa.next(cur.second, a)};
      if (!seen.insert(nxt).second) continue;
      if (seen.size() > cap) throw CapError("product search exceeded the pair cap");
      queue.push_back(nxt);
    }
  }
  return {seen.begin(), seen.end()};
}

std::vector<Index> reachable_subsets(const Nfa& nfa, Index start, std::size_t cap) {
  validate(nfa);
  std::set<Index> seen{start};
  std::deque<Index> queue{start};
  while (!queue.empty()) {
    const Index cur = queue.front();
    queue.pop_front();
    for (std::uint32_t a = 0; a < nfa.alphabet.size(); ++a) {
      const Index nxt = nfa.next(cur, a);
      if (!seen.insert(nxt).second) continue;
      if (seen.size() > cap) throw CapError("subset search exceeded the state cap");
      queue.push_back(nxt);
    }
  }
  return {seen.begin(), seen.end()};
}

std::uint64_t subset_of_labels(const Nfa& nfa, std::span<const std::string> names) {
  std::uint64_t out = 0;
  for (const std::string& name : names) {
    auto s = nfa.state_of_label(name);
    if (!s) throw UsageError("unknown state label '" + name + "'");
    out |= std::uint64_t{1} << *s;
  }
  return out;
}

std::string subset_name(const Nfa& nfa, Index subset) {
  std::string out = "{";
  bool first = true;
  for (std::uint32_t s = 0; s < nfa.states; ++s)
    if (subset >> s & 1) {
      if (!first) out += ",";
      out += nfa.labels[s];
      first = false;
    }
  return out + "}";
}

} // namespace quantimetric
