#ifndef QUANTIMETRIC_VREL_HPP
#define QUANTIMETRIC_VREL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "quantimetric/quantale.hpp"

namespace quantimetric {

// Carrier elements are identified by index. Subset states of a determinized
// automaton reuse the same type with the bitset as the index, so carriers can
// be virtual: `size` is then the full exponential bound and is never iterated.
using Index = std::uint64_t;

struct Carrier {
  std::uint64_t size = 0;
  std::vector<std::string> labels;  // empty, or one label per element

  const std::string& label(Index i) const;
};

// Carrier of the subset space of an n-state system (saturates at n = 64).
Carrier subset_carrier(std::uint32_t n_states);

// Carriers above this size are treated as virtual: operations that would
// enumerate them refuse with UsageError instead.
inline constexpr std::uint64_t kMaterializeCap = std::uint64_t{1} << 20;

void require_materializable(const Carrier& c, const char* op);

// Raw read access to a relation, used by evaluators that only need lookups.
using RelLookup = std::function<double(Index, Index)>;

// Sparse V-valued predicate: index -> value, with an explicit default.
class VPred {
public:
  VPred(Carrier carrier, QuantaleValue dflt);

  const Carrier& carrier() const { return carrier_; }
  QuantaleId quantale() const { return quantale_; }
  double default_raw() const { return default_; }

  void set(Index x, QuantaleValue v);
  void set_raw(Index x, double v, double eps = kDefaultEps);
  QuantaleValue at(Index x) const { return {quantale_, at_raw(x)}; }
  double at_raw(Index x) const;

  const std::map<Index, double>& entries() const { return entries_; }

private:
  Carrier carrier_;
  QuantaleId quantale_;
  double default_;
  std::map<Index, double> entries_;  // values differing from the default
};

// Sparse V-valued relation over one carrier. Stored entries always differ
// from the default; iteration order over entries is lexicographic in (x, y),
// which keeps serialized output deterministic.
class VRel {
public:
  using Key = std::pair<Index, Index>;

  VRel() = default;
  VRel(Carrier carrier, QuantaleValue dflt);

  const Carrier& carrier() const { return carrier_; }
  QuantaleId quantale() const { return quantale_; }
  QuantaleValue dflt() const { return {quantale_, default_}; }
  double default_raw() const { return default_; }

  void set(Index x, Index y, QuantaleValue v);
  void set_raw(Index x, Index y, double v, double eps = kDefaultEps);
  QuantaleValue at(Index x, Index y) const { return {quantale_, at_raw(x, y)}; }
  double at_raw(Index x, Index y) const;

  const std::map<Key, double>& entries() const { return entries_; }
  std::size_t support_size() const { return entries_.size(); }

  RelLookup lookup() const;

  // Pointwise order/equality against a relation on the same carrier. Defaults
  // are compared unless the support covers the full (materializable) square.
  bool leq(const VRel& other, const Quantale& q) const;
  bool eq(const VRel& other, const Quantale& q) const;

private:
  void check_index(Index x, Index y) const;

  Carrier carrier_;
  QuantaleId quantale_ = QuantaleId::Bool2;
  double default_ = 0.0;
  std::map<Key, double> entries_;
};

// Total function between two finite carriers.
struct FiniteMap {
  Carrier domain;
  Carrier codomain;
  std::vector<Index> table;  // table[x] < codomain.size

  FiniteMap(Carrier dom, Carrier cod, std::vector<Index> tab);
  Index operator()(Index x) const;
};

// Equivalence classes over an explicit element set. Elements absent from the
// partition are treated as singleton classes by consumers.
struct Partition {
  std::vector<Index> elements;
  std::vector<std::uint32_t> class_of;  // parallel to elements
  std::size_t class_count = 0;

  std::optional<std::uint32_t> find(Index x) const;
  std::vector<std::vector<Index>> classes() const;

private:
  mutable std::unordered_map<Index, std::uint32_t> index_;  // built lazily
};

// Reindexing p(f x, f x') of a relation along f : X -> Y.
VRel reindex(const FiniteMap& f, const VRel& r);

// Direct image along f: value at (y, y') is the join of r over the preimage
// box f^-1(y) x f^-1(y'); an empty box gives bottom.
VRel direct_image(const Quantale& q, const FiniteMap& f, const VRel& r);

// Adjunction direct_image(f, -) -| reindex(f, -):
// direct_image(f, p) <= q  iff  p <= reindex(f, q).
bool adjunction_holds(const Quantale& q, const FiniteMap& f, const VRel& p, const VRel& rel_on_codomain);

// Relation composition (p ; q)(x, y) = join_z p(x, z) (x) q(z, y).
VRel compose(const Quantale& q, const VRel& p, const VRel& r);

// Diagonal relation: unit on the diagonal, bottom elsewhere.
VRel diagonal(const Quantale& q, const Carrier& x);

bool is_reflexive(const Quantale& q, const VRel& r);
bool is_transitive(const Quantale& q, const VRel& r);
bool is_symmetric(const Quantale& q, const VRel& r);

} // namespace quantimetric

#endif
