#include "quantimetric/vrel.hpp"

#include <cmath>

#include "quantimetric/errors.hpp"

namespace quantimetric {

void require_materializable(const Carrier& c, const char* op) {
  if (c.size > kMaterializeCap)
    throw UsageError(std::string(op) + ": carrier too large to enumerate; pass an explicit enumeration");
}

const std::string& Carrier::label(Index i) const {
  static const std::string empty;
  if (i < labels.size()) return labels[i];
  return empty;
}

Carrier subset_carrier(std::uint32_t n_states) {
  if (n_states > 64) throw UsageError("subset carriers support at most 64 base states");
  Carrier c;
  c.size = n_states >= 64 ? ~0ull : (1ull << n_states);
  return c;
}

VPred::VPred(Carrier carrier, QuantaleValue dflt)
    : carrier_(std::move(carrier)), quantale_(dflt.id), default_(dflt.v) {}

void VPred::set(Index x, QuantaleValue v) {
  if (v.id != quantale_) throw UsageError("mixed quantale values in predicate");
  set_raw(x, v.v);
}

void VPred::set_raw(Index x, double v, double eps) {
  if (x >= carrier_.size) throw UsageError("predicate index out of carrier");
  bool same = std::isinf(v) || std::isinf(default_)
                  ? std::isinf(v) && std::isinf(default_)
                  : std::fabs(v - default_) <= eps;
  if (same)
    entries_.erase(x);
  else
    entries_[x] = v;
}

double VPred::at_raw(Index x) const {
  auto it = entries_.find(x);
  return it == entries_.end() ? default_ : it->second;
}

VRel::VRel(Carrier carrier, QuantaleValue dflt)
    : carrier_(std::move(carrier)), quantale_(dflt.id), default_(dflt.v) {}

void VRel::check_index(Index x, Index y) const {
  if (x >= carrier_.size || y >= carrier_.size)
    throw UsageError("relation index out of carrier");
}

void VRel::set(Index x, Index y, QuantaleValue v) {
  if (v.id != quantale_) throw UsageError("mixed quantale values in relation");
  set_raw(x, y, v.v);
}

void VRel::set_raw(Index x, Index y, double v, double eps) {
  check_index(x, y);
  bool same = std::isinf(v) || std::isinf(default_)
                  ? std::isinf(v) && std::isinf(default_)
                  : std::fabs(v - default_) <= eps;
  if (same)
    entries_.erase({x, y});
  else
    entries_[{x, y}] = v;
}

double VRel::at_raw(Index x, Index y) const {
  auto it = entries_.find({x, y});
  return it == entries_.end() ? default_ : it->second;
}

RelLookup VRel::lookup() const {
  return [this](Index x, Index y) { return at_raw(x, y); };
}

bool VRel::leq(const VRel& other, const Quantale& q) const {
  if (other.quantale_ != quantale_) throw UsageError("mixed quantale relations");
  for (const auto& [key, v] : entries_)
    if (!q.leq_raw(v, other.at_raw(key.first, key.second))) return false;
  for (const auto& [key, v] : other.entries_)
    if (!q.leq_raw(at_raw(key.first, key.second), v)) return false;
  if (q.leq_raw(default_, other.default_)) return true;
  // Defaults disagree: that only matters if some pair falls through to both.
  // Over a virtual carrier the supports are always sparse, so such a pair
  // certainly exists; otherwise check whether the union of supports covers
  // the whole square.
  if (carrier_.size > kMaterializeCap) return false;
  std::uint64_t square = carrier_.size * carrier_.size;
  std::uint64_t covered = entries_.size();
  for (const auto& [key, v] : other.entries_) {
    (void)v;
    if (!entries_.count(key)) ++covered;
  }
  return covered >= square;
}

bool VRel::eq(const VRel& other, const Quantale& q) const {
  return leq(other, q) && other.leq(*this, q);
}

FiniteMap::FiniteMap(Carrier dom, Carrier cod, std::vector<Index> tab)
    : domain(std::move(dom)), codomain(std::move(cod)), table(std::move(tab)) {
  if (table.size() != domain.size) throw UsageError("finite map table size mismatch");
  for (Index y : table)
    if (y >= codomain.size) throw UsageError("finite map target out of codomain");
}

Index FiniteMap::operator()(Index x) const {
  if (x >= table.size()) throw UsageError("finite map applied outside domain");
  return table[x];
}

std::optional<std::uint32_t> Partition::find(Index x) const {
  if (index_.empty() && !elements.empty())
    for (std::size_t i = 0; i < elements.size(); ++i) index_[elements[i]] = class_of[i];
  auto it = index_.find(x);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<Index>> Partition::classes() const {
  std::vector<std::vector<Index>> out(class_count);
  for (std::size_t i = 0; i < elements.size(); ++i) out[class_of[i]].push_back(elements[i]);
  return out;
}

VRel reindex(const FiniteMap& f, const VRel& r) {
  require_materializable(f.domain, "reindex");
  if (r.carrier().size != f.codomain.size) throw UsageError("reindex: relation not on the codomain");
  VRel out(f.domain, r.dflt());
  for (Index x = 0; x < f.domain.size; ++x)
    for (Index x2 = 0; x2 < f.domain.size; ++x2)
      out.set_raw(x, x2, r.at_raw(f(x), f(x2)));
  return out;
}

VRel direct_image(const Quantale& q, const FiniteMap& f, const VRel& r) {
  require_materializable(f.domain, "direct_image");
  require_materializable(f.codomain, "direct_image");
  if (r.carrier().size != f.domain.size) throw UsageError("direct_image: relation not on the domain");
  std::vector<std::vector<Index>> pre(f.codomain.size);
  for (Index x = 0; x < f.domain.size; ++x) pre[f(x)].push_back(x);
  VRel out(f.codomain, q.bottom());
  for (Index y = 0; y < f.codomain.size; ++y)
    for (Index y2 = 0; y2 < f.codomain.size; ++y2) {
      double acc = q.bottom_raw();
      for (Index x : pre[y])
        for (Index x2 : pre[y2]) acc = q.join_raw(acc, r.at_raw(x, x2));
      out.set_raw(y, y2, acc);
    }
  return out;
}

bool adjunction_holds(const Quantale& q, const FiniteMap& f, const VRel& p, const VRel& rel_on_codomain) {
  bool lhs = direct_image(q, f, p).leq(rel_on_codomain, q);
  bool rhs = p.leq(reindex(f, rel_on_codomain), q);
  return lhs == rhs;
}

VRel compose(const Quantale& q, const VRel& p, const VRel& r) {
  if (p.quantale() != r.quantale() || p.quantale() != q.id())
    throw UsageError("compose: mixed quantales");
  if (p.carrier().size != r.carrier().size) throw UsageError("compose: carrier mismatch");
  require_materializable(p.carrier(), "compose");
  std::uint64_t n = p.carrier().size;
  VRel out(p.carrier(), q.bottom());
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      double acc = q.bottom_raw();
      for (Index z = 0; z < n; ++z)
        acc = q.join_raw(acc, q.tensor_raw(p.at_raw(x, z), r.at_raw(z, y)));
      out.set_raw(x, y, acc);
    }
  return out;
}

VRel diagonal(const Quantale& q, const Carrier& x) {
  require_materializable(x, "diagonal");
  VRel out(x, q.bottom());
  for (Index i = 0; i < x.size; ++i) out.set_raw(i, i, q.unit_raw());
  return out;
}

bool is_reflexive(const Quantale& q, const VRel& r) {
  require_materializable(r.carrier(), "is_reflexive");
  for (Index i = 0; i < r.carrier().size; ++i)
    if (!q.leq_raw(q.unit_raw(), r.at_raw(i, i))) return false;
  return true;
}

bool is_transitive(const Quantale& q, const VRel& r) {
  return compose(q, r, r).leq(r, q);
}

bool is_symmetric(const Quantale& q, const VRel& r) {
  for (const auto& [key, v] : r.entries())
    if (!q.eq_raw(v, r.at_raw(key.second, key.first))) return false;
  return true;
}

} // namespace quantimetric
