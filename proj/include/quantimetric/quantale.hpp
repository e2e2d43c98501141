#ifndef QUANTIMETRIC_QUANTALE_HPP
#define QUANTIMETRIC_QUANTALE_HPP

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace quantimetric {

// Comparison tolerance for real-valued carriers. All order/equality tests on
// UnitIntervalRev and ExtNonNegRev values go through it.
inline constexpr double kDefaultEps = 1e-9;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// The three built-in unital commutative quantales.
//
//   Bool2           {0,1}, join = or, tensor = and, unit = 1.
//   UnitIntervalRev [0,1] with the order reversed (x <= y iff x >=_R y), so
//                   quantale join = real min, bottom = 1, top = unit = 0;
//                   tensor = truncated addition min(x+y, 1).
//   ExtNonNegRev    [0,inf] reversed, tensor = addition, bottom = inf,
//                   top = unit = 0. Infinity is an explicit carrier point;
//                   every operation treats it by case, never by overflow.
enum class QuantaleId { Bool2, UnitIntervalRev, ExtNonNegRev };

const char* to_string(QuantaleId id);

// Parses the CLI spellings "bool2", "unit-rev", "ext-rev".
std::optional<QuantaleId> quantale_from_string(std::string_view name);

// A carrier element tagged with its quantale. Operations on values from
// different quantales raise UsageError.
struct QuantaleValue {
  QuantaleId id;
  double v;
};

// Operation bundle for one fixed quantale. Stateless apart from id and
// tolerance; cheap to copy.
class Quantale {
public:
  explicit Quantale(QuantaleId id, double eps = kDefaultEps);

  QuantaleId id() const { return id_; }
  double eps() const { return eps_; }

  // Tags a raw double, validating that it lies in the carrier.
  QuantaleValue make(double raw) const;

  QuantaleValue bottom() const { return {id_, bottom_raw()}; }
  QuantaleValue top() const { return {id_, top_raw()}; }
  QuantaleValue unit() const { return {id_, unit_raw()}; }

  double bottom_raw() const;
  double top_raw() const;
  double unit_raw() const;

  // Order and equality, up to eps on real carriers.
  bool leq(QuantaleValue a, QuantaleValue b) const;
  bool eq(QuantaleValue a, QuantaleValue b) const;

  // Finite joins and meets; empty join = bottom, empty meet = top.
  QuantaleValue join(std::span<const QuantaleValue> vs) const;
  QuantaleValue meet(std::span<const QuantaleValue> vs) const;
  QuantaleValue join(QuantaleValue a, QuantaleValue b) const;
  QuantaleValue meet(QuantaleValue a, QuantaleValue b) const;

  QuantaleValue tensor(QuantaleValue a, QuantaleValue b) const;

  // Residuation: the largest x with tensor(x, y) <= z. Right adjoint of
  // tensor(-, y), so leq(tensor(x, y), z) iff leq(x, residuate(y, z)).
  QuantaleValue residuate(QuantaleValue y, QuantaleValue z) const;

  // Totally-below test against an explicit family of candidate join sets:
  // true iff every supplied W with v <= join(W) contains some w with u <= w.
  bool totally_below(QuantaleValue u, QuantaleValue v,
                     std::span<const std::vector<QuantaleValue>> candidate_join_sets) const;

  // Raw-double kernels for hot loops; no carrier validation.
  bool leq_raw(double a, double b) const;
  bool eq_raw(double a, double b) const;
  double join_raw(double a, double b) const;
  double meet_raw(double a, double b) const;
  double tensor_raw(double a, double b) const;
  double residuate_raw(double y, double z) const;

private:
  void check_id(QuantaleValue v) const;

  QuantaleId id_;
  double eps_;
};

} // namespace quantimetric

#endif
