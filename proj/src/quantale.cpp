#include "quantimetric/quantale.hpp"

#include <cmath>

#include "quantimetric/errors.hpp"

namespace quantimetric {

const char* to_string(QuantaleId id) {
  switch (id) {
    case QuantaleId::Bool2: return "bool2";
    case QuantaleId::UnitIntervalRev: return "unit-rev";
    case QuantaleId::ExtNonNegRev: return "ext-rev";
  }
  return "?";
}

std::optional<QuantaleId> quantale_from_string(std::string_view name) {
  if (name == "bool2") return QuantaleId::Bool2;
  if (name == "unit-rev") return QuantaleId::UnitIntervalRev;
  if (name == "ext-rev") return QuantaleId::ExtNonNegRev;
  return std::nullopt;
}

Quantale::Quantale(QuantaleId id, double eps) : id_(id), eps_(eps) {
  if (eps < 0.0) throw UsageError("quantale tolerance must be nonnegative");
}

QuantaleValue Quantale::make(double raw) const {
  switch (id_) {
    case QuantaleId::Bool2:
      if (std::fabs(raw) > eps_ && std::fabs(raw - 1.0) > eps_)
        throw UsageError("bool2 carrier is {0,1}");
      return {id_, raw < 0.5 ? 0.0 : 1.0};
    case QuantaleId::UnitIntervalRev:
      if (raw < -eps_ || raw > 1.0 + eps_)
        throw UsageError("unit-rev carrier is [0,1]");
      return {id_, raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw)};
    case QuantaleId::ExtNonNegRev:
      if (std::isnan(raw) || raw < -eps_)
        throw UsageError("ext-rev carrier is [0,inf]");
      return {id_, raw < 0.0 ? 0.0 : raw};
  }
  throw UsageError("unknown quantale");
}

double Quantale::bottom_raw() const {
  switch (id_) {
    case QuantaleId::Bool2: return 0.0;
    case QuantaleId::UnitIntervalRev: return 1.0;
    case QuantaleId::ExtNonNegRev: return kInf;
  }
  return 0.0;
}

double Quantale::top_raw() const {
  switch (id_) {
    case QuantaleId::Bool2: return 1.0;
    case QuantaleId::UnitIntervalRev: return 0.0;
    case QuantaleId::ExtNonNegRev: return 0.0;
  }
  return 0.0;
}

double Quantale::unit_raw() const {
  // All three instances are integral: unit = top.
  return top_raw();
}

bool Quantale::leq_raw(double a, double b) const {
  switch (id_) {
    case QuantaleId::Bool2:
      return a <= b + eps_;
    case QuantaleId::UnitIntervalRev:
    case QuantaleId::ExtNonNegRev:
      // Reversed order: a <= b iff a >=_R b. Infinities compare exactly.
      if (std::isinf(b)) return true;
      if (std::isinf(a)) return false;
      return a >= b - eps_;
  }
  return false;
}

bool Quantale::eq_raw(double a, double b) const {
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
  return std::fabs(a - b) <= eps_;
}

double Quantale::join_raw(double a, double b) const {
  switch (id_) {
    case QuantaleId::Bool2: return a > b ? a : b;
    case QuantaleId::UnitIntervalRev:
    case QuantaleId::ExtNonNegRev: return a < b ? a : b;  // real min
  }
  return a;
}

double Quantale::meet_raw(double a, double b) const {
  switch (id_) {
    case QuantaleId::Bool2: return a < b ? a : b;
    case QuantaleId::UnitIntervalRev:
    case QuantaleId::ExtNonNegRev: return a > b ? a : b;  // real max
  }
  return a;
}

double Quantale::tensor_raw(double a, double b) const {
  switch (id_) {
    case QuantaleId::Bool2:
      return (a > 0.5 && b > 0.5) ? 1.0 : 0.0;
    case QuantaleId::UnitIntervalRev: {
      double s = a + b;
      return s > 1.0 ? 1.0 : s;
    }
    case QuantaleId::ExtNonNegRev:
      if (std::isinf(a) || std::isinf(b)) return kInf;
      return a + b;
  }
  return a;
}

double Quantale::residuate_raw(double y, double z) const {
  switch (id_) {
    case QuantaleId::Bool2:
      // y -> z
      return (y > 0.5 && z < 0.5) ? 0.0 : 1.0;
    case QuantaleId::UnitIntervalRev: {
      // Largest x in the reversed order (least real) with min(x+y,1) >=_R z.
      double d = z - y;
      return d < 0.0 ? 0.0 : d;
    }
    case QuantaleId::ExtNonNegRev: {
      // Truncated subtraction with explicit infinity cases.
      if (std::isinf(y)) return 0.0;        // x + inf >= z for every x
      if (std::isinf(z)) return kInf;       // finite y forces x = inf
      double d = z - y;
      return d < 0.0 ? 0.0 : d;
    }
  }
  return 0.0;
}

void Quantale::check_id(QuantaleValue v) const {
  if (v.id != id_) throw UsageError("mixed quantale values");
}

bool Quantale::leq(QuantaleValue a, QuantaleValue b) const {
  check_id(a);
  check_id(b);
  return leq_raw(a.v, b.v);
}

bool Quantale::eq(QuantaleValue a, QuantaleValue b) const {
  check_id(a);
  check_id(b);
  return eq_raw(a.v, b.v);
}

QuantaleValue Quantale::join(std::span<const QuantaleValue> vs) const {
  double acc = bottom_raw();
  for (QuantaleValue v : vs) {
    check_id(v);
    acc = join_raw(acc, v.v);
  }
  return {id_, acc};
}

QuantaleValue Quantale::meet(std::span<const QuantaleValue> vs) const {
  double acc = top_raw();
  for (QuantaleValue v : vs) {
    check_id(v);
    acc = meet_raw(acc, v.v);
  }
  return {id_, acc};
}

QuantaleValue Quantale::join(QuantaleValue a, QuantaleValue b) const {
  check_id(a);
  check_id(b);
  return {id_, join_raw(a.v, b.v)};
}

QuantaleValue Quantale::meet(QuantaleValue a, QuantaleValue b) const {
  check_id(a);
  check_id(b);
  return {id_, meet_raw(a.v, b.v)};
}

QuantaleValue Quantale::tensor(QuantaleValue a, QuantaleValue b) const {
  check_id(a);
  check_id(b);
  return {id_, tensor_raw(a.v, b.v)};
}

QuantaleValue Quantale::residuate(QuantaleValue y, QuantaleValue z) const {
  check_id(y);
  check_id(z);
  return {id_, residuate_raw(y.v, z.v)};
}

bool Quantale::totally_below(QuantaleValue u, QuantaleValue v,
                             std::span<const std::vector<QuantaleValue>> candidate_join_sets) const {
  check_id(u);
  check_id(v);
  for (const auto& w_set : candidate_join_sets) {
    QuantaleValue j = join(std::span<const QuantaleValue>(w_set));
    if (!leq(v, j)) continue;
    bool found = false;
    for (QuantaleValue w : w_set) {
      if (leq(u, w)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

} // namespace quantimetric
