#ifndef QUANTIMETRIC_TRANSPORT_HPP
#define QUANTIMETRIC_TRANSPORT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace quantimetric {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

// Best rational approximation of x >= 0 with denominator <= max_den,
// via the continued-fraction convergent/semiconvergent construction.
Rational approx_rational(double x, std::int64_t max_den);

struct TransportOptions {
  std::int64_t max_denominator = 1'000'000;
  std::size_t max_pivots = 100'000;
};

// Scales a nonnegative mass vector summing to ~1 onto a common integer
// denominator. Exact when every mass reconstructs as a rational whose lcm of
// denominators stays within max_den; falls back to largest-remainder rounding
// at max_den otherwise. The returned units always sum to denom_out exactly.
std::vector<std::int64_t> scale_masses(std::span<const double> masses,
                                       std::int64_t& denom_out,
                                       std::int64_t max_den);

// Minimum-cost transportation between two mass vectors (each summing to 1)
// with nonnegative finite cell costs. Masses are made integral first, so the
// successive-shortest-path augmentations are exact and cannot cycle.
double min_cost_transport(std::span<const double> supply,
                          std::span<const double> demand,
                          const std::function<double(std::size_t, std::size_t)>& cost,
                          const TransportOptions& opt = {});

// Bottleneck transportation: the least cost threshold r such that a coupling
// exists using only cells of cost <= r, decided by max-flow feasibility over
// the sorted distinct cell costs.
double bottleneck_transport(std::span<const double> supply,
                            std::span<const double> demand,
                            const std::function<double(std::size_t, std::size_t)>& cost,
                            const TransportOptions& opt = {});

// Dense primal simplex for  min c.w  s.t.  A w = b, w >= 0  (Bland's rule).
// Returns nullopt when infeasible.
struct LpResult {
  double objective = 0.0;
  std::vector<double> solution;
};
std::optional<LpResult> solve_lp_eq(const std::vector<std::vector<double>>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& c,
                                    std::size_t max_pivots = 100'000);

} // namespace quantimetric

#endif
