#include "quantimetric/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "quantimetric/errors.hpp"

namespace quantimetric {

namespace {

constexpr double kPivotEps = 1e-10;

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  while (b) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Largest-remainder rounding onto one fixed denominator.
std::vector<std::int64_t> round_to_denominator(std::span<const double> masses, std::int64_t d) {
  std::vector<std::int64_t> units(masses.size());
  std::vector<std::pair<double, std::size_t>> fracs(masses.size());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    double scaled = masses[i] * static_cast<double>(d);
    units[i] = static_cast<std::int64_t>(std::floor(scaled));
    fracs[i] = {scaled - std::floor(scaled), i};
    total += units[i];
  }
  std::sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; total < d && k < fracs.size(); ++k, ++total) units[fracs[k].second] += 1;
  if (total != d) throw UsageError("mass vector does not sum to one");
  return units;
}

} // namespace

Rational approx_rational(double x, std::int64_t max_den) {
  if (x < 0.0 || !std::isfinite(x)) throw UsageError("approx_rational expects a finite nonnegative value");
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(v);
    if (fl > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 4)) break;
    auto a = static_cast<std::int64_t>(fl);
    std::int64_t p2 = a * p1 + p0;
    std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) {
      // Semiconvergent with the largest admissible coefficient.
      std::int64_t k = q1 > 0 ? (max_den - q0) / q1 : 0;
      std::int64_t ps = k * p1 + p0, qs = k * q1 + q0;
      if (q1 == 0) return {ps, qs > 0 ? qs : 1};
      double c1 = std::fabs(static_cast<double>(p1) / static_cast<double>(q1) - x);
      if (qs > 0) {
        double cs = std::fabs(static_cast<double>(ps) / static_cast<double>(qs) - x);
        if (cs < c1) return {ps, qs};
      }
      return {p1, q1};
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double frac = v - fl;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  if (q1 == 0) return {0, 1};
  return {p1, q1};
}

std::vector<std::int64_t> scale_masses(std::span<const double> masses,
                                       std::int64_t& denom_out,
                                       std::int64_t max_den) {
  std::vector<Rational> rs;
  rs.reserve(masses.size());
  std::int64_t lcm = 1;
  bool exact = true;
  for (double m : masses) {
    Rational r = approx_rational(m, max_den);
    rs.push_back(r);
    if (std::fabs(static_cast<double>(r.num) / static_cast<double>(r.den) - m) > 1e-12) exact = false;
    std::int64_t g = gcd64(lcm, r.den);
    double projected = static_cast<double>(lcm / g) * static_cast<double>(r.den);
    if (projected > static_cast<double>(max_den)) {
      exact = false;
      break;
    }
    lcm = lcm / g * r.den;
  }
  std::vector<std::int64_t> units(masses.size());
  if (exact) {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      units[i] = rs[i].num * (lcm / rs[i].den);
      total += units[i];
    }
    if (total == lcm) {
      denom_out = lcm;
      return units;
    }
  }
  // Fall back to largest-remainder rounding at the maximum denominator.
  denom_out = max_den;
  return round_to_denominator(masses, max_den);
}

namespace {

// Successive shortest paths on the bipartite transportation graph.
// Node layout: 0 = source, 1..m = suppliers, m+1..m+n = consumers, m+n+1 = sink.
double ssp_min_cost(const std::vector<std::int64_t>& supply_units,
                    const std::vector<std::int64_t>& demand_units,
                    std::int64_t total,
                    const std::function<double(std::size_t, std::size_t)>& cost,
                    std::size_t max_pivots) {
  const std::size_t m = supply_units.size(), n = demand_units.size();
  const std::size_t v = m + n + 2, src = 0, snk = m + n + 1;

  struct Edge {
    std::size_t to;
    std::int64_t cap;
    double cost;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g(v);
  auto add_edge = [&](std::size_t a, std::size_t b, std::int64_t cap, double c) {
    g[a].push_back({b, cap, c, g[b].size()});
    g[b].push_back({a, 0, -c, g[a].size() - 1});
  };
  for (std::size_t i = 0; i < m; ++i) add_edge(src, 1 + i, supply_units[i], 0.0);
  for (std::size_t j = 0; j < n; ++j) add_edge(1 + m + j, snk, demand_units[j], 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double c = cost(i, j);
      if (c < 0.0 || !std::isfinite(c)) throw UsageError("transport costs must be finite and nonnegative");
      add_edge(1 + i, 1 + m + j, total, c);
    }

  std::vector<double> pot(v, 0.0);  // costs are nonnegative, so zero potentials start valid
  double total_cost = 0.0;
  std::int64_t flow = 0;
  std::size_t rounds = 0;
  const double inf = std::numeric_limits<double>::infinity();
  while (flow < total) {
    if (++rounds > max_pivots) throw CapError("transport: augmentation cap exceeded");
    std::vector<double> dist(v, inf);
    std::vector<char> done(v, 0);
    std::vector<std::pair<std::size_t, std::size_t>> prev(v, {SIZE_MAX, SIZE_MAX});
    dist[src] = 0.0;
    for (;;) {  // dense Dijkstra; the graph is tiny
      std::size_t best = SIZE_MAX;
      double bd = inf;
      for (std::size_t u = 0; u < v; ++u)
        if (!done[u] && dist[u] < bd) {
          bd = dist[u];
          best = u;
        }
      if (best == SIZE_MAX) break;
      done[best] = 1;
      for (std::size_t ei = 0; ei < g[best].size(); ++ei) {
        const Edge& e = g[best][ei];
        if (e.cap <= 0) continue;
        double nd = dist[best] + e.cost + pot[best] - pot[e.to];
        if (nd < dist[e.to] - 1e-15) {
          dist[e.to] = nd;
          prev[e.to] = {best, ei};
        }
      }
    }
    if (dist[snk] == inf) throw UsageError("transport: marginals cannot be matched");
    for (std::size_t u = 0; u < v; ++u)
      if (dist[u] < inf) pot[u] += dist[u];
    std::int64_t push = total - flow;
    for (std::size_t u = snk; u != src;) {
      auto [pu, pe] = prev[u];
      push = std::min(push, g[pu][pe].cap);
      u = pu;
    }
    for (std::size_t u = snk; u != src;) {
      auto [pu, pe] = prev[u];
      Edge& e = g[pu][pe];
      e.cap -= push;
      g[u][e.rev].cap += push;
      total_cost += e.cost * static_cast<double>(push);
      u = pu;
    }
    flow += push;
  }
  return total_cost / static_cast<double>(total);
}

// Max-flow feasibility: can the scaled marginals be coupled using only the
// enabled cells? BFS augmenting paths over integer capacities.
bool feasible_with_cells(const std::vector<std::int64_t>& supply_units,
                         const std::vector<std::int64_t>& demand_units,
                         std::int64_t total,
                         const std::vector<std::vector<char>>& enabled) {
  const std::size_t m = supply_units.size(), n = demand_units.size();
  const std::size_t v = m + n + 2, src = 0, snk = m + n + 1;
  std::vector<std::vector<std::int64_t>> cap(v, std::vector<std::int64_t>(v, 0));
  for (std::size_t i = 0; i < m; ++i) cap[src][1 + i] = supply_units[i];
  for (std::size_t j = 0; j < n; ++j) cap[1 + m + j][snk] = demand_units[j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (enabled[i][j]) cap[1 + i][1 + m + j] = total;
  std::int64_t flow = 0;
  while (flow < total) {
    std::vector<std::size_t> parent(v, SIZE_MAX);
    parent[src] = src;
    std::queue<std::size_t> q;
    q.push(src);
    while (!q.empty() && parent[snk] == SIZE_MAX) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t w = 0; w < v; ++w)
        if (parent[w] == SIZE_MAX && cap[u][w] > 0) {
          parent[w] = u;
          q.push(w);
        }
    }
    if (parent[snk] == SIZE_MAX) return false;
    std::int64_t push = total - flow;
    for (std::size_t u = snk; u != src; u = parent[u]) push = std::min(push, cap[parent[u]][u]);
    for (std::size_t u = snk; u != src; u = parent[u]) {
      cap[parent[u]][u] -= push;
      cap[u][parent[u]] += push;
    }
    flow += push;
  }
  return true;
}

void scale_both_sides(std::span<const double> supply, std::span<const double> demand,
                      const TransportOptions& opt,
                      std::vector<std::int64_t>& su, std::vector<std::int64_t>& du,
                      std::int64_t& total) {
  std::int64_t ds = 0, dd = 0;
  su = scale_masses(supply, ds, opt.max_denominator);
  du = scale_masses(demand, dd, opt.max_denominator);
  std::int64_t g = gcd64(ds, dd);
  double projected = static_cast<double>(ds / g) * static_cast<double>(dd);
  if (projected <= static_cast<double>(opt.max_denominator)) {
    std::int64_t common = ds / g * dd;
    for (auto& u : su) u *= common / ds;
    for (auto& u : du) u *= common / dd;
    total = common;
    return;
  }
  // The exact denominators do not fit together: round both sides at the cap.
  total = opt.max_denominator;
  su = round_to_denominator(supply, total);
  du = round_to_denominator(demand, total);
}

} // namespace

double min_cost_transport(std::span<const double> supply,
                          std::span<const double> demand,
                          const std::function<double(std::size_t, std::size_t)>& cost,
                          const TransportOptions& opt) {
  if (supply.empty() || demand.empty()) throw UsageError("transport: empty marginal");
  std::vector<std::int64_t> su, du;
  std::int64_t total = 0;
  scale_both_sides(supply, demand, opt, su, du, total);
  return ssp_min_cost(su, du, total, cost, opt.max_pivots);
}

double bottleneck_transport(std::span<const double> supply,
                            std::span<const double> demand,
                            const std::function<double(std::size_t, std::size_t)>& cost,
                            const TransportOptions& opt) {
  if (supply.empty() || demand.empty()) throw UsageError("transport: empty marginal");
  std::vector<std::int64_t> su, du;
  std::int64_t total = 0;
  scale_both_sides(supply, demand, opt, su, du, total);
  const std::size_t m = su.size(), n = du.size();
  std::vector<double> thresholds;
  thresholds.reserve(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double c = cost(i, j);
      if (c < 0.0 || !std::isfinite(c)) throw UsageError("transport costs must be finite and nonnegative");
      thresholds.push_back(c);
    }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  auto feasible_at = [&](double r) {
    std::vector<std::vector<char>> enabled(m, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) enabled[i][j] = cost(i, j) <= r;
    return feasible_with_cells(su, du, total, enabled);
  };
  std::size_t lo = 0, hi = thresholds.size() - 1;
  if (!feasible_at(thresholds[hi])) throw UsageError("transport: marginals cannot be matched");
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (feasible_at(thresholds[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return thresholds[lo];
}

std::optional<LpResult> solve_lp_eq(const std::vector<std::vector<double>>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& c,
                                    std::size_t max_pivots) {
  const std::size_t rows = a.size();
  const std::size_t n = c.size();
  for (const auto& row : a)
    if (row.size() != n) throw UsageError("lp: ragged constraint matrix");
  if (b.size() != rows) throw UsageError("lp: rhs size mismatch");

  // Tableau with artificial variables appended; rhs kept nonnegative.
  const std::size_t cols = n + rows;
  std::vector<std::vector<double>> t(rows, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sign * a[i][j];
    t[i][n + i] = 1.0;
    t[i][cols] = sign * b[i];
    basis[i] = n + i;
  }

  auto run_phase = [&](const std::vector<double>& obj, bool allow_artificial) -> bool {
    for (std::size_t pivots = 0; pivots < max_pivots; ++pivots) {
      // Reduced costs under the current basis.
      std::vector<double> y(rows);
      for (std::size_t i = 0; i < rows; ++i) y[i] = obj[basis[i]];
      std::size_t enter = SIZE_MAX;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!allow_artificial && j >= n) continue;
        bool basic = false;
        for (std::size_t i = 0; i < rows; ++i)
          if (basis[i] == j) {
            basic = true;
            break;
          }
        if (basic) continue;
        double rc = obj[j];
        for (std::size_t i = 0; i < rows; ++i) rc -= y[i] * t[i][j];
        if (rc < -kPivotEps) {
          enter = j;  // Bland: first eligible column
          break;
        }
      }
      if (enter == SIZE_MAX) return true;  // optimal
      std::size_t leave = SIZE_MAX;
      double best = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        if (t[i][enter] > kPivotEps) {
          double ratio = t[i][cols] / t[i][enter];
          if (leave == SIZE_MAX || ratio < best - kPivotEps ||
              (std::fabs(ratio - best) <= kPivotEps && basis[i] < basis[leave])) {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave == SIZE_MAX) return false;  // unbounded
      double piv = t[leave][enter];
      for (std::size_t j = 0; j <= cols; ++j) t[leave][j] /= piv;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == leave) continue;
        double f = t[i][enter];
        if (std::fabs(f) < kPivotEps) continue;
        for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[leave][j];
      }
      basis[leave] = enter;
    }
    throw CapError("lp: pivot cap exceeded");
  };

  std::vector<double> phase1(cols, 0.0);
  for (std::size_t j = n; j < cols; ++j) phase1[j] = 1.0;
  if (!run_phase(phase1, true)) return std::nullopt;
  double art = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] >= n) art += t[i][cols];
  if (art > 1e-7) return std::nullopt;  // infeasible

  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  if (!run_phase(phase2, false)) throw UsageError("lp: unbounded objective");

  LpResult res;
  res.solution.assign(n, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] < n) res.solution[basis[i]] = t[i][cols];
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.solution[j];
  return res;
}

} // namespace quantimetric
