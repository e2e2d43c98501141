#include "quantimetric/upto.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "quantimetric/errors.hpp"
#include "quantimetric/transport.hpp"

namespace quantimetric {

namespace {

void require_quantale(const Quantale& q, const VRel& d, const char* op) {
  if (d.quantale() != q.id()) throw UsageError(std::string(op) + ": relation quantale mismatch");
}

std::set<Index> touched_states(const VRel& d) {
  std::set<Index> s;
  for (const auto& [k, v] : d.entries()) {
    s.insert(k.first);
    s.insert(k.second);
  }
  return s;
}

} // namespace

VRel up_ref(const Quantale& q, const VRel& d) {
  require_quantale(q, d, "up_ref");
  require_materializable(d.carrier(), "up_ref");
  VRel out = d;
  for (Index x = 0; x < d.carrier().size; ++x)
    out.set_raw(x, x, q.join_raw(d.at_raw(x, x), q.unit_raw()));
  return out;
}

VRel up_sym(const Quantale& q, const VRel& d) {
  require_quantale(q, d, "up_sym");
  std::set<VRel::Key> keys;
  for (const auto& [k, v] : d.entries()) {
    keys.insert(k);
    keys.insert({k.second, k.first});
  }
  VRel out(d.carrier(), d.dflt());
  for (const auto& [x, y] : keys)
    out.set_raw(x, y, q.join_raw(d.at_raw(x, y), d.at_raw(y, x)));
  return out;
}

VRel up_trn(const Quantale& q, const VRel& d) {
  require_quantale(q, d, "up_trn");
  std::vector<Index> nodes;
  if (q.eq_raw(d.default_raw(), q.bottom_raw())) {
    // Off-support intermediates contribute tensor with bottom, which is
    // bottom in every supported quantale, so the closure is support-local.
    auto t = touched_states(d);
    nodes.assign(t.begin(), t.end());
  } else {
    require_materializable(d.carrier(), "up_trn");
    nodes.resize(d.carrier().size);
    for (Index i = 0; i < d.carrier().size; ++i) nodes[i] = i;
  }
  const std::size_t n = nodes.size();
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = d.at_raw(nodes[i], nodes[j]);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m[i * n + j] = q.join_raw(m[i * n + j], q.tensor_raw(m[i * n + k], m[k * n + j]));
  VRel out(d.carrier(), d.dflt());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.set_raw(nodes[i], nodes[j], m[i * n + j]);
  return out;
}

VRel up_mtr(const Quantale& q, const VRel& d) {
  return up_trn(q, up_sym(q, up_ref(q, d)));
}

VRel up_bhv(const Quantale& q, const VRel& d, const Partition& equiv) {
  require_quantale(q, d, "up_bhv");
  for (Index e : equiv.elements)
    if (e >= d.carrier().size) throw UsageError("up_bhv: partition element outside the carrier");
  const auto classes = equiv.classes();
  auto fibre = [&](Index x) -> std::vector<Index> {
    if (auto c = equiv.find(x)) return classes[*c];
    return {x};
  };
  std::set<Index> nodes(equiv.elements.begin(), equiv.elements.end());
  for (const auto& [k, v] : d.entries()) {
    nodes.insert(k.first);
    nodes.insert(k.second);
  }
  VRel out(d.carrier(), d.dflt());
  for (Index x : nodes)
    for (Index y : nodes) {
      double acc = q.bottom_raw();
      for (Index x2 : fibre(x))
        for (Index y2 : fibre(y)) acc = q.join_raw(acc, d.at_raw(x2, y2));
      out.set_raw(x, y, acc);
    }
  return out;
}

VRel up_ctx(const Quantale& q, const EvaluationMap& ev_t,
            std::span<const std::pair<FunctorValue, Index>> algebra, const VRel& d,
            std::size_t pair_cap) {
  require_quantale(q, d, "up_ctx");
  require_compatible(ev_t, q.id());
  std::map<Index, std::vector<const FunctorValue*>> decomp;
  for (const auto& [u, x] : algebra) {
    if (x >= d.carrier().size) throw UsageError("up_ctx: algebra target outside the carrier");
    decomp[x].push_back(&u);
  }
  std::size_t total = 0;
  for (const auto& [x1, v1] : decomp)
    for (const auto& [x2, v2] : decomp) total += v1.size() * v2.size();
  if (total > pair_cap)
    throw UsageError("up_ctx: decomposition enumeration too large; use the union-congruence or convexity closure");
  VRel out(d.carrier(), q.bottom());
  for (const auto& [x1, v1] : decomp)
    for (const auto& [x2, v2] : decomp) {
      double acc = q.bottom_raw();
      for (const FunctorValue* u1 : v1)
        for (const FunctorValue* u2 : v2) acc = q.join_raw(acc, wasserstein(q, ev_t, d, *u1, *u2).v);
      out.set_raw(x1, x2, acc);
    }
  return out;
}

QuantaleValue up_ctx_union(const Quantale& q, const VRel& d, Index q1, Index q2) {
  require_quantale(q, d, "up_ctx_union");
  if (q1 >= d.carrier().size || q2 >= d.carrier().size)
    throw UsageError("up_ctx_union: query outside the carrier");
  // Candidate thresholds: unit (for the singleton diagonal) and every
  // support value, best quantale value first.
  std::vector<double> cands{q.unit_raw()};
  for (const auto& [k, v] : d.entries()) cands.push_back(v);
  if (q.id() == QuantaleId::Bool2)
    std::sort(cands.begin(), cands.end(), std::greater<>());
  else
    std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  const std::uint64_t common = q1 & q2;  // singleton diagonal pairs ({s},{s}) at unit
  for (double r : cands) {
    std::uint64_t ua = common, ub = common;
    for (const auto& [k, v] : d.entries()) {
      const auto [a, b] = k;
      if ((a | q1) == q1 && (b | q2) == q2 && q.leq_raw(r, v)) {
        ua |= a;
        ub |= b;
      }
    }
    if (ua == q1 && ub == q2) return {q.id(), r};
  }
  return q.bottom();
}

namespace {

bool dist_is_dirac_at(const DistValue& v, Index x) {
  return v.mass.size() == 1 && v.mass[0].first == x && std::fabs(v.mass[0].second - 1.0) <= 1e-9;
}

bool dist_within(const DistValue& v, const std::set<Index>& pts) {
  for (const auto& [x, p] : v.mass)
    if (!pts.count(x)) return false;
  return true;
}

} // namespace

CvxValue up_cvx(const Quantale& q, const VRel& d, std::span<const DistValue> state_dists,
                Index delta, Index theta, std::size_t decomposition_cap) {
  if (q.id() != QuantaleId::UnitIntervalRev)
    throw UsageError("up_cvx: convexity closure needs the unit-rev quantale");
  require_quantale(q, d, "up_cvx");
  if (delta >= state_dists.size() || theta >= state_dists.size())
    throw UsageError("up_cvx: distribution state out of range");
  const DistValue& dl = state_dists[delta];
  const DistValue& dr = state_dists[theta];

  std::vector<Index> lrow, rrow;
  std::set<Index> lset, rset;
  for (const auto& [x, p] : dl.mass) {
    lrow.push_back(x);
    lset.insert(x);
  }
  for (const auto& [x, p] : dr.mass) {
    rrow.push_back(x);
    rset.insert(x);
  }

  struct Comp {
    const DistValue* left;
    const DistValue* right;
    double cost;
  };
  std::vector<Comp> comps;

  // Support pairs whose two sides fit inside the queried supports.
  std::vector<std::pair<double, VRel::Key>> eligible;
  for (const auto& [k, v] : d.entries()) {
    if (k.first >= state_dists.size() || k.second >= state_dists.size()) continue;
    if (!dist_within(state_dists[k.first], lset) || !dist_within(state_dists[k.second], rset)) continue;
    eligible.push_back({v, k});
  }
  std::sort(eligible.begin(), eligible.end());
  bool truncated = false;
  if (eligible.size() > decomposition_cap) {
    eligible.resize(decomposition_cap);
    truncated = true;
  }
  for (const auto& [v, k] : eligible)
    comps.push_back({&state_dists[k.first], &state_dists[k.second], v});

  // Point-mass pairs keep the program feasible: any pair of distributions on
  // the queried supports decomposes into a product coupling of diracs.
  std::vector<DistValue> diracs;
  diracs.reserve(lrow.size() + rrow.size());
  std::map<Index, std::size_t> dirac_at;
  for (Index x : lrow)
    if (!dirac_at.count(x)) {
      dirac_at[x] = diracs.size();
      diracs.push_back(dirac(x));
    }
  for (Index y : rrow)
    if (!dirac_at.count(y)) {
      dirac_at[y] = diracs.size();
      diracs.push_back(dirac(y));
    }
  std::map<Index, std::size_t> dirac_state;  // base point -> carrier state that is its dirac
  for (std::size_t i = 0; i < state_dists.size(); ++i)
    if (state_dists[i].mass.size() == 1 && dist_is_dirac_at(state_dists[i], state_dists[i].mass[0].first))
      dirac_state.emplace(state_dists[i].mass[0].first, i);
  for (Index x : lrow)
    for (Index y : rrow) {
      double cost = d.default_raw();
      auto ix = dirac_state.find(x);
      auto iy = dirac_state.find(y);
      if (ix != dirac_state.end() && iy != dirac_state.end())
        cost = d.at_raw(ix->second, iy->second);
      comps.push_back({&diracs[dirac_at[x]], &diracs[dirac_at[y]], cost});
    }

  // min sum(w_i cost_i) s.t. the weighted left sides reassemble delta and
  // the right sides reassemble theta.
  const std::size_t rows = lrow.size() + rrow.size();
  std::vector<std::vector<double>> a(rows, std::vector<double>(comps.size(), 0.0));
  std::vector<double> rhs(rows, 0.0), costs(comps.size());
  for (std::size_t r = 0; r < lrow.size(); ++r) rhs[r] = dl.mass[r].second;
  for (std::size_t r = 0; r < rrow.size(); ++r) rhs[lrow.size() + r] = dr.mass[r].second;
  for (std::size_t cidx = 0; cidx < comps.size(); ++cidx) {
    costs[cidx] = comps[cidx].cost;
    for (const auto& [x, p] : comps[cidx].left->mass) {
      auto it = std::find(lrow.begin(), lrow.end(), x);
      a[static_cast<std::size_t>(it - lrow.begin())][cidx] = p;
    }
    for (const auto& [y, p] : comps[cidx].right->mass) {
      auto it = std::find(rrow.begin(), rrow.end(), y);
      a[lrow.size() + static_cast<std::size_t>(it - rrow.begin())][cidx] = p;
    }
  }
  auto lp = solve_lp_eq(a, rhs, costs);
  if (!lp) throw CapError("up_cvx: decomposition program did not terminate");
  return {q.make(std::clamp(lp->objective, 0.0, 1.0)), truncated};
}

Technique tech_id(const Quantale& q) { return {identity_map(q.id()), {"identity map"}}; }

Technique tech_ref(const Quantale& q) {
  MonotoneMap m;
  m.name = "ref";
  m.quantale = q.id();
  m.at = [q](const RelLookup& lk, Index x, Index y) {
    double v = lk(x, y);
    return x == y ? q.join_raw(v, q.unit_raw()) : v;
  };
  m.query = [q](const VRel& d, Index x, Index y) {
    double v = d.at_raw(x, y);
    return x == y ? q.join_raw(v, q.unit_raw()) : v;
  };
  // Support-local: adds the diagonal only at states the support touches,
  // which under-approximates d v diag elsewhere (sound for certificates).
  m.sparse_apply = [q](const VRel& d) {
    VRel out = d;
    for (Index s : touched_states(d)) out.set_raw(s, s, q.join_raw(d.at_raw(s, s), q.unit_raw()));
    return out;
  };
  return {std::move(m), {"well-behaved lifting: reflexivity preserved"}};
}

Technique tech_sym(const Quantale& q) {
  MonotoneMap m;
  m.name = "sym";
  m.quantale = q.id();
  m.at = [q](const RelLookup& lk, Index x, Index y) { return q.join_raw(lk(x, y), lk(y, x)); };
  m.query = [q](const VRel& d, Index x, Index y) {
    return q.join_raw(d.at_raw(x, y), d.at_raw(y, x));
  };
  m.sparse_apply = [q](const VRel& d) { return up_sym(q, d); };
  return {std::move(m), {"well-behaved lifting: symmetry preserved"}};
}

Technique tech_trn(const Quantale& q) {
  MonotoneMap m;
  m.name = "trn";
  m.quantale = q.id();
  m.query = [q](const VRel& d, Index x, Index y) { return up_trn(q, d).at_raw(x, y); };
  m.sparse_apply = [q](const VRel& d) { return up_trn(q, d); };
  return {std::move(m), {"well-behaved lifting: transitivity preserved under the lax tensor"}};
}

Technique tech_mtr(const Quantale& q) {
  Technique t = combine(q, {tech_ref(q), tech_sym(q), tech_trn(q)}, CombineMode::Compose);
  t.map.name = "mtr";
  return t;
}

Technique tech_bhv(const Quantale& q, Partition equiv) {
  auto part = std::make_shared<const Partition>(std::move(equiv));
  auto classes = std::make_shared<const std::vector<std::vector<Index>>>(part->classes());
  auto fibre = [part, classes](Index x) -> std::vector<Index> {
    if (auto c = part->find(x)) return (*classes)[*c];
    return {x};
  };
  MonotoneMap m;
  m.name = "bhv";
  m.quantale = q.id();
  m.at = [q, fibre](const RelLookup& lk, Index x, Index y) {
    double acc = q.bottom_raw();
    for (Index x2 : fibre(x))
      for (Index y2 : fibre(y)) acc = q.join_raw(acc, lk(x2, y2));
    return acc;
  };
  m.query = [q, fibre](const VRel& d, Index x, Index y) {
    double acc = q.bottom_raw();
    for (Index x2 : fibre(x))
      for (Index y2 : fibre(y)) acc = q.join_raw(acc, d.at_raw(x2, y2));
    return acc;
  };
  m.sparse_apply = [q, part](const VRel& d) { return up_bhv(q, d, *part); };
  return {std::move(m), {"join over behavioural-equivalence fibres"}};
}

Technique tech_ctx_union(const Quantale& q) {
  MonotoneMap m;
  m.name = "ctx-union";
  m.quantale = q.id();
  m.query = [q](const VRel& d, Index x, Index y) { return up_ctx_union(q, d, x, y).v; };
  // Support-local image: re-values the support and the singleton diagonals
  // it touches; off-support unions are only reachable through query.
  m.sparse_apply = [q](const VRel& d) {
    VRel out(d.carrier(), d.dflt());
    std::uint64_t bits = 0;
    for (const auto& [k, v] : d.entries()) {
      out.set_raw(k.first, k.second, up_ctx_union(q, d, k.first, k.second).v);
      bits |= k.first | k.second;
    }
    for (std::uint64_t b = 0; b < 64; ++b)
      if (bits >> b & 1) {
        const Index s = Index{1} << b;
        if (s < d.carrier().size) out.set_raw(s, s, q.join_raw(out.at_raw(s, s), q.unit_raw()));
      }
    return out;
  };
  return {std::move(m), {"canonical powerset lifting with the union algebra"}};
}

Technique tech_cvx(const Quantale& q, std::vector<DistValue> state_dists,
                   std::size_t decomposition_cap) {
  auto sd = std::make_shared<const std::vector<DistValue>>(std::move(state_dists));
  MonotoneMap m;
  m.name = "cvx";
  m.quantale = q.id();
  m.query = [q, sd, decomposition_cap](const VRel& d, Index x, Index y) {
    return up_cvx(q, d, *sd, x, y, decomposition_cap).value.v;
  };
  m.sparse_apply = [q, sd, decomposition_cap](const VRel& d) {
    VRel out(d.carrier(), d.dflt());
    for (const auto& [k, v] : d.entries())
      out.set_raw(k.first, k.second, up_cvx(q, d, *sd, k.first, k.second, decomposition_cap).value.v);
    return out;
  };
  return {std::move(m), {"trace-metric settings only"}};
}

Technique combine(const Quantale& q, std::vector<Technique> ts, CombineMode mode,
                  const std::optional<EvaluationMap>& active_lifting) {
  if (ts.empty()) throw UsageError("combine: no techniques given");
  for (const Technique& t : ts)
    if (t.map.quantale != q.id()) throw UsageError("combine: technique quantale mismatch");
  if (mode == CombineMode::Chain && (!active_lifting || !active_lifting->lax_tensor))
    throw UsageError("combine: chaining requires a lifting with the lax tensor condition");
  if (ts.size() == 1) return std::move(ts[0]);

  std::vector<std::string> basis;
  bool proven = true;
  for (const Technique& t : ts) proven = proven && !t.basis.empty();
  if (proven)
    for (const Technique& t : ts)
      for (const std::string& c : t.basis)
        if (std::find(basis.begin(), basis.end(), c) == basis.end()) basis.push_back(c);

  const char* sep = mode == CombineMode::Compose ? "," : mode == CombineMode::Join ? "|" : "*";
  std::string name = ts[0].map.name;
  for (std::size_t i = 1; i < ts.size(); ++i) name += sep + ts[i].map.name;

  auto parts = std::make_shared<const std::vector<Technique>>(std::move(ts));
  MonotoneMap m;
  m.name = std::move(name);
  m.quantale = q.id();

  bool all_sparse = true, all_at = true;
  for (const Technique& t : *parts) {
    all_sparse = all_sparse && static_cast<bool>(t.map.sparse_apply);
    all_at = all_at && static_cast<bool>(t.map.at);
  }

  if (mode == CombineMode::Compose) {
    m.query = [parts](const VRel& d, Index x, Index y) {
      VRel cur = d;
      for (std::size_t i = 0; i + 1 < parts->size(); ++i) {
        const MonotoneMap& inner = (*parts)[i].map;
        if (!inner.sparse_apply)
          throw UsageError(inner.name + " cannot be materialized inside a composition");
        cur = inner.sparse_apply(cur);
      }
      return parts->back().map.query(cur, x, y);
    };
    if (all_sparse)
      m.sparse_apply = [parts](const VRel& d) {
        VRel cur = d;
        for (const Technique& t : *parts) cur = t.map.sparse_apply(cur);
        return cur;
      };
  } else {
    const bool join_mode = mode == CombineMode::Join;
    auto fold = [q, join_mode](double acc, double v) {
      return join_mode ? q.join_raw(acc, v) : q.tensor_raw(acc, v);
    };
    m.query = [parts, fold](const VRel& d, Index x, Index y) {
      double acc = (*parts)[0].map.query(d, x, y);
      for (std::size_t i = 1; i < parts->size(); ++i) acc = fold(acc, (*parts)[i].map.query(d, x, y));
      return acc;
    };
    if (all_at)
      m.at = [parts, fold](const RelLookup& lk, Index x, Index y) {
        double acc = (*parts)[0].map.at(lk, x, y);
        for (std::size_t i = 1; i < parts->size(); ++i) acc = fold(acc, (*parts)[i].map.at(lk, x, y));
        return acc;
      };
    if (all_sparse)
      m.sparse_apply = [parts, fold, q](const VRel& d) {
        std::vector<VRel> images;
        images.reserve(parts->size());
        for (const Technique& t : *parts) images.push_back(t.map.sparse_apply(d));
        double dflt = images[0].default_raw();
        std::set<VRel::Key> keys;
        for (const VRel& im : images)
          for (const auto& [k, v] : im.entries()) keys.insert(k);
        for (std::size_t i = 1; i < images.size(); ++i) dflt = fold(dflt, images[i].default_raw());
        VRel out(d.carrier(), {q.id(), dflt});
        for (const auto& [x, y] : keys) {
          double acc = images[0].at_raw(x, y);
          for (std::size_t i = 1; i < images.size(); ++i) acc = fold(acc, images[i].at_raw(x, y));
          out.set_raw(x, y, acc);
        }
        return out;
      };
  }
  return {std::move(m), std::move(basis)};
}

CheckVerdict certify(const Quantale& q, const Witness& w, const MonotoneMap& b,
                     const Technique& f, bool unsafe) {
  if (f.basis.empty() && !unsafe)
    throw UsageError("technique '" + f.map.name +
                     "' declares no soundness basis; pass unsafe to check anyway");
  return check_witness(q, w, b, f.map);
}

} // namespace quantimetric
