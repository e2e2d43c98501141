#include "quantimetric/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "quantimetric/errors.hpp"
#include "quantimetric/fixpoint.hpp"
#include "quantimetric/flift.hpp"
#include "quantimetric/oracles.hpp"
#include "quantimetric/serialize.hpp"
#include "quantimetric/systems.hpp"
#include "quantimetric/upto.hpp"

namespace quantimetric {

namespace {

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return Json::parse(in);
}

const Json& jfield(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw UsageError(std::string("missing field '") + key + "'");
  return *it;
}

std::vector<std::string> split_states(const std::string& arg) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : arg) {
    if (ch == ',' || ch == '+') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  if (out.empty()) throw UsageError("empty state set argument");
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

std::string fmt_ms(double ms) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << ms;
  return s.str();
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

EvaluationMap lifting_for(const RunConfig& cfg, std::uint32_t alphabet_size) {
  if (cfg.quantale == QuantaleId::Bool2) return machine_canonical(alphabet_size);
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) throw UsageError("discount c must be in (0,1)");
  return machine_discount(alphabet_size, cfg.c);
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const CapError& e) {
    err << e.what() << "\n";
    return kExitCap;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
}

Technique technique_by_name(const std::string& name, const Quantale& q, const Nfa& nfa,
                            const Witness& w, std::size_t cap) {
  if (name == "id") return tech_id(q);
  if (name == "ref") return tech_ref(q);
  if (name == "sym") return tech_sym(q);
  if (name == "trn") return tech_trn(q);
  if (name == "mtr") return tech_mtr(q);
  if (name == "ctx-union") return tech_ctx_union(q);
  if (name == "bhv") {
    std::set<Index> relevant{w.claim_left, w.claim_right};
    for (const auto& [k, v] : w.rel.entries()) {
      relevant.insert(k.first);
      relevant.insert(k.second);
    }
    const std::vector<Index> elems(relevant.begin(), relevant.end());
    return tech_bhv(q, lang_equiv_partition(nfa, elems, cap));
  }
  if (name == "cvx")
    throw UsageError("cvx applies to distribution carriers, not determinized automata");
  throw UsageError("unknown up-to technique '" + name + "'");
}

Technique compose_upto(const RunConfig& cfg, const Quantale& q, const Nfa& nfa, const Witness& w,
                       const EvaluationMap& ev) {
  if (cfg.upto.empty()) return tech_id(q);
  std::vector<Technique> ts;
  ts.reserve(cfg.upto.size());
  for (const std::string& name : cfg.upto)
    ts.push_back(technique_by_name(name, q, nfa, w, cfg.cap));
  return combine(q, std::move(ts), CombineMode::Compose, ev);
}

} // namespace

std::size_t default_cap(std::size_t fallback) {
  const char* env = std::getenv("QUANTIMETRIC_CAP");
  if (!env) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) return fallback;
  return static_cast<std::size_t>(v);
}

int cmd_distance(const std::string& automaton_path, const std::string& left,
                 const std::string& right, const RunConfig& cfg, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&]() -> int {
    const Nfa nfa = nfa_from_json(load_json(automaton_path));
    const Index l = subset_of_labels(nfa, split_states(left));
    const Index r = subset_of_labels(nfa, split_states(right));
    const Quantale q{cfg.quantale};
    const EvaluationMap ev = lifting_for(cfg, static_cast<std::uint32_t>(nfa.alphabet.size()));
    const MachineCoalgebra coalg = determinize(nfa);
    std::vector<std::pair<Index, Index>> pairs;
    try {
      pairs = reachable_pairs(nfa, l, r, cfg.cap);
    } catch (const CapError& e) {
      err << e.what() << "; try check-witness with a certificate instead\n";
      return kExitCap;
    }
    const MonotoneMap b = build_b(q, ev, coalg);
    const GfpResult res = gfp(q, b, coalg.carrier, pairs, {cfg.tol, cfg.max_iter});
    const double v = res.rel.at_raw(l, r);
    if (cfg.json) {
      out << Json{{"distance", v},
                  {"iterations", res.iterations},
                  {"pairs", res.pair_count},
                  {"converged", res.converged}}
                 .dump()
          << "\n";
    } else {
      out << "distance " << fmt(v) << "\n";
      out << "iterations " << res.iterations << "\n";
      out << "pairs " << res.pair_count << "\n";
    }
    if (!res.converged) err << "iteration budget exhausted before convergence\n";
    return kExitOk;
  });
}

int cmd_check_witness(const std::string& automaton_path, const std::string& witness_path,
                      const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const Nfa nfa = nfa_from_json(load_json(automaton_path));
    const WitnessFile wf = witness_from_json(load_json(witness_path), nfa);
    RunConfig eff = cfg;  // the witness file pins the quantale and discount
    eff.quantale = wf.quantale;
    eff.c = wf.c;
    const Quantale q{eff.quantale};
    const EvaluationMap ev = lifting_for(eff, static_cast<std::uint32_t>(nfa.alphabet.size()));
    const MonotoneMap b = build_b(q, ev, determinize(nfa));
    const Technique f = compose_upto(eff, q, nfa, wf.witness, ev);
    const CheckVerdict v = certify(q, wf.witness, b, f, cfg.unsafe);
    if (cfg.json) {
      Json o{{"certified", v.certified},
             {"inequality_holds", v.inequality_holds},
             {"claim_met", v.claim_met},
             {"pairs_checked", v.pairs_checked},
             {"technique", f.map.name}};
      if (v.counterexample) {
        const CheckCounterexample& ce = *v.counterexample;
        Json frontier = Json::array();
        for (const auto& [sx, sy, fv] : ce.frontier)
          frontier.push_back({{"left", subset_name(nfa, sx)},
                              {"right", subset_name(nfa, sy)},
                              {"value", fv}});
        o["counterexample"] = {{"left", subset_name(nfa, ce.x)},
                               {"right", subset_name(nfa, ce.y)},
                               {"d", ce.lhs},
                               {"step", ce.rhs},
                               {"frontier", frontier}};
      }
      out << o.dump() << "\n";
      return v.certified ? kExitOk : kExitRefuted;
    }
    if (v.certified) {
      out << "certified: distance(" << subset_name(nfa, wf.witness.claim_left) << ", "
          << subset_name(nfa, wf.witness.claim_right) << ") bounded by " << fmt(wf.witness.bound.v)
          << "\n";
      out << "pairs checked " << v.pairs_checked << "\n";
      out << "technique " << f.map.name << "\n";
      return kExitOk;
    }
    out << "refuted\n";
    if (v.counterexample) {
      const CheckCounterexample& ce = *v.counterexample;
      out << "inequality fails at (" << subset_name(nfa, ce.x) << ", " << subset_name(nfa, ce.y)
          << "): d = " << fmt(ce.lhs) << ", one-step value = " << fmt(ce.rhs) << "\n";
      for (const auto& [sx, sy, fv] : ce.frontier)
        out << "  successor (" << subset_name(nfa, sx) << ", " << subset_name(nfa, sy)
            << ") carries " << fmt(fv) << "\n";
    }
    if (!v.claim_met) out << "claimed bound exceeds the witness value at the claim pair\n";
    return kExitRefuted;
  });
}

int cmd_oracle(const std::string& automaton_path, const std::string& left,
               const std::string& right, const RunConfig& cfg, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&]() -> int {
    const Nfa nfa = nfa_from_json(load_json(automaton_path));
    const Index l = subset_of_labels(nfa, split_states(left));
    const Index r = subset_of_labels(nfa, split_states(right));
    const auto word = shortest_distinguishing_word(nfa, l, r, cfg.cap);
    if (cfg.json) {
      Json o{{"equivalent", !word.has_value()}};
      if (word) {
        o["length"] = word->size();
        Json letters = Json::array();
        for (std::uint32_t a : *word) letters.push_back(nfa.alphabet[a]);
        o["word"] = letters;
      }
      out << o.dump() << "\n";
      return kExitOk;
    }
    if (!word) {
      out << "equivalent\n";
      return kExitOk;
    }
    out << "length " << word->size() << "\n";
    if (!word->empty()) {
      out << "word";
      for (std::uint32_t a : *word) out << " " << nfa.alphabet[a];
      out << "\n";
    }
    return kExitOk;
  });
}

int cmd_bench(std::uint32_t n_from, std::uint32_t n_to, const RunConfig& cfg, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (n_from < 1 || n_to < n_from) throw UsageError("bench needs 1 <= from <= to");
    if (cfg.quantale != QuantaleId::UnitIntervalRev)
      throw UsageError("bench runs on the unit-rev quantale");
    if (!cfg.json) out << "n,naive_pairs,naive_time,upto_pairs,upto_time,distance\n";
    for (std::uint32_t n = n_from; n <= n_to; ++n) {
      const Nfa nfa = gen_twin_chains(n);
      const Quantale q{cfg.quantale};
      const EvaluationMap ev = lifting_for(cfg, 2);
      const MachineCoalgebra coalg = determinize(nfa);
      const MonotoneMap b = build_b(q, ev, coalg);
      const Index l = Index{1};
      const Index r = Index{1} << (n + 1);

      bool capped = false;
      std::size_t naive_pairs = 0;
      double distance = 0.0;
      bool have_distance = false;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto pairs = reachable_pairs(nfa, l, r, cfg.cap);
        naive_pairs = pairs.size();
        const GfpResult res = gfp(q, b, coalg.carrier, pairs, {cfg.tol, cfg.max_iter});
        distance = res.rel.at_raw(l, r);
        have_distance = true;
      } catch (const CapError&) {
        capped = true;
      }
      const double naive_ms = ms_since(t0);

      const Witness w = twin_chains_witness(n, cfg.c);
      const auto t1 = std::chrono::steady_clock::now();
      const Technique f = combine(q, {tech_ref(q), tech_ctx_union(q)}, CombineMode::Compose, ev);
      const CheckVerdict v = certify(q, w, b, f);
      const double upto_ms = ms_since(t1);
      if (!v.certified) err << "witness certification unexpectedly failed at n = " << n << "\n";
      const double dist_cell = have_distance ? distance : w.bound.v;

      if (cfg.json) {
        Json row{{"n", n},
                 {"upto_pairs", v.pairs_checked},
                 {"upto_time", upto_ms},
                 {"distance", dist_cell}};
        if (capped) {
          row["naive_pairs"] = "cap";
          row["naive_time"] = "cap";
        } else {
          row["naive_pairs"] = naive_pairs;
          row["naive_time"] = naive_ms;
        }
        out << row.dump() << "\n";
      } else {
        out << n << ",";
        if (capped)
          out << "cap,cap,";
        else
          out << naive_pairs << "," << fmt_ms(naive_ms) << ",";
        out << v.pairs_checked << "," << fmt_ms(upto_ms) << "," << fmt(dist_cell) << "\n";
      }
    }
    return kExitOk;
  });
}

namespace {

EvaluationMap demo_lifting(const std::string& kind, const Json& j, const FunctorValue& left,
                           const Quantale& q, const RunConfig& cfg) {
  const FunctorTag tag = std::holds_alternative<PowValue>(left)    ? FunctorTag::Pow
                         : std::holds_alternative<MachineValue>(left) ? FunctorTag::Machine
                                                                      : FunctorTag::Dist;
  const std::uint32_t alphabet =
      tag == FunctorTag::Machine
          ? static_cast<std::uint32_t>(std::get<MachineValue>(left).succ.size())
          : 0;
  if (kind == "canonical") {
    switch (tag) {
      case FunctorTag::Pow: return pow_canonical();
      case FunctorTag::Machine: return machine_canonical(alphabet);
      case FunctorTag::Dist: return dist_canonical();
    }
  }
  if (auto it = j.find("eval"); it != j.end()) {
    const std::string name = it->get<std::string>();
    if (name == "pow-canonical") return pow_canonical();
    if (name == "bool-diamond") return bool_diamond();
    if (name == "dist-expectation") return dist_expectation();
    if (name == "dist-canonical") return dist_canonical();
    if (name == "machine-canonical") return machine_canonical(alphabet);
    if (name == "machine-discount") return machine_discount(alphabet, cfg.c);
    throw UsageError("unknown evaluation map '" + name + "'");
  }
  switch (tag) {
    case FunctorTag::Pow: return pow_canonical();
    case FunctorTag::Machine:
      return q.id() == QuantaleId::Bool2 ? machine_canonical(alphabet)
                                         : machine_discount(alphabet, cfg.c);
    case FunctorTag::Dist:
      return q.id() == QuantaleId::UnitIntervalRev ? dist_expectation() : dist_canonical();
  }
  throw UsageError("unrecognised functor value");
}

} // namespace

int cmd_lift_demo(const std::string& kind, const std::string& inputs_path, const RunConfig& cfg,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (kind != "hausdorff" && kind != "wasserstein" && kind != "canonical")
      throw UsageError("unknown lift kind '" + kind + "' (hausdorff | wasserstein | canonical)");
    const Json j = load_json(inputs_path);
    QuantaleId qid = cfg.quantale;
    if (auto it = j.find("quantale"); it != j.end()) {
      const auto parsed = quantale_from_string(it->get<std::string>());
      if (!parsed) throw UsageError("unknown quantale '" + it->get<std::string>() + "'");
      qid = *parsed;
    }
    const Quantale q{qid};

    const std::uint64_t size = jfield(j, "carrier").get<std::uint64_t>();
    if (size == 0) throw UsageError("carrier must be nonempty");
    Carrier carrier{size, {}};
    double dflt = q.bottom_raw();
    if (auto it = j.find("default"); it != j.end()) dflt = q.make(it->get<double>()).v;
    VRel rel(carrier, q.make(dflt));
    for (const Json& e : jfield(j, "entries")) {
      if (!e.is_array() || e.size() != 3) throw UsageError("each entry must be [x, y, value]");
      const Index x = e[0].get<Index>(), y = e[1].get<Index>();
      if (x >= size || y >= size) throw UsageError("relation entry outside the carrier");
      rel.set_raw(x, y, q.make(e[2].get<double>()).v);
    }
    const FunctorValue left = functor_value_from_json(jfield(j, "left"));
    const FunctorValue right = functor_value_from_json(jfield(j, "right"));

    double lifted = 0.0;
    std::string lifting_name;
    std::optional<double> oracle_value;
    if (kind == "hausdorff") {
      const auto* pl = std::get_if<PowValue>(&left);
      const auto* pr = std::get_if<PowValue>(&right);
      if (!pl || !pr) throw UsageError("hausdorff needs powerset values");
      lifted = hausdorff(q, rel, *pl, *pr).v;
      lifting_name = "hausdorff";
      if (cfg.oracle) oracle_value = pow_lift_bruteforce(q, pow_canonical(), rel, *pl, *pr).v;
    } else {
      const EvaluationMap ev = demo_lifting(kind, j, left, q, cfg);
      CouplingOptions copt;
      lifted = wasserstein(q, ev, rel, left, right, copt).v;
      lifting_name = ev.name();
      if (cfg.oracle) {
        if (const auto* pl = std::get_if<PowValue>(&left)) {
          oracle_value = pow_lift_bruteforce(q, ev, rel, *pl, std::get<PowValue>(right)).v;
        } else if (const auto* dl = std::get_if<DistValue>(&left)) {
          const auto& dr = std::get<DistValue>(right);
          oracle_value = ev.kind == EvalKind::DistExpectation
                             ? dist_expectation_oracle(rel, *dl, dr)
                             : dist_bottleneck_oracle(rel, *dl, dr);
        } else {
          throw UsageError("no independent oracle for machine values");
        }
      }
    }

    if (cfg.json) {
      Json o{{"lifting", lifting_name}, {"lifted", lifted}};
      if (oracle_value) o["oracle"] = *oracle_value;
      out << o.dump() << "\n";
    } else {
      out << "lifting " << lifting_name << "\n";
      out << "lifted " << fmt(lifted) << "\n";
      if (oracle_value) out << "oracle " << fmt(*oracle_value) << "\n";
    }
    return kExitOk;
  });
}

} // namespace quantimetric
