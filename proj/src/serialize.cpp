#include "quantimetric/serialize.hpp"

#include <algorithm>

#include "quantimetric/errors.hpp"

namespace quantimetric {

namespace {

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw UsageError(std::string("missing field '") + key + "'");
  return *it;
}

std::vector<std::string> string_list(const Json& j, const char* what) {
  if (!j.is_array()) throw UsageError(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const Json& e : j) {
    if (!e.is_string()) throw UsageError(std::string(what) + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::string> labels_of_subset(const Nfa& nfa, Index subset) {
  std::vector<std::string> out;
  for (std::uint32_t s = 0; s < nfa.states; ++s)
    if (subset >> s & 1) out.push_back(nfa.labels[s]);
  return out;
}

} // namespace

Nfa nfa_from_json(const Json& j) {
  if (!j.is_object()) throw UsageError("automaton file must be a JSON object");
  Nfa nfa;
  const Json& st = field(j, "states");
  if (st.is_number_unsigned()) {
    const std::uint64_t n = st.get<std::uint64_t>();
    if (n == 0 || n > 64) throw UsageError("automaton needs 1 to 64 states");
    nfa.states = static_cast<std::uint32_t>(n);
    for (std::uint32_t s = 0; s < nfa.states; ++s) nfa.labels.push_back("s" + std::to_string(s));
  } else {
    nfa.labels = string_list(st, "states");
    if (nfa.labels.empty() || nfa.labels.size() > 64)
      throw UsageError("automaton needs 1 to 64 states");
    nfa.states = static_cast<std::uint32_t>(nfa.labels.size());
  }
  nfa.alphabet = string_list(field(j, "alphabet"), "alphabet");
  nfa.delta.assign(std::size_t{nfa.states} * nfa.alphabet.size(), 0);

  auto state_bit = [&](const std::string& name) {
    auto s = nfa.state_of_label(name);
    if (!s) throw UsageError("unknown state label '" + name + "'");
    return std::uint64_t{1} << *s;
  };
  for (const std::string& name : string_list(field(j, "finals"), "finals"))
    nfa.finals |= state_bit(name);

  const Json& trans = field(j, "transitions");
  if (!trans.is_array()) throw UsageError("transitions must be an array");
  for (const Json& t : trans) {
    if (!t.is_object()) throw UsageError("each transition must be an object");
    const std::string from = field(t, "from").get<std::string>();
    const std::string letter = field(t, "letter").get<std::string>();
    auto s = nfa.state_of_label(from);
    if (!s) throw UsageError("unknown state label '" + from + "'");
    auto l = std::find(nfa.alphabet.begin(), nfa.alphabet.end(), letter);
    if (l == nfa.alphabet.end()) throw UsageError("unknown letter '" + letter + "'");
    std::uint64_t to = 0;
    for (const std::string& name : string_list(field(t, "to"), "transition targets"))
      to |= state_bit(name);
    nfa.delta[std::size_t{*s} * nfa.alphabet.size() +
              static_cast<std::size_t>(l - nfa.alphabet.begin())] |= to;
  }
  validate(nfa);
  return nfa;
}

Json nfa_to_json(const Nfa& nfa) {
  Json j;
  j["states"] = nfa.labels;
  j["alphabet"] = nfa.alphabet;
  j["finals"] = labels_of_subset(nfa, nfa.finals);
  Json trans = Json::array();
  for (std::uint32_t s = 0; s < nfa.states; ++s)
    for (std::size_t l = 0; l < nfa.alphabet.size(); ++l) {
      const std::uint64_t to = nfa.delta[std::size_t{s} * nfa.alphabet.size() + l];
      if (to == 0) continue;
      trans.push_back({{"from", nfa.labels[s]},
                       {"letter", nfa.alphabet[l]},
                       {"to", labels_of_subset(nfa, to)}});
    }
  j["transitions"] = trans;
  return j;
}

VRel vrel_from_json(const Json& j, const Nfa& nfa, QuantaleId quantale) {
  const Quantale q{quantale};
  double dflt = q.bottom_raw();
  if (auto it = j.find("default"); it != j.end()) {
    if (!it->is_number()) throw UsageError("default must be a number");
    dflt = q.make(it->get<double>()).v;
  }
  VRel rel(subset_carrier(nfa.states), q.make(dflt));
  const Json& entries = field(j, "entries");
  if (!entries.is_array()) throw UsageError("entries must be an array");
  for (const Json& e : entries) {
    if (!e.is_array() || e.size() != 3 || !e[2].is_number())
      throw UsageError("each entry must be [[labels], [labels], value]");
    const auto left = string_list(e[0], "entry left side");
    const auto right = string_list(e[1], "entry right side");
    rel.set_raw(subset_of_labels(nfa, left), subset_of_labels(nfa, right),
                q.make(e[2].get<double>()).v);
  }
  return rel;
}

Json vrel_to_json(const VRel& r, const Nfa& nfa) {
  Json j;
  j["default"] = r.default_raw();
  Json entries = Json::array();
  for (const auto& [k, v] : r.entries())
    entries.push_back(
        Json::array({labels_of_subset(nfa, k.first), labels_of_subset(nfa, k.second), v}));
  j["entries"] = entries;
  return j;
}

WitnessFile witness_from_json(const Json& j, const Nfa& nfa) {
  if (!j.is_object()) throw UsageError("witness file must be a JSON object");
  WitnessFile wf;
  if (auto it = j.find("quantale"); it != j.end()) {
    const auto qid = quantale_from_string(it->get<std::string>());
    if (!qid) throw UsageError("unknown quantale '" + it->get<std::string>() + "'");
    wf.quantale = *qid;
  }
  if (auto it = j.find("c"); it != j.end()) {
    if (!it->is_number()) throw UsageError("c must be a number");
    wf.c = it->get<double>();
  }
  const Quantale q{wf.quantale};
  wf.witness.rel = vrel_from_json(j, nfa, wf.quantale);
  const Json& claim = field(j, "claim");
  wf.witness.claim_left = subset_of_labels(nfa, string_list(field(claim, "left"), "claim left"));
  wf.witness.claim_right =
      subset_of_labels(nfa, string_list(field(claim, "right"), "claim right"));
  const Json& bound = field(claim, "bound");
  if (!bound.is_number()) throw UsageError("claim bound must be a number");
  wf.witness.bound = q.make(bound.get<double>());
  return wf;
}

Json witness_to_json(const WitnessFile& wf, const Nfa& nfa) {
  Json j = vrel_to_json(wf.witness.rel, nfa);
  j["quantale"] = to_string(wf.quantale);
  j["c"] = wf.c;
  j["claim"] = {{"left", labels_of_subset(nfa, wf.witness.claim_left)},
                {"right", labels_of_subset(nfa, wf.witness.claim_right)},
                {"bound", wf.witness.bound.v}};
  return j;
}

FunctorValue functor_value_from_json(const Json& j) {
  if (!j.is_object() || j.size() != 1)
    throw UsageError("functor value must be an object with one of pow/machine/dist");
  if (auto it = j.find("pow"); it != j.end()) {
    if (!it->is_array()) throw UsageError("pow value must be an array of indices");
    return make_pow(it->get<std::vector<Index>>());
  }
  if (auto it = j.find("machine"); it != j.end()) {
    MachineValue v;
    v.accept = field(*it, "accept").get<bool>();
    v.succ = field(*it, "succ").get<std::vector<Index>>();
    return v;
  }
  if (auto it = j.find("dist"); it != j.end()) {
    if (!it->is_array()) throw UsageError("dist value must be an array of [index, mass]");
    std::vector<std::pair<Index, double>> mass;
    for (const Json& e : *it) {
      if (!e.is_array() || e.size() != 2)
        throw UsageError("dist value must be an array of [index, mass]");
      mass.push_back({e[0].get<Index>(), e[1].get<double>()});
    }
    return make_dist(std::move(mass));
  }
  throw UsageError("functor value must be an object with one of pow/machine/dist");
}

Json functor_value_to_json(const FunctorValue& v) {
  Json j;
  if (const auto* p = std::get_if<PowValue>(&v)) {
    j["pow"] = p->elems;
  } else if (const auto* m = std::get_if<MachineValue>(&v)) {
    j["machine"] = {{"accept", m->accept}, {"succ", m->succ}};
  } else {
    const auto& d = std::get<DistValue>(v);
    Json mass = Json::array();
    for (const auto& [x, p] : d.mass) mass.push_back(Json::array({x, p}));
    j["dist"] = mass;
  }
  return j;
}

} // namespace quantimetric
