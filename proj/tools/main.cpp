#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "quantimetric/cli.hpp"
#include "quantimetric/quantale.hpp"

using namespace quantimetric;

namespace {

std::vector<std::string> split_commas(const std::string& arg) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : arg) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavioural distances between states of finite transition systems"};
  app.require_subcommand(1);
  app.fallthrough();  // lets the global flags appear after the subcommand too

  RunConfig cfg;
  cfg.cap = default_cap(cfg.cap);
  std::string quantale_name = "unit-rev";
  std::string upto_arg;

  app.add_option("--quantale", quantale_name, "bool2 | unit-rev | ext-rev")
      ->capture_default_str();
  app.add_option("--c", cfg.c, "discount in (0,1) for real-valued quantales")
      ->capture_default_str();
  app.add_option("--tol", cfg.tol, "fixpoint convergence tolerance")->capture_default_str();
  app.add_option("--max-iter", cfg.max_iter, "fixpoint iteration budget")->capture_default_str();
  app.add_option("--upto", upto_arg,
                 "comma-separated up-to techniques, composed left to right "
                 "(id, ref, sym, trn, mtr, bhv, ctx-union)");
  app.add_option("--cap", cfg.cap, "enumeration cap (QUANTIMETRIC_CAP sets the default)")
      ->capture_default_str();
  app.add_flag("--json", cfg.json, "machine-readable one-line JSON output");
  app.add_flag("--oracle", cfg.oracle, "also run the brute-force reference path");
  app.add_flag("--unsafe", cfg.unsafe, "allow techniques with no declared soundness basis");

  std::string automaton, witness, left, right, lift_kind, inputs;
  std::uint32_t n_from = 1, n_to = 8;

  CLI::App* dist = app.add_subcommand("distance", "behavioural distance between subset states");
  dist->add_option("automaton", automaton, "automaton JSON file")->required();
  dist->add_option("left", left, "subset state, labels joined by , or +")->required();
  dist->add_option("right", right, "subset state, labels joined by , or +")->required();

  CLI::App* cw = app.add_subcommand("check-witness", "certify a distance bound from a witness");
  cw->add_option("automaton", automaton, "automaton JSON file")->required();
  cw->add_option("witness", witness, "witness JSON file")->required();

  CLI::App* orc = app.add_subcommand("oracle", "shortest distinguishing word between subset states");
  orc->add_option("automaton", automaton, "automaton JSON file")->required();
  orc->add_option("left", left, "subset state")->required();
  orc->add_option("right", right, "subset state")->required();

  CLI::App* bench =
      app.add_subcommand("bench", "naive fixpoint vs certification on the twin chain family");
  bench->add_option("--from", n_from, "first chain length")->capture_default_str();
  bench->add_option("--to", n_to, "last chain length")->capture_default_str();

  CLI::App* demo = app.add_subcommand("lift-demo", "print one lifted value from an inputs file");
  demo->add_option("kind", lift_kind, "hausdorff | wasserstein | canonical")->required();
  demo->add_option("inputs", inputs, "inputs JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto qid = quantale_from_string(quantale_name);
  if (!qid) {
    std::cerr << "unknown quantale '" << quantale_name << "'\n";
    return kExitUsage;
  }
  cfg.quantale = *qid;
  cfg.upto = split_commas(upto_arg);
  // Name check up front; whether a technique fits the carrier is decided where it is built.
  static const std::set<std::string> known_upto = {"id",  "ref", "sym",       "trn",
                                                   "mtr", "bhv", "ctx-union", "cvx"};
  for (const std::string& name : cfg.upto) {
    if (!known_upto.count(name)) {
      std::cerr << "unknown up-to technique '" << name << "'\n";
      return kExitUsage;
    }
  }

  if (dist->parsed()) return cmd_distance(automaton, left, right, cfg, std::cout, std::cerr);
  if (cw->parsed()) return cmd_check_witness(automaton, witness, cfg, std::cout, std::cerr);
  if (orc->parsed()) return cmd_oracle(automaton, left, right, cfg, std::cout, std::cerr);
  if (bench->parsed()) return cmd_bench(n_from, n_to, cfg, std::cout, std::cerr);
  if (demo->parsed()) return cmd_lift_demo(lift_kind, inputs, cfg, std::cout, std::cerr);
  return kExitUsage;
}
