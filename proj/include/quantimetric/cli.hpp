#ifndef QUANTIMETRIC_CLI_HPP
#define QUANTIMETRIC_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "quantimetric/quantale.hpp"

namespace quantimetric {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;        // computed / certified / equivalent
inline constexpr int kExitRefuted = 1;   // witness check failed
inline constexpr int kExitCap = 2;       // an enumeration cap was hit
inline constexpr int kExitUsage = 64;    // bad flags or malformed input files

struct RunConfig {
  QuantaleId quantale = QuantaleId::UnitIntervalRev;
  double c = 0.5;               // machine lifting discount, in (0,1)
  double tol = 1e-9;
  std::size_t max_iter = 100'000;
  std::vector<std::string> upto;  // technique names, composed innermost-first
  std::size_t cap = 1'000'000;
  bool json = false;
  bool oracle = false;
  bool unsafe = false;  // allow techniques with no declared soundness basis
};

// Default for --cap: the QUANTIMETRIC_CAP environment variable when set and
// parseable, otherwise `fallback`. An explicit --cap always wins.
std::size_t default_cap(std::size_t fallback);

// Each command reads files itself, writes results to `out` and diagnostics
// to `err`, and returns one of the exit codes above; nothing throws across
// this boundary. State arguments name subsets: labels joined by ',' or '+'.

// Exact behavioural distance between two subset states via determinization
// and fixpoint iteration over the product-reachable pairs.
int cmd_distance(const std::string& automaton_path, const std::string& left,
                 const std::string& right, const RunConfig& cfg, std::ostream& out,
                 std::ostream& err);

// Certifies or refutes a witness file against the automaton, composing the
// techniques named in cfg.upto. The quantale and discount stored in the
// witness file take precedence over the flags.
int cmd_check_witness(const std::string& automaton_path, const std::string& witness_path,
                      const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Shortest distinguishing word between two subset states, or "equivalent".
int cmd_oracle(const std::string& automaton_path, const std::string& left,
               const std::string& right, const RunConfig& cfg, std::ostream& out,
               std::ostream& err);

// CSV rows comparing the naive fixpoint run against witness certification on
// the twin chain family: n,naive_pairs,naive_time,upto_pairs,upto_time,distance.
// Cells the cap prevented are printed as "cap"; times are milliseconds.
int cmd_bench(std::uint32_t n_from, std::uint32_t n_to, const RunConfig& cfg, std::ostream& out,
              std::ostream& err);

// Prints a lifted value for a small relation and two functor values loaded
// from a JSON file; --oracle adds the brute-force reference path.
// Kinds: hausdorff | wasserstein | canonical.
int cmd_lift_demo(const std::string& kind, const std::string& inputs_path, const RunConfig& cfg,
                  std::ostream& out, std::ostream& err);

} // namespace quantimetric

#endif
