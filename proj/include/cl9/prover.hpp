#ifndef CL9_PROVER_HPP
#define CL9_PROVER_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cl9/hyper.hpp"

namespace cl9 {

enum class Rule { Wait, Choose, Switch, Match };

std::string_view to_string(Rule rule);
Rule parse_rule(std::string_view name);  // throws Error

struct Proof;
using ProofPtr = std::shared_ptr<const Proof>;

/// One derivation step, read from conclusion to premises. Subproofs may be
/// shared between Wait branches; the tree view expands them.
struct Proof {
  HyperFormula conclusion;
  Rule rule = Rule::Wait;
  Path path;           // Choose: the ⊔ node; Switch: the ▽ node; Match: positive literal
  int choice = -1;     // Choose
  Path negative_path;  // Match
  std::string fresh;   // Match: elementary component of the new hybrid
  std::vector<ProofPtr> premises;
};

struct ProveOptions {
  std::uint64_t budget = 2'000'000;  // search nodes expanded before giving up
};

struct ProveResult {
  enum class Status { Proved, Unprovable, Timeout };
  Status status = Status::Unprovable;
  ProofPtr proof;  // set when Proved
  std::uint64_t steps = 0;

  bool proved() const { return status == Status::Proved; }
};

/// Premises of a Wait step (order-normalized, duplicates removed).
std::vector<HyperFormula> wait_premises(const HyperFormula& h);

ProveResult prove(const Formula& goal, const ProveOptions& options = {});
ProveResult prove_hyper(const HyperFormula& goal, const ProveOptions& options = {});

bool verify(const Proof& proof);

/// Count of general literals + choice nodes + remaining underline slack.
/// Every rule application decreases it.
std::size_t termination_measure(const HyperFormula& h);

std::size_t proof_size(const Proof& proof);
std::map<Rule, int> rule_counts(const Proof& proof);
/// One node per line: `<indent>Rule @path [detail] conclusion`.
std::string serialize(const Proof& proof);

// Derivations in the underline-free calculus, as numbered lines.
struct PlainLine {
  Formula formula;
  Rule rule = Rule::Wait;
  std::vector<int> premises;  // 0-based indices of earlier lines
};

bool verify_plain(const std::vector<PlainLine>& lines);
/// Lines `<n>. <formula> : <Rule> {<n>,...}` with 1-based line numbers; `%` comments.
std::vector<PlainLine> parse_plain_derivation(std::string_view text);

}  // namespace cl9

#endif  // CL9_PROVER_HPP
