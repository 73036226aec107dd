// Shared helpers for the test binaries: brute-force oracles, random
// generators and the regression corpus.
#ifndef CL9_TESTS_SUPPORT_HPP
#define CL9_TESTS_SUPPORT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cl9/executor.hpp"
#include "cl9/message.hpp"

namespace testing {

using cl9::Formula;
using cl9::Op;

// Classical value of the position a hyperformula describes: sequential
// nodes are read at their underline, surface choices are decided for the
// player who has not moved yet, unmatched general literals are lost.
inline bool classical_value(const Formula& f, const std::map<std::string, bool>& v) {
  switch (f.op) {
    case Op::Top: return true;
    case Op::Bottom: return false;
    case Op::Literal: {
      if (cl9::is_general_name(f.atom) && f.witness.empty()) return false;
      const std::string& name = f.witness.empty() ? f.atom : f.witness;
      auto it = v.find(name);
      return (it != v.end() && it->second) != f.negated;
    }
    case Op::And:
      for (const auto& c : f.children)
        if (!classical_value(c, v)) return false;
      return true;
    case Op::Or:
      for (const auto& c : f.children)
        if (classical_value(c, v)) return true;
      return false;
    case Op::EnvChoice: return true;
    case Op::MachineChoice: return false;
    case Op::EnvSeq:
    case Op::MachineSeq: return classical_value(f.children.at(f.underline), v);
  }
  return false;
}

inline void collect_names(const Formula& f, std::set<std::string>& out) {
  if (f.op == Op::Literal) {
    if (!f.witness.empty()) out.insert(f.witness);
    else if (!cl9::is_general_name(f.atom)) out.insert(f.atom);
  }
  for (const auto& c : f.children) collect_names(c, out);
}

// Enumerates every valuation of the elementary names in `f`.
inline bool truth_table_stable(const Formula& f) {
  std::set<std::string> names;
  collect_names(f, names);
  std::vector<std::string> list(names.begin(), names.end());
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << list.size()); ++bits) {
    std::map<std::string, bool> v;
    for (std::size_t i = 0; i < list.size(); ++i) v[list[i]] = (bits >> i) & 1;
    if (!classical_value(f, v)) return false;
  }
  return true;
}

// Random hyperformula over at most `max_names` elementary names (atoms
// plus hybrid witnesses).
class HyperGen {
 public:
  explicit HyperGen(std::uint64_t seed, int max_names = 12) : rng_(seed), max_names_(max_names) {}

  Formula next() {
    used_.clear();
    return make(static_cast<int>(pick(1, 4)));
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::uint64_t pick(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }

  // A fresh name with `prefix`, or an existing one once the budget is spent.
  std::string name(char prefix) {
    if (static_cast<int>(used_.size()) >= max_names_ || (!used_.empty() && pick(0, 2) == 0)) {
      std::vector<std::string> same;
      for (const auto& n : used_)
        if (n[0] == prefix) same.push_back(n);
      if (!same.empty()) return same[pick(0, same.size() - 1)];
      if (static_cast<int>(used_.size()) >= max_names_) return {};
    }
    std::string fresh = prefix + std::to_string(pick(0, 40));
    used_.insert(fresh);
    return fresh;
  }

  Formula leaf() {
    switch (pick(0, 9)) {
      case 0: return Formula::constant(pick(0, 1) == 1);
      case 1:
      case 2: return Formula::literal("P" + std::to_string(pick(0, 2)), pick(0, 1) == 1);
      case 3:
      case 4: {
        Formula h = Formula::literal("P" + std::to_string(pick(0, 2)), pick(0, 1) == 1);
        h.witness = name('q');
        if (h.witness.empty()) h.witness = name('p');
        return h;
      }
      default: {
        std::string atom = name('p');
        if (atom.empty()) atom = name('q');
        return Formula::literal(atom, pick(0, 1) == 1);
      }
    }
  }

  Formula make(int depth) {
    if (depth == 0 || pick(0, 4) == 0) return leaf();
    static const Op ops[] = {Op::And, Op::Or, Op::EnvChoice, Op::MachineChoice, Op::EnvSeq, Op::MachineSeq};
    Op op = ops[pick(0, 5)];
    std::vector<Formula> kids;
    int n = static_cast<int>(pick(2, 3));
    for (int i = 0; i < n; ++i) kids.push_back(make(depth - 1));
    Formula f = Formula::node(op, std::move(kids));
    if (cl9::is_sequential(op)) f.underline = static_cast<int>(pick(0, n - 1));
    return f;
  }

  std::mt19937_64 rng_;
  int max_names_;
  std::set<std::string> used_;
};

// Formulas the prover must establish; used by the soundness properties.
inline const std::vector<std::string>& provable_corpus() {
  static const std::vector<std::string> corpus = {
      "p -> p",
      "P -> P",
      "~P \\/ P",
      "(p & q) -> (p & q)",
      "(b0 # b1 # b2)^u -> (b0 # b1 # b2)^w",
      "(P & Q) -> (P & Q)",
      "(P + Q) -> (P + Q)",
      "(P /\\ Q) -> (Q /\\ P)",
      "(P # Q) -> (P # Q)",
      "(P @ Q) -> (P @ Q)",
      "(p + q) -> (q + p)",
      "(P & p) -> (p + P)",
      "b0 -> (b0 @ b1)",
      "(P /\\ Q) -> P",
      "((P & Q) /\\ R) -> (R /\\ (Q & P))",
  };
  return corpus;
}

// Interpretation under which both occurrences of a hybrid pair consult
// one oracle: the verdict depends on the atom and its run, so mirrored
// runs of P and ¬P get opposite winners.
inline cl9::Interpretation shared_oracle(std::uint64_t seed, const cl9::Formula& f) {
  cl9::Interpretation interp;
  std::mt19937_64 rng(seed);
  for (const auto& a : cl9::elementary_atoms(f)) interp.valuation[a] = rng() & 1;
  interp.oracle = [seed](const std::string& atom, const cl9::AtomRun& run) {
    std::string key = atom;
    for (const auto& [who, text] : run) key += (who == cl9::Player::Machine ? "|m:" : "|e:") + text;
    std::uint64_t h = std::hash<std::string>{}(key) ^ (seed * 0x9e3779b97f4a7c15ULL);
    return (h >> 7) & 1 ? cl9::Player::Machine : cl9::Player::Environment;
  };
  return interp;
}

// Environment driver making up to `limit` uniformly chosen legal moves and
// sometimes stopping early.
inline cl9::EnvironmentDriver random_driver(std::uint64_t seed, int limit = 20) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  auto made = std::make_shared<int>(0);
  return [rng, made, limit](const cl9::Session& s) -> std::optional<cl9::Move> {
    if (*made >= limit) return std::nullopt;
    auto moves = cl9::legal_moves(s.state, cl9::Player::Environment, {"a", "b"});
    if (moves.empty() || std::uniform_int_distribution<int>(0, 9)(*rng) == 0) return std::nullopt;
    ++*made;
    return moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(*rng)];
  };
}

// Random hybrid-free formula up to `depth`, optionally annotated as a whole.
inline Formula random_formula(std::mt19937_64& rng, int depth, bool annotated = false) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::function<Formula(int)> make = [&](int d) -> Formula {
    if (d == 0 || pick(0, 3) == 0) {
      bool general = pick(0, 3) == 0;
      return Formula::literal((general ? "P" : "p") + std::to_string(pick(0, 3)), pick(0, 1) == 1);
    }
    static const Op ops[] = {Op::And, Op::Or, Op::EnvChoice, Op::MachineChoice, Op::EnvSeq, Op::MachineSeq};
    std::vector<Formula> kids;
    for (int n = pick(2, 3); n > 0; --n) kids.push_back(make(d - 1));
    return Formula::node(ops[pick(0, 5)], std::move(kids));
  };
  Formula f = make(depth);
  return annotated ? cl9::annotate(f, "w" + std::to_string(pick(0, 2))) : f;
}

// Random well-formed wire message between agents of `pool`.
inline cl9::Message random_message(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::string from = pool[pick(pool.size())];
  std::string to = pool[pick(pool.size())];
  while (to == from) to = pool[pick(pool.size())];
  std::string session = cl9::make_session_id(pick(2) ? from : to, pick(1000) + 1);
  switch (pick(5)) {
    case 0: {
      HyperGen gen(rng());
      return cl9::Message::query(session, from, to, cl9::pretty(cl9::dehybridize(gen.next())));
    }
    case 1: {
      cl9::Path path;
      for (std::size_t d = pick(4); d > 0; --d) path.push_back(static_cast<int>(pick(5)));
      cl9::Player who = pick(2) ? cl9::Player::Machine : cl9::Player::Environment;
      cl9::Move mv;
      switch (pick(3)) {
        case 0: mv = cl9::Move::choose(who, path, static_cast<int>(pick(4))); break;
        case 1: mv = cl9::Move::switch_at(who, path); break;
        default: {
          static const std::string alphabet = "abcxyz019_-.:#";
          std::string text;
          for (std::size_t n = pick(8) + 1; n > 0; --n) text += alphabet[pick(alphabet.size())];
          mv = cl9::Move::atom(who, path, text);
        }
      }
      return cl9::Message::move_msg(session, from, to, mv);
    }
    case 2: return cl9::Message::ok(session, from, to);
    case 3: {
      static const std::vector<std::string> reasons = {"unprovable", "timeout", "unknown-agent", "illegal-move"};
      return cl9::Message::fail(session, from, to, reasons[pick(reasons.size())]);
    }
    default: return cl9::Message::done(session, from, to);
  }
}

}  // namespace testing

#endif  // CL9_TESTS_SUPPORT_HPP
