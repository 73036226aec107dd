// Checker for derivations in the underline-free calculus: heads play the
// role of underlined components, and Wait/Switch drop chain heads.

#include <algorithm>
#include <sstream>

#include "cl9/prover.hpp"

namespace cl9 {
namespace {

// Surface: outside every choice node and inside chain heads only.
std::vector<Path> plain_surface(const Formula& f, const NodeFilter& select) {
  std::vector<Path> out;
  for (const auto& o : occurrences(to_hyper(f), select))
    if (o.active_surface()) out.push_back(o.path);
  return out;
}

Formula tail_of(const Formula& chain) {
  if (chain.children.size() == 2) return chain.children[1];
  Formula t = chain;
  t.children.erase(t.children.begin());
  t.underline = 0;
  return t;
}

Formula replaced(const Formula& f, const Path& path, Formula with) {
  Formula out = f;
  out.at(path) = std::move(with);
  return out;
}

std::vector<Formula> plain_wait_premises(const Formula& f) {
  std::vector<Formula> out;
  for (const auto& p : plain_surface(f, filter::env_choices))
    for (const auto& c : f.at(p).children) out.push_back(replaced(f, p, c));
  for (const auto& p : plain_surface(f, filter::env_seqs)) out.push_back(replaced(f, p, tail_of(f.at(p))));
  return out;
}

bool plain_match(const Formula& f, const Formula& h) {
  auto generals = plain_surface(f, filter::general_literals);
  auto atoms = all_atoms(f);
  for (const auto& pos : generals) {
    const Formula& pl = f.at(pos);
    if (pl.negated) continue;
    for (const auto& neg : generals) {
      const Formula& nl = f.at(neg);
      if (!nl.negated || nl.atom != pl.atom) continue;
      if (!h.valid_path(pos)) continue;
      const Formula& witness = h.at(pos);
      if (witness.op != Op::Literal || witness.is_general() || witness.negated || atoms.count(witness.atom)) continue;
      Formula a = pl, b = nl;
      a.atom = witness.atom;
      b.atom = witness.atom;
      if (replaced(replaced(f, pos, a), neg, b) == h) return true;
    }
  }
  return false;
}

bool line_ok(const std::vector<PlainLine>& lines, std::size_t index) {
  const PlainLine& line = lines[index];
  for (int p : line.premises)
    if (p < 0 || static_cast<std::size_t>(p) >= index) return false;
  std::vector<Formula> cited;
  for (int p : line.premises) cited.push_back(lines[p].formula);
  const Formula& f = line.formula;
  switch (line.rule) {
    case Rule::Wait: {
      if (!is_stable(to_hyper(f))) return false;
      auto want = plain_wait_premises(f);
      auto key = [](std::vector<Formula> v) {
        std::vector<std::string> k;
        for (auto& x : v) k.push_back(render_debug(x));
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end()), k.end());
        return k;
      };
      return key(want) == key(cited);
    }
    case Rule::Choose:
      if (cited.size() != 1) return false;
      for (const auto& p : plain_surface(f, filter::machine_choices))
        for (const auto& c : f.at(p).children)
          if (replaced(f, p, c) == cited[0]) return true;
      return false;
    case Rule::Switch:
      if (cited.size() != 1) return false;
      for (const auto& p : plain_surface(f, filter::machine_seqs))
        if (replaced(f, p, tail_of(f.at(p))) == cited[0]) return true;
      return false;
    case Rule::Match:
      return cited.size() == 1 && plain_match(f, cited[0]);
  }
  return false;
}

}  // namespace

bool verify_plain(const std::vector<PlainLine>& lines) {
  if (lines.empty()) return false;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (!line_ok(lines, i)) return false;
  return true;
}

std::vector<PlainLine> parse_plain_derivation(std::string_view text) {
  std::vector<PlainLine> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto c = raw.find('%'); c != std::string::npos) raw.erase(c);
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& what) -> void { throw ParseError(what, lineno, 1); };
    auto dot = raw.find('.');
    auto colon = raw.rfind(" : ");
    if (dot == std::string::npos || colon == std::string::npos || colon < dot) fail("expected '<n>. <formula> : <Rule> {...}'");
    int number = std::stoi(raw.substr(0, dot));
    if (number != static_cast<int>(out.size()) + 1) fail("lines must be numbered consecutively from 1");
    PlainLine line;
    line.formula = parse_formula(raw.substr(dot + 1, colon - dot - 1));
    std::string rest = raw.substr(colon + 3);
    auto brace = rest.find('{');
    auto close = rest.find('}');
    if (brace == std::string::npos || close == std::string::npos || close < brace) fail("missing premise list");
    std::string rule = rest.substr(0, brace);
    rule.erase(rule.find_last_not_of(" \t") + 1);
    line.rule = parse_rule(rule);
    std::istringstream refs(rest.substr(brace + 1, close - brace - 1));
    std::string ref;
    while (std::getline(refs, ref, ',')) {
      if (ref.find_first_not_of(" \t") == std::string::npos) continue;
      line.premises.push_back(std::stoi(ref) - 1);
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace cl9
