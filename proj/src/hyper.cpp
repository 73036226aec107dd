#include "cl9/hyper.hpp"

#include <map>
#include <optional>

namespace cl9 {

namespace filter {
bool literals(const Formula& f) { return f.op == Op::Literal; }
bool general_literals(const Formula& f) { return f.is_general() && !f.is_hybrid(); }
bool hybrid_literals(const Formula& f) { return f.is_hybrid(); }
bool choices(const Formula& f) { return is_choice(f.op); }
bool env_choices(const Formula& f) { return f.op == Op::EnvChoice; }
bool machine_choices(const Formula& f) { return f.op == Op::MachineChoice; }
bool sequentials(const Formula& f) { return is_sequential(f.op); }
bool env_seqs(const Formula& f) { return f.op == Op::EnvSeq; }
bool machine_seqs(const Formula& f) { return f.op == Op::MachineSeq; }
}  // namespace filter

HyperFormula to_hyper(const Formula& f) {
  HyperFormula h = f;
  h.underline = 0;
  h.witness.clear();
  for (auto& c : h.children) c = to_hyper(c);
  return h;
}

Formula dehybridize(const HyperFormula& h) {
  Formula f = h;
  f.witness.clear();
  for (auto& c : f.children) c = dehybridize(c);
  return f;
}

namespace {

struct Context {
  bool inside_choice = false;
  bool left = false;   // inside a component left of an underline
  bool right = false;  // inside a component right of an underline
};

Occurrence make_occurrence(const Path& path, const Context& ctx) {
  Occurrence o;
  o.path = path;
  o.surface = !ctx.inside_choice && !ctx.right;
  o.activity = ctx.left ? Activity::Abandoned : ctx.right ? Activity::Pending : Activity::Active;
  return o;
}

void walk(const HyperFormula& h, Path& path, Context ctx, const NodeFilter& select, std::vector<Occurrence>& out) {
  if (select(h)) out.push_back(make_occurrence(path, ctx));
  for (std::size_t i = 0; i < h.children.size(); ++i) {
    Context sub = ctx;
    if (is_choice(h.op)) sub.inside_choice = true;
    if (is_sequential(h.op)) {
      if (static_cast<int>(i) < h.underline) sub.left = true;
      if (static_cast<int>(i) > h.underline) sub.right = true;
    }
    path.push_back(static_cast<int>(i));
    walk(h.children[i], path, sub, select, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<Occurrence> occurrences(const HyperFormula& h, const NodeFilter& select) {
  std::vector<Occurrence> out;
  Path path;
  walk(h, path, {}, select, out);
  return out;
}

Occurrence classify(const HyperFormula& h, const Path& path) {
  Context ctx;
  const Formula* cur = &h;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= cur->children.size())
      throw Error("path " + render_path(path) + " does not address a node");
    if (is_choice(cur->op)) ctx.inside_choice = true;
    if (is_sequential(cur->op)) {
      if (i < cur->underline) ctx.left = true;
      if (i > cur->underline) ctx.right = true;
    }
    cur = &cur->children[i];
  }
  return make_occurrence(path, ctx);
}

Formula capitalization(const HyperFormula& h) {
  if (is_sequential(h.op)) return capitalization(h.children.at(h.underline));
  Formula f = h;
  for (auto& c : f.children) c = capitalization(c);
  return f;
}

namespace {

ElementaryFormula elementarize_capitalized(const Formula& f) {
  switch (f.op) {
    case Op::EnvChoice: return Formula::constant(true);
    case Op::MachineChoice: return Formula::constant(false);
    case Op::Top:
    case Op::Bottom: return Formula::constant(f.op == Op::Top);
    case Op::Literal:
      if (f.is_hybrid()) return Formula::literal(f.witness, f.negated);
      if (f.is_general()) return Formula::constant(false);
      return Formula::literal(f.atom, f.negated);
    default: break;
  }
  std::vector<Formula> parts;
  parts.reserve(f.children.size());
  for (const auto& c : f.children) parts.push_back(elementarize_capitalized(c));
  return Formula::node(f.op, std::move(parts));
}

// Constant folding under a partial valuation.
Formula simplify(const Formula& f, const std::map<std::string, bool>& val) {
  if (f.op == Op::Literal) {
    auto it = val.find(f.atom);
    if (it == val.end()) return f;
    return Formula::constant(it->second != f.negated);
  }
  if (is_const(f.op)) return f;
  bool is_and = f.op == Op::And;
  std::vector<Formula> kept;
  for (const auto& c : f.children) {
    Formula s = simplify(c, val);
    if (is_const(s.op)) {
      bool top = s.op == Op::Top;
      if (top != is_and) return s;  // absorbing element
      continue;                      // neutral element
    }
    kept.push_back(std::move(s));
  }
  if (kept.empty()) return Formula::constant(is_and);
  if (kept.size() == 1) return std::move(kept.front());
  return Formula::node(f.op, std::move(kept));
}

// Literals that must hold (value false) for f to be false: everything reachable
// from the root through disjunctions. Returns false on a contradiction.
bool forced_false(const Formula& f, std::map<std::string, bool>& forced) {
  if (f.op == Op::Literal) {
    bool value = f.negated;  // the atom value that makes the literal false
    auto [it, inserted] = forced.emplace(f.atom, value);
    return inserted || it->second == value;
  }
  if (f.op == Op::Or) {
    for (const auto& c : f.children)
      if (!forced_false(c, forced)) return false;
  }
  return true;
}

const Formula* first_literal(const Formula& f) {
  if (f.op == Op::Literal) return &f;
  for (const auto& c : f.children)
    if (const Formula* l = first_literal(c)) return l;
  return nullptr;
}

bool tautology(const Formula& e, std::map<std::string, bool>& val) {
  Formula f = simplify(e, val);
  if (f.op == Op::Top) return true;
  if (f.op == Op::Bottom) return false;
  std::map<std::string, bool> forced;
  if (!forced_false(f, forced)) return true;  // no falsifying assignment on this branch
  if (!forced.empty()) {
    auto saved = val;
    val.insert(forced.begin(), forced.end());
    bool r = tautology(f, val);
    val = std::move(saved);
    return r;
  }
  const std::string atom = first_literal(f)->atom;
  for (bool v : {false, true}) {
    val[atom] = v;
    bool r = tautology(f, val);
    val.erase(atom);
    if (!r) return false;
  }
  return true;
}

}  // namespace

ElementaryFormula elementarization(const HyperFormula& h) { return elementarize_capitalized(capitalization(h)); }

bool is_tautology(const ElementaryFormula& e) {
  std::map<std::string, bool> val;
  return tautology(e, val);
}

bool is_stable(const HyperFormula& h) { return is_tautology(elementarization(h)); }

bool is_balanced(const HyperFormula& h) {
  auto hybrids = occurrences(h, filter::hybrid_literals);
  if (hybrids.empty()) return true;
  std::map<std::string, std::vector<Occurrence>> by_witness;
  for (auto& o : hybrids) by_witness[h.at(o.path).witness].push_back(o);
  std::set<std::string> plain_elementary;
  for (const auto& o : occurrences(h, filter::literals)) {
    const Formula& lit = h.at(o.path);
    if (!lit.is_general()) plain_elementary.insert(lit.atom);
  }
  for (const auto& [witness, occs] : by_witness) {
    if (occs.size() != 2) return false;
    const Formula& a = h.at(occs[0].path);
    const Formula& b = h.at(occs[1].path);
    if (a.atom != b.atom || a.negated == b.negated) return false;
    if (!occs[0].surface || !occs[1].surface) return false;
    if (plain_elementary.count(witness)) return false;
  }
  return true;
}

Path hybrid_twin(const HyperFormula& h, const Path& path) {
  const Formula& lit = h.at(path);
  if (!lit.is_hybrid()) throw Error("no hybrid literal at " + render_path(path));
  for (const auto& o : occurrences(h, filter::hybrid_literals)) {
    if (o.path == path) continue;
    const Formula& other = h.at(o.path);
    if (other.witness == lit.witness && other.atom == lit.atom) return o.path;
  }
  throw Error("hybrid literal at " + render_path(path) + " has no twin");
}

bool widowed(const HyperFormula& h, const Path& path) {
  Occurrence occ = classify(h, path);
  if (occ.activity != Activity::Active) throw Error("hybrid occurrence at " + render_path(path) + " is not active");
  Path twin = hybrid_twin(h, path);
  return classify(h, twin).activity == Activity::Abandoned;
}

namespace {

void require_active_surface(const HyperFormula& h, const Path& path, const char* what) {
  if (!h.valid_path(path)) throw Error("path " + render_path(path) + " does not address a node");
  if (!classify(h, path).active_surface())
    throw Error(std::string(what) + " at " + render_path(path) + " is not an active surface occurrence");
}

HyperFormula select_component(const HyperFormula& h, const Path& path, int i, Op op, const char* what) {
  require_active_surface(h, path, what);
  const Formula& node = h.at(path);
  if (node.op != op) throw Error("no " + std::string(what) + " at " + render_path(path));
  if (i < 0 || static_cast<std::size_t>(i) >= node.children.size())
    throw Error("component " + std::to_string(i) + " out of range at " + render_path(path));
  HyperFormula out = h;
  Formula picked = node.children[i];
  out.at(path) = std::move(picked);
  return out;
}

}  // namespace

HyperFormula apply_choose(const HyperFormula& h, const Path& path, int i) {
  return select_component(h, path, i, Op::MachineChoice, "⊔");
}

HyperFormula apply_env_choice(const HyperFormula& h, const Path& path, int i) {
  return select_component(h, path, i, Op::EnvChoice, "⊓");
}

HyperFormula advance_underline(const HyperFormula& h, const Path& path) {
  require_active_surface(h, path, "chain");
  const Formula& node = h.at(path);
  if (!is_sequential(node.op)) throw Error("no sequential node at " + render_path(path));
  if (node.underline + 1 >= static_cast<int>(node.children.size()))
    throw Error("underline already on the last component at " + render_path(path));
  HyperFormula out = h;
  out.at(path).underline += 1;
  return out;
}

HyperFormula hybridize(const HyperFormula& h, const Path& pos, const Path& neg, const std::string& fresh) {
  require_active_surface(h, pos, "literal");
  require_active_surface(h, neg, "literal");
  const Formula& p = h.at(pos);
  const Formula& n = h.at(neg);
  if (!filter::general_literals(p) || !filter::general_literals(n) || p.atom != n.atom || p.negated ||
      !n.negated)
    throw Error("Match needs a non-negated and a negated occurrence of one general atom");
  if (is_general_name(fresh) || !is_identifier(fresh)) throw Error("'" + fresh + "' is not an elementary atom name");
  if (all_atoms(h).count(fresh)) throw Error("atom '" + fresh + "' already occurs in the formula");
  HyperFormula out = h;
  out.at(pos).witness = fresh;
  out.at(neg).witness = fresh;
  return out;
}

}  // namespace cl9
