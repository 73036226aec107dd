#include "cl9/formula.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace cl9 {

std::string render_path(const Path& path) {
  if (path.empty()) return ".";
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out;
}

Path parse_path(std::string_view text) {
  if (text == ".") return {};
  Path path;
  std::size_t pos = 0;
  while (true) {
    std::size_t dot = text.find('.', pos);
    std::string_view part = text.substr(pos, dot == std::string_view::npos ? text.npos : dot - pos);
    int value = -1;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() || value < 0)
      throw Error("malformed path '" + std::string(text) + "'");
    path.push_back(value);
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return path;
}

bool is_general_name(std::string_view name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name.front()));
}

bool is_identifier(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

Formula Formula::literal(std::string atom, bool negated, std::string env) {
  Formula f;
  f.op = Op::Literal;
  f.atom = std::move(atom);
  f.negated = negated;
  f.env = std::move(env);
  return f;
}

Formula Formula::constant(bool top) {
  Formula f;
  f.op = top ? Op::Top : Op::Bottom;
  return f;
}

Formula Formula::node(Op op, std::vector<Formula> children, std::string env) {
  Formula f;
  f.op = op;
  f.children = std::move(children);
  if (f.carries_env()) f.env = std::move(env);
  return f;
}

const Formula& Formula::at(const Path& path) const {
  const Formula* cur = this;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= cur->children.size())
      throw Error("path " + render_path(path) + " does not address a node");
    cur = &cur->children[i];
  }
  return *cur;
}

Formula& Formula::at(const Path& path) {
  return const_cast<Formula&>(static_cast<const Formula&>(*this).at(path));
}

bool Formula::valid_path(const Path& path) const {
  const Formula* cur = this;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= cur->children.size()) return false;
    cur = &cur->children[i];
  }
  return true;
}

std::size_t Formula::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Regular: return "regular";
    case AgentKind::Super: return "super";
    case AgentKind::Neural: return "neural";
  }
  return "regular";
}

static Op dual(Op op) {
  switch (op) {
    case Op::Top: return Op::Bottom;
    case Op::Bottom: return Op::Top;
    case Op::And: return Op::Or;
    case Op::Or: return Op::And;
    case Op::EnvChoice: return Op::MachineChoice;
    case Op::MachineChoice: return Op::EnvChoice;
    case Op::EnvSeq: return Op::MachineSeq;
    case Op::MachineSeq: return Op::EnvSeq;
    case Op::Literal: return Op::Literal;
  }
  return op;
}

Formula negate(const Formula& f) {
  Formula out = f;
  out.op = dual(f.op);
  if (f.op == Op::Literal) out.negated = !f.negated;
  for (auto& c : out.children) c = negate(c);
  return out;
}

Formula skeleton(const Formula& f) {
  Formula out = f;
  out.env.clear();
  for (auto& c : out.children) c = skeleton(c);
  return out;
}

Formula annotate(const Formula& f, const std::string& env) {
  Formula out = f;
  if (out.carries_env()) {
    if (out.env.empty()) {
      out.env = env;
    } else if (out.env != env) {
      throw Error("env-switching annotation: ^" + out.env + " inside ^" + env);
    }
  }
  for (auto& c : out.children) c = annotate(c, env);
  return out;
}

Formula compile_query(const std::vector<Formula>& kb, const Formula& query) {
  if (kb.empty()) return query;
  std::vector<Formula> parts;
  parts.reserve(kb.size() + 1);
  for (const auto& entry : kb) parts.push_back(negate(entry));
  parts.push_back(query);
  return Formula::node(Op::Or, std::move(parts));
}

static void collect_atoms(const Formula& f, std::set<std::string>* elem, std::set<std::string>* gen) {
  if (f.op == Op::Literal) {
    if (is_general_name(f.atom)) {
      if (gen) gen->insert(f.atom);
    } else if (elem) {
      elem->insert(f.atom);
    }
    if (!f.witness.empty() && elem) elem->insert(f.witness);
  }
  for (const auto& c : f.children) collect_atoms(c, elem, gen);
}

std::set<std::string> elementary_atoms(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, &out, nullptr);
  return out;
}

std::set<std::string> general_atoms(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, nullptr, &out);
  return out;
}

std::set<std::string> all_atoms(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, &out, &out);
  return out;
}

bool annotations_complete(const Formula& f) {
  bool needs = is_choice(f.op) || is_sequential(f.op) || f.is_general();
  if (needs && f.env.empty()) return false;
  for (const auto& c : f.children)
    if (!annotations_complete(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int level(Op op) {
  if (is_sequential(op)) return 1;
  if (is_choice(op)) return 2;
  if (is_parallel(op)) return 3;
  return 0;
}

const char* symbol(Op op) {
  switch (op) {
    case Op::And: return " /\\ ";
    case Op::Or: return " \\/ ";
    case Op::EnvChoice: return " & ";
    case Op::MachineChoice: return " + ";
    case Op::EnvSeq: return " # ";
    case Op::MachineSeq: return " @ ";
    default: return " ? ";
  }
}

// Nonempty when every env-carrying node in the subtree has the same env.
std::string uniform_env(const Formula& f) {
  std::string found;
  bool mixed = false;
  auto visit = [&](auto&& self, const Formula& n) -> void {
    if (mixed) return;
    if (n.carries_env()) {
      if (n.env.empty() || (!found.empty() && n.env != found)) {
        mixed = true;
        return;
      }
      found = n.env;
    }
    for (const auto& c : n.children) self(self, c);
  };
  visit(visit, f);
  return mixed ? std::string() : found;
}

class Printer {
 public:
  explicit Printer(bool debug) : debug_(debug) {}

  std::string print(const Formula& f, const std::string& inherited) const {
    std::string env = uniform_env(f);
    if (!env.empty() && env != inherited) {
      std::string inner = body(f, env);
      if (f.op == Op::Literal || is_const(f.op)) return inner + "^" + env;
      return "(" + inner + ")^" + env;
    }
    return body(f, inherited);
  }

 private:
  std::string body(const Formula& f, const std::string& env) const {
    switch (f.op) {
      case Op::Top: return "⊤";
      case Op::Bottom: return "⊥";
      case Op::Literal: {
        std::string s = f.negated ? "~" : "";
        s += f.atom;
        if (debug_ && !f.witness.empty()) s += "_" + f.witness;
        return s;
      }
      default: break;
    }
    std::string out;
    for (std::size_t i = 0; i < f.children.size(); ++i) {
      if (i) out += symbol(f.op);
      const Formula& c = f.children[i];
      std::string part = print(c, env);
      std::string child_env = uniform_env(c);
      bool wrapped = !child_env.empty() && child_env != env;
      if (!wrapped && c.op != Op::Literal && !is_const(c.op) && level(c.op) >= level(f.op))
        part = "(" + part + ")";
      if (debug_ && is_sequential(f.op) && static_cast<int>(i) == f.underline) part = "[" + part + "]";
      out += part;
    }
    return out;
  }

  bool debug_;
};

}  // namespace

std::string pretty(const Formula& f) { return Printer(false).print(f, {}); }

std::string render_debug(const Formula& f) { return Printer(true).print(f, {}); }

}  // namespace cl9
