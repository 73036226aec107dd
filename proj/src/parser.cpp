#include <cctype>

#include "cl9/formula.hpp"

namespace cl9 {
namespace {

enum class Tok { Ident, Not, And, Or, Implies, EnvChoice, MachineChoice, EnvSeq, MachineSeq, Caret, LParen, RParen, Dot, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, {}, line, col};
    auto two = src.substr(i, 2);
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    std::size_t len = 1;
    if (two == "/\\") {
      t.kind = Tok::And, len = 2;
    } else if (two == "\\/") {
      t.kind = Tok::Or, len = 2;
    } else if (two == "->") {
      t.kind = Tok::Implies, len = 2;
    } else {
      switch (c) {
        case '~': t.kind = Tok::Not; break;
        case '&': t.kind = Tok::EnvChoice; break;
        case '+': t.kind = Tok::MachineChoice; break;
        case '#': t.kind = Tok::EnvSeq; break;
        case '@': t.kind = Tok::MachineSeq; break;
        case '^': t.kind = Tok::Caret; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case '.': t.kind = Tok::Dot; break;
        default: throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
    }
    t.text = std::string(src.substr(i, len));
    advance(len);
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, {}, line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }

  [[noreturn]] void fail(const std::string& what, const Token& t) const {
    throw ParseError(what, t.line, t.column);
  }

  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail("expected " + what + ", found " + describe(peek()), peek());
    return next();
  }

  // impl := disj ('->' impl)?
  Formula implication() {
    Formula lhs = parallel();
    if (at(Tok::Implies)) {
      next();
      Formula rhs = implication();
      return Formula::node(Op::Or, {negate(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Formula parallel() {
    return chain(Tok::And, Tok::Or, Op::And, Op::Or, [this] { return choice(); });
  }
  Formula choice() {
    return chain(Tok::EnvChoice, Tok::MachineChoice, Op::EnvChoice, Op::MachineChoice, [this] { return sequential(); });
  }
  Formula sequential() {
    return chain(Tok::EnvSeq, Tok::MachineSeq, Op::EnvSeq, Op::MachineSeq, [this] { return unary(); });
  }

  template <typename Sub>
  Formula chain(Tok a, Tok b, Op opa, Op opb, Sub sub) {
    Formula first = sub();
    if (!at(a) && !at(b)) return first;
    Tok kind = peek().kind;
    std::vector<Formula> parts;
    parts.push_back(std::move(first));
    while (at(a) || at(b)) {
      if (peek().kind != kind) fail("mixed operators " + describe(peek()) + " at one level; add parentheses", peek());
      next();
      parts.push_back(sub());
    }
    return Formula::node(kind == a ? opa : opb, std::move(parts));
  }

  Formula unary() {
    if (at(Tok::Not)) {
      next();
      return negate(unary());
    }
    return primary();
  }

  Formula primary() {
    Formula f;
    if (at(Tok::Ident)) {
      f = Formula::literal(next().text);
    } else if (at(Tok::LParen)) {
      next();
      f = implication();
      expect(Tok::RParen, "')'");
    } else {
      fail("expected a formula, found " + describe(peek()), peek());
    }
    while (at(Tok::Caret)) {
      Token caret = next();
      Token name = expect(Tok::Ident, "agent name after '^'");
      try {
        f = annotate(f, name.text);
      } catch (const Error& e) {
        fail(e.what(), caret);
      }
    }
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text) {
  Parser p(tokenize(text));
  Formula f = p.implication();
  if (!p.at(Tok::End)) p.fail("unexpected " + describe(p.peek()) + " after formula", p.peek());
  return f;
}

AgentSpec parse_agent_file(std::string_view text) {
  Parser p(tokenize(text));
  AgentSpec spec;
  const Token& head = p.peek();
  if (!(head.kind == Tok::Ident && head.text == "agent")) p.fail("agent file must start with 'agent <name>.'", head);
  p.next();
  Token first = p.expect(Tok::Ident, "agent name");
  if (p.at(Tok::Ident)) {
    Token name = p.next();
    if (first.text == "super") {
      spec.kind = AgentKind::Super;
    } else if (first.text == "neural") {
      spec.kind = AgentKind::Neural;
    } else {
      p.fail("unknown kind keyword '" + first.text + "'", first);
    }
    spec.name = name.text;
  } else {
    spec.name = first.text;
  }
  p.expect(Tok::Dot, "'.' after agent declaration");
  while (!p.at(Tok::End)) {
    const Token start = p.peek();
    if (start.kind == Tok::Ident && start.text == "agent") p.fail("duplicate agent declaration", start);
    Formula entry = p.implication();
    if (!p.at(Tok::Dot)) p.fail("formula not terminated by '.'", p.peek());
    p.next();
    if (!annotations_complete(entry))
      p.fail("knowledgebase entry has a choice, sequential or general node without an annotation", start);
    spec.kb.push_back(std::move(entry));
  }
  return spec;
}

}  // namespace cl9
