#ifndef CL9_FORMULA_HPP
#define CL9_FORMULA_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cl9 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class Op : std::uint8_t {
  Literal,
  Top,
  Bottom,
  And,
  Or,
  EnvChoice,      // ⊓, `&`
  MachineChoice,  // ⊔, `+`
  EnvSeq,         // △, `#`  (environment makes the leading switches)
  MachineSeq,     // ▽, `@`  (machine makes the leading switches)
};

inline bool is_parallel(Op op) { return op == Op::And || op == Op::Or; }
inline bool is_choice(Op op) { return op == Op::EnvChoice || op == Op::MachineChoice; }
inline bool is_sequential(Op op) { return op == Op::EnvSeq || op == Op::MachineSeq; }
inline bool is_const(Op op) { return op == Op::Top || op == Op::Bottom; }

/// Child-index sequence from the root.
using Path = std::vector<int>;

std::string render_path(const Path& path);  // "1.0.2", root is "."
Path parse_path(std::string_view text);      // throws Error

/// Identifiers that start with an uppercase letter name general atoms.
bool is_general_name(std::string_view name);
bool is_identifier(std::string_view name);

/// Negation-normal-form syntax tree.
///
/// The same node type carries hyperformula markers: `underline` on
/// sequential nodes and `witness` (the elementary component) on hybrid
/// literals. A plain formula is a hyperformula whose chains are
/// head-underlined and which has no hybrids.
struct Formula {
  Op op = Op::Top;
  std::string atom;     // literals
  bool negated = false;  // literals
  std::string witness;  // hybrid literals: elementary component
  std::string env;      // matching environment, empty when unannotated
  int underline = 0;    // sequential nodes
  std::vector<Formula> children;

  bool operator==(const Formula&) const = default;

  static Formula literal(std::string atom, bool negated = false, std::string env = {});
  static Formula constant(bool top);
  static Formula node(Op op, std::vector<Formula> children, std::string env = {});

  bool is_literal() const { return op == Op::Literal; }
  bool is_general() const { return op == Op::Literal && is_general_name(atom); }
  bool is_hybrid() const { return op == Op::Literal && !witness.empty(); }
  /// Literal, choice and sequential nodes carry an environment.
  bool carries_env() const { return op == Op::Literal || is_choice(op) || is_sequential(op); }

  const Formula& at(const Path& path) const;  // throws Error on a bad path
  Formula& at(const Path& path);
  bool valid_path(const Path& path) const;
  std::size_t size() const;  // node count
};

enum class AgentKind { Regular, Super, Neural };

std::string_view to_string(AgentKind kind);

struct AgentSpec {
  std::string name;
  AgentKind kind = AgentKind::Regular;
  std::vector<Formula> kb;
};

Formula parse_formula(std::string_view text);
AgentSpec parse_agent_file(std::string_view text);

/// ASCII concrete syntax; parse_formula(pretty(f)) == f for parser-shaped f.
std::string pretty(const Formula& f);
/// Underlines as brackets (`b0 # [b1] # b2`), hybrids as `P_q`, constants as ⊤/⊥.
std::string render_debug(const Formula& f);

Formula negate(const Formula& f);
Formula skeleton(const Formula& f);
/// Distribute an annotation over every env-carrying node; throws Error if a
/// node already carries a different environment.
Formula annotate(const Formula& f, const std::string& env);
/// NNF of (kb[0] /\ ... /\ kb[k-1]) -> query.
Formula compile_query(const std::vector<Formula>& kb, const Formula& query);

/// Elementary atoms plus witness names.
std::set<std::string> elementary_atoms(const Formula& f);
std::set<std::string> general_atoms(const Formula& f);
std::set<std::string> all_atoms(const Formula& f);

/// Every choice node, sequential node and general literal carries an environment.
bool annotations_complete(const Formula& f);

}  // namespace cl9

#endif  // CL9_FORMULA_HPP
