#ifndef CL9_RUNTIME_HPP
#define CL9_RUNTIME_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cl9/hyper.hpp"

namespace cl9 {

enum class Player { Machine, Environment };

inline Player opponent(Player p) { return p == Player::Machine ? Player::Environment : Player::Machine; }
std::string_view symbol(Player p);  // ⊤ / ⊥

class IllegalMove : public Error {
 public:
  using Error::Error;
};

struct Move {
  enum class Kind { Choose, Switch, Atom };

  Player player = Player::Environment;
  Path path;  // addresses a node of the original session formula
  Kind kind = Kind::Switch;
  int choice = -1;   // Choose
  std::string text;  // Atom

  bool operator==(const Move&) const = default;

  static Move choose(Player p, Path path, int i) { return {p, std::move(path), Kind::Choose, i, {}}; }
  static Move switch_at(Player p, Path path) { return {p, std::move(path), Kind::Switch, -1, {}}; }
  static Move atom(Player p, Path path, std::string text) { return {p, std::move(path), Kind::Atom, -1, std::move(text)}; }
};

/// `⊤|⊥ <path> choose:<i>|switch|atom:<text>`
std::string render_move(const Move& move);
/// Payload part only: `choose:<i>|switch|atom:<text>`.
std::string render_payload(const Move& move);
Move parse_move(std::string_view text);  // throws Error
void parse_payload(std::string_view text, Move& into);

using AtomRun = std::vector<std::pair<Player, std::string>>;

struct NodeStatus {
  int chosen = -1;   // choice nodes
  int leading = 0;   // sequential nodes
  int catchup = 0;   // sequential nodes
  AtomRun atom_run;  // general literals
};

struct Interpretation {
  std::map<std::string, bool> valuation;  // missing atoms are false
  /// Winner of the game a general atom stands for, given its local run.
  std::function<Player(const std::string& atom, const AtomRun& run)> oracle;

  static Interpretation constant(Player verdict);
};

/// Evolution of one session formula. Moves never rewrite the tree; they
/// update per-node status, so every path keeps addressing the same node.
class GameState {
 public:
  GameState() = default;
  explicit GameState(HyperFormula original);

  const HyperFormula& original() const { return original_; }
  const std::vector<Move>& run() const { return run_; }

  bool legal(const Move& move, std::string* why = nullptr) const;
  void apply(const Move& move);  // throws IllegalMove

  const NodeStatus& status(const Path& path) const;
  /// Index of the component currently played at a sequential node.
  int active_component(const Path& path) const;
  int leader_slack(const Path& path) const;

  /// The hyperformula the session currently stands at: resolved choices
  /// replaced by their chosen component, underlines at active components.
  HyperFormula view() const;
  /// nullopt when the node lies in a discarded choice branch or inside a
  /// resolved choice node itself.
  std::optional<Path> to_view(const Path& original) const;
  Path to_original(const Path& view) const;

  void finish() { finished_ = true; }
  bool finished() const { return finished_; }

 private:
  HyperFormula view_of(const Formula& node, Path& path) const;

  HyperFormula original_;
  std::map<Path, NodeStatus> status_;
  std::vector<Move> run_;
  bool finished_ = false;
};

/// Every legal move for `player` in the current position; atom moves use
/// each of `atom_texts`.
std::vector<Move> legal_moves(const GameState& state, Player player, const std::vector<std::string>& atom_texts = {"a"});

Player winner(const GameState& state, const Interpretation& interp);  // throws Error unless finished

/// Environment moves in either occurrence not yet copied by the machine into
/// the other one.
int mirror_deficit(const GameState& state, const Path& first, const Path& second);

}  // namespace cl9

#endif  // CL9_RUNTIME_HPP
