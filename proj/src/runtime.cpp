#include "cl9/runtime.hpp"

#include <charconv>

namespace cl9 {

std::string_view symbol(Player p) { return p == Player::Machine ? "⊤" : "⊥"; }

std::string render_payload(const Move& move) {
  switch (move.kind) {
    case Move::Kind::Choose: return "choose:" + std::to_string(move.choice);
    case Move::Kind::Switch: return "switch";
    case Move::Kind::Atom: return "atom:" + move.text;
  }
  return "switch";
}

std::string render_move(const Move& move) {
  return std::string(symbol(move.player)) + " " + render_path(move.path) + " " + render_payload(move);
}

void parse_payload(std::string_view text, Move& into) {
  if (text == "switch") {
    into.kind = Move::Kind::Switch;
    return;
  }
  if (text.starts_with("choose:")) {
    auto digits = text.substr(7);
    int i = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || i < 0)
      throw Error("malformed choice payload '" + std::string(text) + "'");
    into.kind = Move::Kind::Choose;
    into.choice = i;
    return;
  }
  if (text.starts_with("atom:") && text.size() > 5) {
    into.kind = Move::Kind::Atom;
    into.text = std::string(text.substr(5));
    if (into.text.find_first_of(" \t\r\n") != std::string::npos) throw Error("atom move text contains whitespace");
    return;
  }
  throw Error("malformed move payload '" + std::string(text) + "'");
}

Move parse_move(std::string_view text) {
  auto sp1 = text.find(' ');
  auto sp2 = sp1 == text.npos ? text.npos : text.find(' ', sp1 + 1);
  if (sp2 == text.npos) throw Error("move needs '<player> <path> <payload>'");
  Move m;
  auto who = text.substr(0, sp1);
  if (who == "⊤") {
    m.player = Player::Machine;
  } else if (who == "⊥") {
    m.player = Player::Environment;
  } else {
    throw Error("unknown player '" + std::string(who) + "'");
  }
  m.path = parse_path(text.substr(sp1 + 1, sp2 - sp1 - 1));
  parse_payload(text.substr(sp2 + 1), m);
  return m;
}

Interpretation Interpretation::constant(Player verdict) {
  Interpretation i;
  i.oracle = [verdict](const std::string&, const AtomRun&) { return verdict; };
  return i;
}

GameState::GameState(HyperFormula original) : original_(std::move(original)) {}

const NodeStatus& GameState::status(const Path& path) const {
  static const NodeStatus empty;
  auto it = status_.find(path);
  return it == status_.end() ? empty : it->second;
}

int GameState::active_component(const Path& path) const {
  return original_.at(path).underline + status(path).leading;
}

int GameState::leader_slack(const Path& path) const {
  return static_cast<int>(original_.at(path).children.size()) - 1 - active_component(path);
}

bool GameState::legal(const Move& move, std::string* why) const {
  auto reject = [&](std::string reason) {
    if (why) *why = std::move(reason) + " at " + render_path(move.path);
    return false;
  };
  if (finished_) return reject("session finished");
  if (!original_.valid_path(move.path)) return reject("no such node");
  // Every ancestor must currently be in play.
  const Formula* cur = &original_;
  Path prefix;
  for (int i : move.path) {
    if (is_choice(cur->op)) {
      int chosen = status(prefix).chosen;
      if (chosen < 0) return reject("inside an unresolved choice");
      if (chosen != i) return reject("inside a discarded choice component");
    }
    if (is_sequential(cur->op) && i > active_component(prefix)) return reject("inside a component not yet reached");
    prefix.push_back(i);
    cur = &cur->children[i];
  }
  const Formula& node = *cur;
  const NodeStatus& st = status(move.path);
  switch (move.kind) {
    case Move::Kind::Choose: {
      if (!is_choice(node.op)) return reject("choose on a non-choice node");
      Player owner = node.op == Op::EnvChoice ? Player::Environment : Player::Machine;
      if (move.player != owner) return reject("choice belongs to the other player");
      if (st.chosen >= 0) return reject("choice already made");
      if (move.choice < 0 || move.choice >= static_cast<int>(node.children.size()))
        return reject("component out of range");
      return true;
    }
    case Move::Kind::Switch: {
      if (!is_sequential(node.op)) return reject("switch on a non-sequential node");
      Player leader = node.op == Op::EnvSeq ? Player::Environment : Player::Machine;
      if (move.player == leader) {
        if (leader_slack(move.path) <= 0) return reject("chain exhausted");
        return true;
      }
      if (st.catchup >= st.leading) return reject("nothing to catch up with");
      return true;
    }
    case Move::Kind::Atom:
      if (!node.is_general()) return reject("atom move outside a general atom");
      if (move.text.empty()) return reject("empty atom move");
      return true;
  }
  return reject("unknown move");
}

void GameState::apply(const Move& move) {
  std::string why;
  if (!legal(move, &why)) throw IllegalMove("illegal move " + render_move(move) + ": " + why);
  NodeStatus& st = status_[move.path];
  const Formula& node = original_.at(move.path);
  switch (move.kind) {
    case Move::Kind::Choose: st.chosen = move.choice; break;
    case Move::Kind::Switch: {
      Player leader = node.op == Op::EnvSeq ? Player::Environment : Player::Machine;
      if (move.player == leader) {
        st.leading++;
      } else {
        st.catchup++;
      }
      break;
    }
    case Move::Kind::Atom: st.atom_run.emplace_back(move.player, move.text); break;
  }
  run_.push_back(move);
}

HyperFormula GameState::view_of(const Formula& node, Path& path) const {
  if (is_choice(node.op)) {
    int chosen = status(path).chosen;
    if (chosen >= 0) {
      path.push_back(chosen);
      HyperFormula v = view_of(node.children[chosen], path);
      path.pop_back();
      return v;
    }
  }
  HyperFormula out = node;
  if (is_sequential(node.op)) out.underline = active_component(path);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    out.children[i] = view_of(node.children[i], path);
    path.pop_back();
  }
  return out;
}

HyperFormula GameState::view() const {
  Path path;
  return view_of(original_, path);
}

std::optional<Path> GameState::to_view(const Path& original) const {
  if (!original_.valid_path(original)) return std::nullopt;
  Path view;
  Path prefix;
  const Formula* cur = &original_;
  for (int i : original) {
    if (is_choice(cur->op)) {
      int chosen = status(prefix).chosen;
      if (chosen >= 0) {
        if (chosen != i) return std::nullopt;
      } else {
        view.push_back(i);
      }
    } else {
      view.push_back(i);
    }
    prefix.push_back(i);
    cur = &cur->children[i];
  }
  if (is_choice(cur->op) && status(prefix).chosen >= 0) return std::nullopt;
  return view;
}

Path GameState::to_original(const Path& view) const {
  Path out;
  const Formula* cur = &original_;
  auto skip_resolved = [&] {
    while (is_choice(cur->op) && status(out).chosen >= 0) {
      int c = status(out).chosen;
      out.push_back(c);
      cur = &cur->children[c];
    }
  };
  skip_resolved();
  for (int i : view) {
    if (i < 0 || static_cast<std::size_t>(i) >= cur->children.size())
      throw Error("view path " + render_path(view) + " does not address a node");
    out.push_back(i);
    cur = &cur->children[i];
    skip_resolved();
  }
  return out;
}

namespace {

void collect_moves(const GameState& s, const Formula& node, Path& path, Player player,
                   const std::vector<std::string>& texts, std::vector<Move>& out) {
  auto offer = [&](Move m) {
    if (s.legal(m)) out.push_back(std::move(m));
  };
  if (is_choice(node.op))
    for (std::size_t i = 0; i < node.children.size(); ++i) offer(Move::choose(player, path, static_cast<int>(i)));
  if (is_sequential(node.op)) offer(Move::switch_at(player, path));
  if (node.is_general())
    for (const auto& t : texts) offer(Move::atom(player, path, t));
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    collect_moves(s, node.children[i], path, player, texts, out);
    path.pop_back();
  }
}

Player evaluate(const GameState& s, const Formula& node, Path& path, const Interpretation& interp) {
  auto win_if = [](bool b) { return b ? Player::Machine : Player::Environment; };
  switch (node.op) {
    case Op::Top: return Player::Machine;
    case Op::Bottom: return Player::Environment;
    case Op::Literal: {
      if (!node.is_general()) {
        auto it = interp.valuation.find(node.atom);
        bool v = it != interp.valuation.end() && it->second;
        return win_if(v != node.negated);
      }
      AtomRun run = s.status(path).atom_run;
      if (!node.negated) return interp.oracle(node.atom, run);
      // ¬P is P with the roles swapped.
      for (auto& [who, text] : run) who = opponent(who);
      return opponent(interp.oracle(node.atom, run));
    }
    case Op::And:
    case Op::Or: {
      bool conj = node.op == Op::And;
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        path.push_back(static_cast<int>(i));
        Player w = evaluate(s, node.children[i], path, interp);
        path.pop_back();
        if (conj && w == Player::Environment) return w;
        if (!conj && w == Player::Machine) return w;
      }
      return conj ? Player::Machine : Player::Environment;
    }
    case Op::EnvChoice:
    case Op::MachineChoice: {
      int chosen = s.status(path).chosen;
      if (chosen < 0) return node.op == Op::EnvChoice ? Player::Machine : Player::Environment;
      path.push_back(chosen);
      Player w = evaluate(s, node.children[chosen], path, interp);
      path.pop_back();
      return w;
    }
    case Op::EnvSeq:
    case Op::MachineSeq: {
      int active = s.active_component(path);
      path.push_back(active);
      Player w = evaluate(s, node.children[active], path, interp);
      path.pop_back();
      return w;
    }
  }
  return Player::Environment;
}

}  // namespace

std::vector<Move> legal_moves(const GameState& state, Player player, const std::vector<std::string>& atom_texts) {
  std::vector<Move> out;
  Path path;
  collect_moves(state, state.original(), path, player, atom_texts, out);
  return out;
}

Player winner(const GameState& state, const Interpretation& interp) {
  if (!state.finished()) throw Error("winner asked for a session that has not terminated");
  if (!interp.oracle) throw Error("interpretation has no atom oracle");
  Path path;
  return evaluate(state, state.original(), path, interp);
}

int mirror_deficit(const GameState& state, const Path& first, const Path& second) {
  const HyperFormula& f = state.original();
  if (!f.valid_path(first) || !f.valid_path(second)) throw Error("unknown hybrid pair");
  const Formula& a = f.at(first);
  const Formula& b = f.at(second);
  if (!a.is_general() || !b.is_general() || a.atom != b.atom || a.negated == b.negated || first == second)
    throw Error("unknown hybrid pair " + render_path(first) + " / " + render_path(second));
  auto count = [](const AtomRun& run, Player who) {
    int n = 0;
    for (const auto& [p, t] : run) n += p == who;
    return n;
  };
  const AtomRun& ra = state.status(first).atom_run;
  const AtomRun& rb = state.status(second).atom_run;
  int d1 = count(ra, Player::Environment) - count(rb, Player::Machine);
  int d2 = count(rb, Player::Environment) - count(ra, Player::Machine);
  return std::max(d1, 0) + std::max(d2, 0);
}

}  // namespace cl9
