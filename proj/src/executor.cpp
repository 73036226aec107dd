#include "cl9/executor.hpp"

#include <algorithm>

namespace cl9 {
namespace {

std::string first_env(const Formula& f) {
  if (!f.env.empty()) return f.env;
  for (const auto& c : f.children) {
    std::string e = first_env(c);
    if (!e.empty()) return e;
  }
  return {};
}

bool has_prefix(const Path& path, const Path& prefix) {
  return path.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

void check_conformance(const Session& s) {
  if (dehybridize(s.cursor->conclusion) != s.state.view())
    throw Error("session " + s.id + ": proof position " + render_debug(s.cursor->conclusion) +
                " does not describe the live view " + render_debug(s.state.view()));
}

ProofPtr find_premise(const Proof& wait, const HyperFormula& target) {
  for (const auto& p : wait.premises)
    if (p->conclusion == target) return p;
  return nullptr;
}

int count_moves(const AtomRun& run, Player who) {
  int n = 0;
  for (const auto& [p, t] : run) n += p == who;
  return n;
}

// Environment moves in `from` that have no machine copy in `to` yet.
void copy_pending(Session& s, const Path& from, const Path& to, StepResult& out) {
  std::vector<std::string> env_moves;
  for (const auto& [p, t] : s.state.status(from).atom_run)
    if (p == Player::Environment) env_moves.push_back(t);
  int copied = count_moves(s.state.status(to).atom_run, Player::Machine);
  for (std::size_t i = static_cast<std::size_t>(copied); i < env_moves.size(); ++i) {
    Move m = Move::atom(Player::Machine, to, env_moves[i]);
    s.state.apply(m);
    out.emitted.push_back(std::move(m));
  }
}

const HybridPair* pair_of(const Session& s, const Path& original, Path* twin) {
  for (const auto& h : s.hybrids) {
    if (h.positive == original) {
      *twin = h.negative;
      return &h;
    }
    if (h.negative == original) {
      *twin = h.positive;
      return &h;
    }
  }
  return nullptr;
}

bool abandoned_in(const HyperFormula& view, const GameState& st, const Path& original) {
  auto vp = st.to_view(original);
  return !vp || classify(view, *vp).activity != Activity::Active;
}

// One machine rule step at the cursor. Returns false at a Wait node.
bool machine_step(Session& s, StepResult& out) {
  const Proof& node = *s.cursor;
  if (node.rule == Rule::Wait) return false;
  switch (node.rule) {
    case Rule::Choose: {
      Move m = Move::choose(Player::Machine, s.state.to_original(node.path), node.choice);
      s.state.apply(m);
      out.notes.push_back("Choose " + render_move(m));
      out.emitted.push_back(std::move(m));
      break;
    }
    case Rule::Switch: {
      Move m = Move::switch_at(Player::Machine, s.state.to_original(node.path));
      s.state.apply(m);
      out.notes.push_back("Switch " + render_move(m));
      out.emitted.push_back(std::move(m));
      break;
    }
    case Rule::Match: {
      Path pos = s.state.to_original(node.path);
      Path neg = s.state.to_original(node.negative_path);
      copy_pending(s, neg, pos, out);
      copy_pending(s, pos, neg, out);
      s.hybrids.push_back({pos, neg});
      out.notes.push_back("Match " + render_path(pos) + " ~ " + render_path(neg));
      break;
    }
    case Rule::Wait: break;
  }
  s.cursor = node.premises.at(0);
  check_conformance(s);
  return true;
}

void process_env(Session& s, const Move& move, StepResult& out) {
  const Proof& wait = *s.cursor;
  const HyperFormula& at = wait.conclusion;
  HyperFormula view = s.state.view();
  auto vp = s.state.to_view(move.path);
  if (!vp) throw IllegalMove("move " + render_move(move) + " addresses a discarded component");
  Occurrence occ = classify(view, *vp);

  auto record = [&](const std::string& why) {
    s.state.apply(move);
    out.notes.push_back("Wait " + why + " " + render_move(move));
  };

  Path twin;
  if (move.kind == Move::Kind::Atom && pair_of(s, move.path, &twin)) {
    // Abandoned and widowed pairs keep being copied so the twins stay mirrored.
    bool live = occ.activity == Activity::Active && !abandoned_in(view, s.state, twin);
    record(live ? "case4" : "case1");
    Move echo = Move::atom(Player::Machine, twin, move.text);
    if (s.state.legal(echo)) {
      s.state.apply(echo);
      out.emitted.push_back(std::move(echo));
    }
    return;
  }
  if (occ.activity != Activity::Active) return record("case1");

  switch (move.kind) {
    case Move::Kind::Atom: return record("case2");
    case Move::Kind::Switch: {
      const Formula& node = s.state.original().at(move.path);
      if (node.op == Op::MachineSeq) return record("case3");
      HyperFormula target = advance_underline(at, *vp);
      ProofPtr next = find_premise(wait, target);
      if (!next) throw Error("session " + s.id + ": no Wait premise for " + render_move(move));
      s.state.apply(move);
      Move echo = Move::switch_at(Player::Machine, move.path);
      s.state.apply(echo);
      out.notes.push_back("Wait case6 " + render_move(move));
      out.emitted.push_back(std::move(echo));
      s.cursor = next;
      check_conformance(s);
      return;
    }
    case Move::Kind::Choose: {
      HyperFormula target = apply_env_choice(at, *vp, move.choice);
      ProofPtr next = find_premise(wait, target);
      if (!next) throw Error("session " + s.id + ": no Wait premise for " + render_move(move));
      s.state.apply(move);
      out.notes.push_back("Wait case5 " + render_move(move));
      s.cursor = next;
      check_conformance(s);
      return;
    }
  }
}

void run_machine(Session& s, StepResult& out) {
  while (machine_step(s, out)) {
  }
}

void require_live(const Session& s) {
  if (s.closed) throw Error("session " + s.id + " is closed");
  if (!s.cursor) throw Error("session " + s.id + " has no proof attached");
}

}  // namespace

Session make_session(std::string id, const std::vector<Formula>& kb, const Formula& query) {
  Session s;
  s.id = std::move(id);
  s.formula = to_hyper(compile_query(kb, query));
  s.state = GameState(s.formula);
  for (std::size_t i = 0; i < kb.size(); ++i) {
    std::string env = first_env(kb[i]);
    s.parts.push_back({{static_cast<int>(i)}, kb[i], env, true});
  }
  Path qp;
  if (!kb.empty()) qp.push_back(static_cast<int>(kb.size()));
  s.parts.push_back({qp, query, first_env(query), false});
  return s;
}

Session make_session(std::string id, const Formula& formula) { return make_session(std::move(id), {}, formula); }

void attach_proof(Session& session, ProofPtr proof) {
  if (!proof) throw Error("no proof");
  session.proof = proof;
  session.cursor = proof;
  check_conformance(session);
}

std::optional<std::pair<std::size_t, Path>> locate(const Session& session, const Path& path) {
  for (std::size_t i = 0; i < session.parts.size(); ++i) {
    const Path& prefix = session.parts[i].prefix;
    if (has_prefix(path, prefix)) return std::make_pair(i, Path(path.begin() + prefix.size(), path.end()));
  }
  return std::nullopt;
}

CounterBinder::CounterBinder(std::string self, std::vector<std::string> known)
    : self_(std::move(self)), known_(std::move(known)) {}

bool CounterBinder::knows(const std::string& agent) const {
  return std::find(known_.begin(), known_.end(), agent) != known_.end();
}

std::string CounterBinder::next_session_id() { return make_session_id(self_, ++counter_); }

std::vector<Message> activate(Session& session, const std::string& self, Binder& binder) {
  std::vector<Message> out;
  for (std::size_t i = 0; i < session.parts.size(); ++i) {
    const SessionPart& part = session.parts[i];
    if (!part.resource || part.agent.empty() || session.bindings.count(i)) continue;
    if (!binder.knows(part.agent)) throw Error("unknown agent '" + part.agent + "'");
    if (auto b = binder.reuse(session, i)) {
      session.bindings[i] = *b;
      continue;
    }
    Binding b{part.agent, binder.next_session_id()};
    session.bindings[i] = b;
    out.push_back(Message::query(b.session, self, b.agent, pretty(skeleton(part.entry))));
  }
  return out;
}

StepResult advance(Session& session) {
  require_live(session);
  StepResult out;
  run_machine(session, out);
  while (!session.pending.empty() && session.cursor->rule == Rule::Wait) {
    Move m = session.pending.front();
    session.pending.pop_front();
    if (!session.state.legal(m)) {
      out.notes.push_back("dropped " + render_move(m));
      continue;
    }
    process_env(session, m, out);
    run_machine(session, out);
  }
  return out;
}

StepResult receive(Session& session, const Move& move) {
  require_live(session);
  if (move.player != Player::Environment) throw IllegalMove("only environment moves can be received");
  std::string why;
  if (!session.state.legal(move, &why)) throw IllegalMove("illegal move " + render_move(move) + ": " + why);
  StepResult out;
  if (session.cursor->rule != Rule::Wait) {
    session.pending.push_back(move);
    out.notes.push_back("queued " + render_move(move));
    return out;
  }
  process_env(session, move, out);
  run_machine(session, out);
  return out;
}

StepResult exec_step(Session& session, const std::optional<Move>& event) {
  return event ? receive(session, *event) : advance(session);
}

bool at_wait_leaf(const Session& session) {
  return session.cursor && session.cursor->rule == Rule::Wait && session.cursor->premises.empty();
}

std::string_view to_string(Solved s) { return s == Solved::Completely ? "completely" : "temporarily"; }

Solved classify_solved(const HyperFormula& view) {
  for (const auto& o : occurrences(view, filter::machine_seqs)) {
    if (!o.active_surface()) continue;
    const Formula& chain = view.at(o.path);
    if (chain.underline < static_cast<int>(chain.children.size()) - 1) return Solved::Temporarily;
  }
  return Solved::Completely;
}

std::string_view to_string(SessionOutcome::Status s) {
  switch (s) {
    case SessionOutcome::Status::CompletelySolved: return "completely-solved";
    case SessionOutcome::Status::TemporarilySolved: return "temporarily-solved";
    case SessionOutcome::Status::Failed: return "failed";
  }
  return "failed";
}

SessionOutcome run_session(ProofPtr proof, const EnvironmentDriver& driver, const StepObserver& observer) {
  SessionOutcome outcome;
  if (!proof) return outcome;
  Session s;
  s.id = "local:1";
  s.formula = dehybridize(proof->conclusion);
  s.state = GameState(s.formula);
  s.parts.push_back({{}, s.formula, {}, false});
  try {
    attach_proof(s, proof);
    StepResult first = advance(s);
    outcome.notes.insert(outcome.notes.end(), first.notes.begin(), first.notes.end());
    if (observer) observer(s, std::nullopt, first);
    while (driver) {
      std::optional<Move> m = driver(s);
      if (!m) break;
      try {
        StepResult r = receive(s, *m);
        outcome.notes.insert(outcome.notes.end(), r.notes.begin(), r.notes.end());
        if (observer) observer(s, m, r);
      } catch (const IllegalMove& e) {
        outcome.rejected.push_back(e.what());
      }
    }
  } catch (const Error& e) {
    outcome.notes.push_back(std::string("failed: ") + e.what());
    outcome.state = s.state;
    return outcome;
  }
  outcome.status = classify_solved(s.state.view()) == Solved::Completely
                       ? SessionOutcome::Status::CompletelySolved
                       : SessionOutcome::Status::TemporarilySolved;
  s.state.finish();
  outcome.state = s.state;
  outcome.hybrids = s.hybrids;
  return outcome;
}

}  // namespace cl9
