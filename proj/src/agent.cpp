#include <algorithm>

#include "cl9/agentd.hpp"

namespace cl9 {
namespace {

std::string matching_env(const Formula& f) {
  if (!f.env.empty()) return f.env;
  for (const auto& c : f.children) {
    std::string e = matching_env(c);
    if (!e.empty()) return e;
  }
  return {};
}

bool is_leading_switch(const GameState& game, const Move& m) {
  if (m.kind != Move::Kind::Switch) return false;
  Op op = game.original().at(m.path).op;
  return (op == Op::MachineSeq) == (m.player == Player::Machine);
}

Move rebase(const Move& m, Player player, const Path& prefix) {
  Move out = m;
  out.player = player;
  out.path = prefix;
  out.path.insert(out.path.end(), m.path.begin(), m.path.end());
  return out;
}

Move relative(const Move& m, Player player, const Path& rel) {
  Move out = m;
  out.player = player;
  out.path = rel;
  return out;
}

bool has_open_choice(const HyperFormula& h) {
  for (const auto& o : occurrences(h, filter::choices))
    if (o.activity == Activity::Active) return true;
  return false;
}

}  // namespace

int KBState::progress(std::size_t index, const Path& path) const {
  return entries.at(index).game.active_component(path);
}

bool kb_changed(const KBState& kb, const QueryRecord& q) { return kb.revision != q.snapshot; }

Agent::Agent(AgentSpec spec, std::set<std::string> known) : spec_(std::move(spec)), known_(std::move(known)) {
  for (const auto& e : spec_.kb) {
    KBEntryState st;
    st.entry = e;
    st.agent = matching_env(e);
    st.game = GameState(to_hyper(skeleton(e)));
    kb_.entries.push_back(std::move(st));
  }
}

const Session* Agent::session(const std::string& id) const {
  auto it = served_.find(id);
  return it == served_.end() ? nullptr : &it->second.session;
}

std::vector<std::string> Agent::session_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, sv] : served_) out.push_back(id);
  return out;
}

void Agent::enqueue_local(const Formula& goal) {
  qi_.push_back({spec_.name, make_session_id(spec_.name, ++counter_), goal, 0});
}

void Agent::fail(const std::string& session, const std::string& to, const std::string& reason, Effects& fx) {
  fx.notes.push_back("fail " + session + " " + reason);
  if (!to.empty() && to != spec_.name) fx.sent.push_back(Message::fail(session, spec_.name, to, reason));
}

std::vector<std::size_t> Agent::relevant_entries(const Formula& goal) const {
  std::set<std::string> atoms = all_atoms(goal);
  std::vector<bool> taken(kb_.entries.size(), false);
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t i = 0; i < kb_.entries.size(); ++i) {
      if (taken[i]) continue;
      auto mine = all_atoms(kb_.entries[i].entry);
      bool touches = std::any_of(mine.begin(), mine.end(), [&](const std::string& a) { return atoms.count(a) > 0; });
      if (!touches) continue;
      taken[i] = true;
      atoms.insert(mine.begin(), mine.end());
      grew = true;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < taken.size(); ++i)
    if (taken[i]) out.push_back(i);
  return out;
}

std::vector<Formula> Agent::oracle_facts(const Formula& goal, std::string* missing) const {
  std::vector<Formula> facts;
  for (const auto& atom : all_atoms(goal)) {
    auto v = answer(atom);
    if (!v) {
      *missing = atom;
      return {};
    }
    facts.push_back(Formula::literal(atom, !*v));
  }
  return facts;
}

void Agent::seed(Served& sv) {
  for (std::size_t p = 0; p < sv.entry_of.size(); ++p) {
    if (!sv.entry_of[p]) continue;
    const auto& run = kb_.entries[*sv.entry_of[p]].game.run();
    for (std::size_t j = sv.seeded[p]; j < run.size(); ++j) {
      Move m = rebase(run[j], opponent(run[j].player), sv.session.parts[p].prefix);
      if (sv.session.state.legal(m)) sv.session.state.apply(m);
    }
    sv.seeded[p] = run.size();
  }
}

void Agent::dispatch(Served& sv, const std::vector<Move>& moves, Effects& fx) {
  Session& s = sv.session;
  for (const auto& m : moves) {
    auto loc = locate(s, m.path);
    if (!loc) continue;
    auto [part, rel] = *loc;
    const SessionPart& sp = s.parts[part];
    if (!sp.resource) {
      if (sv.origin != spec_.name) {
        fx.sent.push_back(Message::move_msg(s.id, spec_.name, sv.origin, relative(m, Player::Machine, rel)));
      } else {
        fx.notes.push_back("local " + s.id + " " + render_move(m));
      }
      continue;
    }
    if (!sv.entry_of[part]) continue;
    std::size_t e = *sv.entry_of[part];
    KBEntryState& entry = kb_.entries[e];
    if (!entry.binding) continue;
    Move em = relative(m, Player::Environment, rel);
    if (!entry.game.legal(em)) {
      fx.notes.push_back("shared " + s.id + " " + render_move(m));
      continue;
    }
    bool bump = is_leading_switch(entry.game, em);
    entry.game.apply(em);
    sv.seeded[part]++;
    if (bump) kb_.revision++;
    fx.sent.push_back(Message::move_msg(entry.binding->session, spec_.name, entry.binding->agent, em));
  }
}

void Agent::after_event(Served& sv, Effects& fx) {
  Session& s = sv.session;
  HyperFormula view = s.state.view();
  const Path& qprefix = s.parts.back().prefix;
  // Parts hang directly below the root disjunction, so their view path
  // equals their original one even once the goal's own choice is resolved.
  const HyperFormula& goal = view.at(qprefix);
  if (!has_open_choice(goal)) {
    std::string ans = pretty(capitalization(goal));
    if (ans != sv.answer) {
      sv.answer = ans;
      fx.notes.push_back("answer " + s.id + " " + ans);
    }
  }
  if (!sv.reported && at_wait_leaf(s) && classify_solved(view) == Solved::Completely) {
    sv.reported = true;
    fx.notes.push_back("ok " + s.id);
    if (sv.origin != spec_.name) fx.sent.push_back(Message::ok(s.id, spec_.name, sv.origin));
  }
}

namespace {

class AgentBinder : public Binder {
 public:
  AgentBinder(const std::set<std::string>& known, const std::string& self, std::uint64_t& counter,
              const std::vector<std::optional<std::size_t>>& entry_of, const KBState& kb)
      : known_(known), self_(self), counter_(counter), entry_of_(entry_of), kb_(kb) {}

  bool knows(const std::string& agent) const override { return known_.empty() || known_.count(agent) > 0; }
  std::string next_session_id() override { return make_session_id(self_, ++counter_); }
  std::optional<Binding> reuse(const Session&, std::size_t part) override {
    if (!entry_of_[part]) return std::nullopt;
    return kb_.entries[*entry_of_[part]].binding;
  }

 private:
  const std::set<std::string>& known_;
  const std::string& self_;
  std::uint64_t& counter_;
  const std::vector<std::optional<std::size_t>>& entry_of_;
  const KBState& kb_;
};

}  // namespace

void Agent::solve(QueryRecord q, Effects& fx) {
  auto it = served_.find(q.session);
  bool fresh = it == served_.end();
  if (fresh) {
    Served sv;
    sv.origin = q.origin;
    std::vector<Formula> kb;
    if (spec_.kind == AgentKind::Neural) {
      std::string missing;
      kb = oracle_facts(q.goal, &missing);
      if (!missing.empty()) return fail(q.session, q.origin, "oracle-missing", fx);
      sv.entry_of.assign(kb.size(), std::nullopt);
    } else {
      for (std::size_t e : relevant_entries(q.goal)) {
        kb.push_back(kb_.entries[e].entry);
        sv.entry_of.push_back(e);
      }
    }
    sv.entry_of.push_back(std::nullopt);
    sv.session = make_session(q.session, kb, q.goal);
    sv.seeded.assign(sv.entry_of.size(), 0);
    it = served_.emplace(q.session, std::move(sv)).first;
  }
  Served& sv = it->second;
  seed(sv);

  ProveResult r = prove_hyper(sv.session.state.view(), {budget_});
  if (!r.proved()) {
    std::string reason = r.status == ProveResult::Status::Timeout ? "timeout" : "unprovable";
    if (fresh) served_.erase(it);
    return fail(q.session, q.origin, reason, fx);
  }
  attach_proof(sv.session, r.proof);
  fx.notes.push_back("solve " + q.session + " steps=" + std::to_string(proof_size(*r.proof)));

  try {
    AgentBinder binder(known_, spec_.name, counter_, sv.entry_of, kb_);
    for (auto& msg : activate(sv.session, spec_.name, binder)) fx.sent.push_back(std::move(msg));
  } catch (const Error&) {
    if (fresh) served_.erase(it);
    return fail(q.session, q.origin, "unknown-agent", fx);
  }
  for (const auto& [part, b] : sv.session.bindings) {
    if (!sv.entry_of[part]) continue;
    KBEntryState& entry = kb_.entries[*sv.entry_of[part]];
    if (!entry.binding) {
      entry.binding = b;
      resource_of_[b.session] = *sv.entry_of[part];
    }
  }

  StepResult st = advance(sv.session);
  dispatch(sv, st.emitted, fx);
  after_event(sv, fx);
  if (classify_solved(sv.session.state.view()) == Solved::Temporarily) {
    q.snapshot = kb_.revision;
    fx.notes.push_back("qs push " + q.session + " rev=" + std::to_string(q.snapshot));
    qs_.push_back(q);
  }
  if (auto h = held_.find(q.session); h != held_.end()) {
    auto held = std::move(h->second);
    held_.erase(h);
    for (const auto& msg : held) served_move(msg, fx);
  }
}

void Agent::route_resource_move(std::size_t e, const Message& msg, Effects& fx) {
  KBEntryState& entry = kb_.entries[e];
  std::string why;
  if (msg.move.player != Player::Machine || !entry.game.legal(msg.move, &why))
    return fail(msg.session, msg.from, "illegal-move", fx);
  bool bump = is_leading_switch(entry.game, msg.move);
  entry.game.apply(msg.move);
  if (bump) {
    kb_.revision++;
    fx.notes.push_back("kb rev=" + std::to_string(kb_.revision));
  }
  for (auto& [id, sv] : served_) {
    if (sv.session.closed || !sv.session.cursor) continue;
    for (std::size_t p = 0; p < sv.entry_of.size(); ++p) {
      if (sv.entry_of[p] != e) continue;
      Move m = rebase(msg.move, Player::Environment, sv.session.parts[p].prefix);
      sv.seeded[p]++;
      if (!sv.session.state.legal(m)) continue;
      StepResult st = receive(sv.session, m);
      for (const auto& n : st.notes) fx.notes.push_back(id + " " + n);
      dispatch(sv, st.emitted, fx);
      after_event(sv, fx);
    }
  }
}

void Agent::served_move(const Message& msg, Effects& fx) {
  auto it = served_.find(msg.session);
  if (it == served_.end() || it->second.session.closed || !it->second.session.cursor)
    return fail(msg.session, msg.from, "unknown-session", fx);
  Served& sv = it->second;
  if (msg.from != sv.origin || msg.move.player != Player::Environment)
    return fail(msg.session, msg.from, "illegal-move", fx);
  Move m = rebase(msg.move, Player::Environment, sv.session.parts.back().prefix);
  try {
    StepResult st = receive(sv.session, m);
    for (const auto& n : st.notes) fx.notes.push_back(msg.session + " " + n);
    dispatch(sv, st.emitted, fx);
    after_event(sv, fx);
  } catch (const IllegalMove&) {
    fail(msg.session, msg.from, "illegal-move", fx);
  }
}

Effects Agent::on_message(const Message& msg) {
  Effects fx;
  if (spec_.kind == AgentKind::Super) return fx;
  switch (msg.kind) {
    case Message::Kind::Query: {
      bool known = served_.count(msg.session) > 0 ||
                   std::any_of(qi_.begin(), qi_.end(), [&](const QueryRecord& q) { return q.session == msg.session; });
      if (known) {
        fail(msg.session, msg.from, "duplicate-session", fx);
        break;
      }
      try {
        qi_.push_back({msg.from, msg.session, parse_formula(msg.body), 0});
        fx.notes.push_back("qi push " + msg.session + " qi=" + std::to_string(qi_.size()));
      } catch (const Error&) {
        fail(msg.session, msg.from, "parse-error", fx);
      }
      break;
    }
    case Message::Kind::Move: {
      if (auto r = resource_of_.find(msg.session); r != resource_of_.end()) {
        route_resource_move(r->second, msg, fx);
        break;
      }
      bool waiting = std::any_of(qi_.begin(), qi_.end(), [&](const QueryRecord& q) {
        return q.session == msg.session && !served_.count(q.session);
      });
      if (waiting) {
        held_[msg.session].push_back(msg);
        fx.notes.push_back("held " + msg.session + " " + render_move(msg.move));
        break;
      }
      served_move(msg, fx);
      break;
    }
    case Message::Kind::Done:
      if (auto it = served_.find(msg.session); it != served_.end()) {
        it->second.session.closed = true;
        fx.notes.push_back("closed " + msg.session);
      }
      break;
    case Message::Kind::Fail:
      fx.notes.push_back("remote failure " + msg.session + " " + msg.body);
      break;
    case Message::Kind::Ok: break;
  }
  return fx;
}

Effects Agent::loop_step() {
  Effects fx;
  if (spec_.kind == AgentKind::Super) return fx;
  if (!deferred_training_.empty() && qi_.empty()) {
    auto samples = std::move(deferred_training_);
    deferred_training_.clear();
    train(samples);
  }
  auto counts = [&] { return " qi=" + std::to_string(qi_.size()) + " qs=" + std::to_string(qs_.size()); };
  if (!qi_.empty()) {
    QueryRecord q = std::move(qi_.front());
    qi_.pop_front();
    last_idle_.clear();
    fx.notes.push_back("case1 " + q.session + counts());
    solve(std::move(q), fx);
    return fx;
  }
  if (!qs_.empty()) {
    const QueryRecord& head = qs_.front();
    if (!kb_changed(kb_, head)) {
      std::string note = "case2 idle " + head.session + " rev=" + std::to_string(kb_.revision);
      if (note != last_idle_) fx.notes.push_back(last_idle_ = note);
      return fx;
    }
    QueryRecord q = std::move(qs_.front());
    qs_.pop_front();
    last_idle_.clear();
    fx.notes.push_back("case2 requeue " + q.session + " rev=" + std::to_string(q.snapshot) + "->" +
                       std::to_string(kb_.revision));
    qi_.push_back(std::move(q));
    return fx;
  }
  if (last_idle_ != "case3 idle") fx.notes.push_back(last_idle_ = "case3 idle");
  return fx;
}

bool Agent::idle() const {
  if (spec_.kind == AgentKind::Super) return true;
  if (!qi_.empty() || !deferred_training_.empty() || last_idle_.empty()) return false;
  return qs_.empty() || !kb_changed(kb_, qs_.front());
}

void Agent::script(int tick, Message msg) { script_.emplace(tick, std::move(msg)); }

std::vector<Message> Agent::script_step(int tick) const {
  std::vector<Message> out;
  auto [lo, hi] = script_.equal_range(tick);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

void Agent::train(const std::vector<std::pair<std::string, bool>>& samples) {
  if (spec_.kind != AgentKind::Neural) throw Error("agent " + spec_.name + " is not a neural agent");
  bool busy = !qi_.empty();
  for (const auto& [id, sv] : served_)
    if (!sv.session.closed && sv.session.cursor && !at_wait_leaf(sv.session)) busy = true;
  if (busy) {
    deferred_training_.insert(deferred_training_.end(), samples.begin(), samples.end());
    return;
  }
  for (const auto& [atom, verdict] : samples) oracle_[atom] = verdict;
}

std::optional<bool> Agent::answer(const std::string& atom) const {
  auto it = oracle_.find(atom);
  if (it == oracle_.end()) return std::nullopt;
  return it->second;
}

}  // namespace cl9
