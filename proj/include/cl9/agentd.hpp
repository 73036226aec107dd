#ifndef CL9_AGENTD_HPP
#define CL9_AGENTD_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cl9/executor.hpp"

namespace cl9 {

// ---- transports ------------------------------------------------------------

/// Order-preserving per sender/receiver pair. `send` needs from/to set;
/// `drain` returns what was delivered to `agent`, oldest first.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const Message& msg) = 0;
  virtual std::vector<Message> drain(const std::string& agent) = 0;
  virtual bool idle() const = 0;
};

/// Frames are encoded on send and decoded on drain, like on a wire.
class InProcessBus : public Transport {
 public:
  void send(const Message& msg) override;
  std::vector<Message> drain(const std::string& agent) override;
  bool idle() const override;

 private:
  struct Frame {
    std::string from;
    std::string line;
  };
  std::map<std::string, std::deque<Frame>> inbox_;
};

/// Loopback TCP: one connection per ordered (from, to) pair, frames are
/// newline-terminated lines.
class SocketTransport : public Transport {
 public:
  SocketTransport();  // throws Error if the listener cannot be opened
  ~SocketTransport() override;
  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  void send(const Message& msg) override;
  std::vector<Message> drain(const std::string& agent) override;
  bool idle() const override;

 private:
  struct Channel;
  Channel& channel(const std::string& from, const std::string& to);

  int listener_ = -1;
  int port_ = 0;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<Channel>> channels_;
  std::map<std::string, std::deque<Message>> inbox_;
};

// ---- agents ----------------------------------------------------------------

/// One knowledgebase entry and the game played on it so far. The provider
/// (the annotated agent) is the machine of that game.
struct KBEntryState {
  Formula entry;
  std::string agent;  // empty for entries not played against anyone
  GameState game;
  std::optional<Binding> binding;
};

struct KBState {
  std::vector<KBEntryState> entries;
  std::uint64_t revision = 0;

  /// Current head of the chain at `path` of entry `index`.
  int progress(std::size_t index, const Path& path) const;
};

struct QueryRecord {
  std::string origin;
  std::string session;
  Formula goal;
  std::uint64_t snapshot = 0;  // KB revision it was solved against (QS)
};

/// What one agent call produced: messages to send and trace notes.
struct Effects {
  std::vector<Message> sent;
  std::vector<std::string> notes;
};

class Agent {
 public:
  explicit Agent(AgentSpec spec, std::set<std::string> known = {});

  const std::string& name() const { return spec_.name; }
  AgentKind kind() const { return spec_.kind; }
  const KBState& kb() const { return kb_; }
  const std::deque<QueryRecord>& income() const { return qi_; }
  const std::deque<QueryRecord>& solved() const { return qs_; }
  const Session* session(const std::string& id) const;
  std::vector<std::string> session_ids() const;
  void set_known(std::set<std::string> known) { known_ = std::move(known); }
  void set_budget(std::uint64_t budget) { budget_ = budget; }

  /// Puts a goal the agent poses to itself on QI.
  void enqueue_local(const Formula& goal);

  Effects on_message(const Message& msg);
  /// One pass of the scheduler loop.
  Effects loop_step();

  // Super agents.
  void script(int tick, Message msg);
  std::vector<Message> script_step(int tick) const;

  // Neural agents: exact-memorization oracle.
  void train(const std::vector<std::pair<std::string, bool>>& samples);
  std::optional<bool> answer(const std::string& atom) const;
  const std::map<std::string, bool>& oracle() const { return oracle_; }

  /// QI empty, QS unchanged since solved, nothing pending.
  bool idle() const;

 private:
  struct Served {
    Session session;
    std::string origin;
    std::vector<std::optional<std::size_t>> entry_of;  // per part: KB entry index
    std::vector<std::size_t> seeded;                    // per part: entry moves replayed
    bool reported = false;
    std::string answer;
  };

  void solve(QueryRecord q, Effects& fx);
  void seed(Served& sv);
  void dispatch(Served& sv, const std::vector<Move>& moves, Effects& fx);
  void after_event(Served& sv, Effects& fx);
  void served_move(const Message& msg, Effects& fx);
  void route_resource_move(std::size_t entry, const Message& msg, Effects& fx);
  std::vector<std::size_t> relevant_entries(const Formula& goal) const;
  std::vector<Formula> oracle_facts(const Formula& goal, std::string* missing) const;
  void fail(const std::string& session, const std::string& to, const std::string& reason, Effects& fx);

  AgentSpec spec_;
  std::set<std::string> known_;
  std::uint64_t budget_ = ProveOptions{}.budget;
  KBState kb_;
  std::deque<QueryRecord> qi_;
  std::deque<QueryRecord> qs_;
  std::map<std::string, Served> served_;
  std::map<std::string, std::size_t> resource_of_;  // remote session id → KB entry
  std::uint64_t counter_ = 0;
  std::string last_idle_;
  std::map<std::string, std::vector<Message>> held_;  // moves for sessions still in QI

  std::multimap<int, Message> script_;
  std::map<std::string, bool> oracle_;
  std::vector<std::pair<std::string, bool>> deferred_training_;
};

/// QS entries are requeued only after the KB revision moved past their snapshot.
bool kb_changed(const KBState& kb, const QueryRecord& q);

// ---- scenarios -------------------------------------------------------------

struct TraceEvent {
  int tick = 0;
  std::string agent;
  std::string dir;  // in | out | internal
  std::string payload;
};

std::string render_trace(const std::vector<TraceEvent>& trace);

struct ScenarioConfig {
  int ticks = 50;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Formula>> queries;  // local goals
  std::vector<std::pair<std::string, std::pair<int, Message>>> scripts;
  std::map<std::string, std::vector<std::pair<std::string, bool>>> training;
};

struct Scenario {
  std::vector<AgentSpec> agents;
  ScenarioConfig config;
};

/// Throws ParseError/Error with the offending file named in the message.
ScenarioConfig parse_scenario_config(std::string_view text);
Scenario load_scenario(const std::string& directory);

struct RunOptions {
  bool socket = false;
  std::optional<std::uint64_t> seed;  // overrides the config
  std::uint64_t budget = ProveOptions{}.budget;
};

struct RunResult {
  std::vector<TraceEvent> trace;
  int ticks_used = 0;
  bool quiescent = false;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Every non-empty, non-comment line of `patterns` must occur as a
/// substring of some trace line, in order. Returns the first unmatched
/// pattern.
std::optional<std::string> check_trace(const std::vector<TraceEvent>& trace, std::string_view patterns);

}  // namespace cl9

#endif  // CL9_AGENTD_HPP
