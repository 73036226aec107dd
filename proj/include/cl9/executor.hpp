#ifndef CL9_EXECUTOR_HPP
#define CL9_EXECUTOR_HPP

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cl9/message.hpp"
#include "cl9/prover.hpp"
#include "cl9/runtime.hpp"

namespace cl9 {

/// A top-level piece of a session formula: a knowledgebase entry (which
/// occurs negated) or the goal.
struct SessionPart {
  Path prefix;
  Formula entry;       // as written, annotation included
  std::string agent;   // matching environment, empty when unannotated
  bool resource = false;
};

struct Binding {
  std::string agent;
  std::string session;  // id of the session the agent runs for us
};

struct HybridPair {
  Path positive;  // original-formula paths
  Path negative;
};

struct Session {
  std::string id;
  Formula formula;
  GameState state;
  ProofPtr proof;
  ProofPtr cursor;
  std::vector<SessionPart> parts;
  std::map<std::size_t, Binding> bindings;  // part index
  std::vector<HybridPair> hybrids;
  std::deque<Move> pending;  // environment moves not yet processed
  bool closed = false;
};

/// Session over compile_query(kb, query); parts record where each piece went.
Session make_session(std::string id, const std::vector<Formula>& kb, const Formula& query);
/// Session over a bare formula (one non-resource part at the root).
Session make_session(std::string id, const Formula& formula);

/// Point the cursor at a proof of the live view. Throws Error when the
/// proof's conclusion does not describe the current position.
void attach_proof(Session& session, ProofPtr proof);

/// Part containing `path` and the path relative to the part's root.
std::optional<std::pair<std::size_t, Path>> locate(const Session& session, const Path& path);

class Binder {
 public:
  virtual ~Binder() = default;
  virtual bool knows(const std::string& agent) const = 0;
  virtual std::string next_session_id() = 0;
  /// A binding already open for the same resource, if it can be shared.
  virtual std::optional<Binding> reuse(const Session&, std::size_t /*part*/) { return std::nullopt; }
};

/// Binder with its own counter and a fixed set of known agents.
class CounterBinder : public Binder {
 public:
  CounterBinder(std::string self, std::vector<std::string> known);
  bool knows(const std::string& agent) const override;
  std::string next_session_id() override;

 private:
  std::string self_;
  std::vector<std::string> known_;
  std::uint64_t counter_ = 0;
};

/// One QUERY per unbound annotated knowledgebase entry; throws Error on an
/// unknown agent.
std::vector<Message> activate(Session& session, const std::string& self, Binder& binder);

struct StepResult {
  std::vector<Move> emitted;       // machine moves, in order
  std::vector<std::string> notes;  // rule steps and Wait cases taken
};

/// Runs machine rule steps from the cursor until it rests at a Wait node,
/// then drains queued environment moves.
StepResult advance(Session& session);
/// Processes one environment move. Throws IllegalMove (session unchanged)
/// or Error for a closed session.
StepResult receive(Session& session, const Move& move);
/// nullopt: proof-cursor event.
StepResult exec_step(Session& session, const std::optional<Move>& event);

bool at_wait_leaf(const Session& session);

enum class Solved { Completely, Temporarily };
std::string_view to_string(Solved s);

/// Temporarily solved iff an active surface ▽ chain in the view can still
/// be switched by the machine.
Solved classify_solved(const HyperFormula& view);

struct SessionOutcome {
  enum class Status { CompletelySolved, TemporarilySolved, Failed };
  Status status = Status::Failed;
  GameState state;
  std::vector<HybridPair> hybrids;
  std::vector<std::string> rejected;  // driver moves dropped as illegal
  std::vector<std::string> notes;
};

std::string_view to_string(SessionOutcome::Status s);

/// Supplies the next environment move, or nullopt to stop.
using EnvironmentDriver = std::function<std::optional<Move>(const Session&)>;
/// Called after every processed event (used for per-step checks).
using StepObserver = std::function<void(const Session&, const std::optional<Move>&, const StepResult&)>;

SessionOutcome run_session(ProofPtr proof, const EnvironmentDriver& driver, const StepObserver& observer = {});

}  // namespace cl9

#endif  // CL9_EXECUTOR_HPP
