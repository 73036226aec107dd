// Acceptance run: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cl9/agentd.hpp"
#include "support.hpp"

using namespace cl9;

namespace {

constexpr double kChainSeconds = 1.0;
constexpr double kBatterySeconds = 5.0;
constexpr double kAtmSeconds = 1.0;
constexpr int kStableSamples = 1000;
constexpr int kMaxNames = 12;
constexpr int kDrivers = 100;
constexpr int kMaxEnvMoves = 20;
constexpr int kMessages = 10000;
constexpr int kDepositTick = 3;

const std::string kChain = "(b0 # b1 # b2)^u -> (b0 # b1 # b2)^w";
const std::string kSource = CL9_SOURCE_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3fs", s);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict chain() {
  auto t0 = std::chrono::steady_clock::now();
  ProveResult r = prove(parse_formula(kChain));
  double took = seconds_since(t0);
  if (!r.proved()) return {false, "not proved"};
  auto counts = rule_counts(*r.proof);
  bool multiset = counts[Rule::Wait] == 3 && counts[Rule::Switch] == 2 && counts[Rule::Choose] == 0 &&
                  counts[Rule::Match] == 0;
  bool ok = verify(*r.proof);
  std::string d = "Wait=" + std::to_string(counts[Rule::Wait]) + " Switch=" + std::to_string(counts[Rule::Switch]) +
                  " Choose=" + std::to_string(counts[Rule::Choose]) + " Match=" + std::to_string(counts[Rule::Match]) +
                  " verify=" + (ok ? "yes" : "no") + " time=" + fmt_seconds(took);
  return {multiset && ok && took < kChainSeconds, d};
}

Verdict battery() {
  const std::vector<std::pair<std::string, bool>> cases = {
      {"p -> p", true},      {"P -> P", true},  {"~P \\/ P", true},         {"(p & q) -> (p & q)", true},
      {kChain, true},        {"P + ~P", false}, {"p -> q", false},          {"b0 -> (b0 # b1)", false},
  };
  auto t0 = std::chrono::steady_clock::now();
  int right = 0;
  std::string wrong;
  for (const auto& [text, expected] : cases) {
    ProveResult r = prove(parse_formula(text));
    bool got = r.proved();
    if (r.status != ProveResult::Status::Timeout && got == expected && (!got || verify(*r.proof)))
      ++right;
    else
      wrong += " [" + text + "]";
  }
  double took = seconds_since(t0);
  return {right == static_cast<int>(cases.size()) && took < kBatterySeconds,
          std::to_string(right) + "/" + std::to_string(cases.size()) + " correct time=" + fmt_seconds(took) + wrong};
}

Verdict golden() {
  std::vector<PlainLine> lines = parse_plain_derivation(slurp(kSource + "/tests/data/chain_plain.txt"));
  if (lines.size() != 5) return {false, "golden file has " + std::to_string(lines.size()) + " lines"};
  if (!(lines.back().formula == parse_formula(kChain))) return {false, "last line is not the chain formula"};
  if (!verify_plain(lines)) return {false, "golden derivation rejected"};
  int mutants = 0, caught = 0;
  auto trial = [&](const std::vector<PlainLine>& m) {
    ++mutants;
    caught += !verify_plain(m);
  };
  const Rule rules[] = {Rule::Wait, Rule::Choose, Rule::Switch, Rule::Match};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (Rule r : rules) {
      if (r == lines[i].rule) continue;
      auto m = lines;
      m[i].rule = r;
      trial(m);
    }
    for (std::size_t k = 0; k < lines[i].premises.size(); ++k) {
      for (int j = 0; j < static_cast<int>(lines.size()); ++j) {
        if (j == lines[i].premises[k]) continue;
        auto m = lines;
        m[i].premises[k] = j;
        trial(m);
      }
      auto m = lines;
      m[i].premises.erase(m[i].premises.begin() + static_cast<long>(k));
      trial(m);
    }
  }
  auto swapped = lines;
  std::swap(swapped[1], swapped[2]);
  trial(swapped);
  return {caught == mutants, "golden accepted, " + std::to_string(caught) + "/" + std::to_string(mutants) +
                                 " mutants rejected"};
}

Verdict stability() {
  testing::HyperGen gen(20260119, kMaxNames);
  int agree = 0, stable = 0, widest = 0;
  for (int i = 0; i < kStableSamples; ++i) {
    HyperFormula h = gen.next();
    std::set<std::string> names;
    testing::collect_names(h, names);
    widest = std::max(widest, static_cast<int>(names.size()));
    bool oracle = testing::truth_table_stable(h);
    stable += oracle;
    agree += is_stable(h) == oracle;
  }
  return {agree == kStableSamples && widest <= kMaxNames,
          std::to_string(agree) + "/" + std::to_string(kStableSamples) + " agree (" + std::to_string(stable) +
              " stable, widest " + std::to_string(widest) + " names)"};
}

struct PlayTally {
  int sessions = 0;
  int machine_wins = 0;
  int match_sessions = 0;
  int hybrid_steps = 0;
  int deficit_zero = 0;
  std::string first_loss;
};

// Criteria 5 and 6 share one sweep over the corpus.
const PlayTally& play_sweep() {
  static PlayTally tally = [] {
    PlayTally t;
    for (const auto& text : testing::provable_corpus()) {
      Formula goal = parse_formula(text);
      ProveResult r = prove(goal);
      if (!r.proved()) {
        if (t.first_loss.empty()) t.first_loss = text + " unprovable";
        continue;
      }
      bool has_match = rule_counts(*r.proof)[Rule::Match] > 0;
      for (int seed = 0; seed < kDrivers; ++seed) {
        auto observer = [&](const Session& s, const std::optional<Move>& m, const StepResult&) {
          if (!m || m->kind != Move::Kind::Atom) return;
          for (const auto& pair : s.hybrids) {
            if (m->path != pair.positive && m->path != pair.negative) continue;
            ++t.hybrid_steps;
            t.deficit_zero += mirror_deficit(s.state, pair.positive, pair.negative) == 0;
          }
        };
        SessionOutcome out = run_session(r.proof, testing::random_driver(seed, kMaxEnvMoves), observer);
        if (out.status == SessionOutcome::Status::Failed) {
          if (t.first_loss.empty()) t.first_loss = text + " seed " + std::to_string(seed) + " failed";
          ++t.sessions;
          continue;
        }
        ++t.sessions;
        t.match_sessions += has_match;
        Interpretation interp = testing::shared_oracle(seed * 7919 + 1, goal);
        if (winner(out.state, interp) == Player::Machine)
          ++t.machine_wins;
        else if (t.first_loss.empty())
          t.first_loss = text + " seed " + std::to_string(seed);
      }
    }
    return t;
  }();
  return tally;
}

Verdict soundness() {
  const PlayTally& t = play_sweep();
  std::string d = std::to_string(t.machine_wins) + "/" + std::to_string(t.sessions) + " sessions won by machine over " +
                  std::to_string(testing::provable_corpus().size()) + " proofs";
  if (!t.first_loss.empty()) d += " first loss: " + t.first_loss;
  return {t.sessions > 0 && t.machine_wins == t.sessions, d};
}

Verdict copycat() {
  const PlayTally& t = play_sweep();
  return {t.match_sessions > 0 && t.hybrid_steps > 0 && t.deficit_zero == t.hybrid_steps,
          std::to_string(t.deficit_zero) + "/" + std::to_string(t.hybrid_steps) + " hybrid atom steps mirrored in " +
              std::to_string(t.match_sessions) + " Match sessions"};
}

int count_events(const RunResult& r, const std::function<bool(const TraceEvent&)>& pred) {
  int n = 0;
  for (const auto& e : r.trace) n += pred(e);
  return n;
}

bool machine_switch(const TraceEvent& e) {
  bool sent = e.dir == "out" && e.payload.rfind("MOVE ", 0) == 0;
  bool local = e.dir == "internal" && e.payload.rfind("local ", 0) == 0;
  return (sent || local) && e.payload.find("⊤") != std::string::npos && e.payload.ends_with(" switch");
}

Verdict atm() {
  Scenario sc = load_scenario(kSource + "/scenarios/atm");
  auto t0 = std::chrono::steady_clock::now();
  RunResult a = run_scenario(sc);
  double took = seconds_since(t0);
  RunResult b = run_scenario(sc);
  bool same = render_trace(a.trace) == render_trace(b.trace);
  int early_b0 = count_events(a, [](const TraceEvent& e) {
    return e.agent == "credit" && e.tick < kDepositTick && e.payload == "answer credit:1 b0";
  });
  int late_b1 = count_events(a, [](const TraceEvent& e) {
    return e.agent == "credit" && e.tick >= kDepositTick && e.payload == "answer credit:1 b1";
  });
  int other_answers = count_events(a, [](const TraceEvent& e) {
    return e.agent == "credit" && e.payload.rfind("answer credit:1 ", 0) == 0 && e.payload != "answer credit:1 b0" &&
           e.payload != "answer credit:1 b1";
  });
  std::string d;
  bool per_agent = true;
  for (const char* who : {"m", "db", "credit"}) {
    int n = count_events(a, [&](const TraceEvent& e) { return e.agent == who && machine_switch(e); });
    d += std::string(who) + "=" + std::to_string(n) + " ";
    per_agent = per_agent && n == 1;
  }
  bool ok = a.quiescent && same && early_b0 == 1 && late_b1 == 1 && other_answers == 0 && per_agent && took < kAtmSeconds;
  return {ok, "switches " + d + "b0-before=" + std::to_string(early_b0) + " b1-after=" + std::to_string(late_b1) +
                  " deterministic=" + (same ? "yes" : "no") + " time=" + fmt_seconds(took)};
}

Verdict habitat() {
  RunResult r = run_scenario(load_scenario(kSource + "/scenarios/habitat"));
  int answers = count_events(r, [](const TraceEvent& e) {
    return e.agent == "a" && e.payload == "answer user:1 habitat_i3_senegal";
  });
  int wrong = count_events(r, [](const TraceEvent& e) {
    return e.agent == "a" && e.payload.find("answer user:1 habitat_i3_india") != std::string::npos;
  });
  int chose = count_events(r, [](const TraceEvent& e) {
    return e.agent == "user" && e.dir == "in" && e.payload == "MOVE user:1 a user ⊤ . choose:1";
  });
  return {answers == 1 && wrong == 0 && chose == 1,
          "senegal answers=" + std::to_string(answers) + " india answers=" + std::to_string(wrong) +
              " choice delivered=" + std::to_string(chose)};
}

Verdict scheduler() {
  Scenario sc = load_scenario(kSource + "/scenarios/scheduler");
  std::string patterns = slurp(kSource + "/scenarios/scheduler/expect.txt");
  std::string d;
  bool ok = true;
  for (bool socket : {false, true}) {
    RunOptions opts;
    opts.socket = socket;
    RunResult r = run_scenario(sc, opts);
    auto miss = check_trace(r.trace, patterns);
    ok = ok && !miss && r.quiescent;
    d += std::string(socket ? "socket " : "bus ") + (miss ? "missing '" + *miss + "'" : "matched") + "; ";
  }
  return {ok, d};
}

Verdict protocol() {
  std::mt19937_64 rng(424242);
  const std::vector<std::string> pool = {"a", "db", "m", "kim", "credit", "user_1"};
  std::vector<Message> msgs;
  for (int i = 0; i < kMessages; ++i) msgs.push_back(testing::random_message(rng, pool));
  int text_exact = 0;
  for (const auto& m : msgs) {
    std::string line = encode_message(m);
    Message back = decode_message(line);
    back.from = m.from;
    back.to = m.to;
    text_exact += back == m && encode_message(back) == line;
  }
  auto through = [&](Transport& t) {
    std::map<std::string, std::vector<const Message*>> expect;
    for (const auto& m : msgs) {
      t.send(m);
      expect[m.to].push_back(&m);
    }
    int exact = 0;
    for (const auto& [who, list] : expect) {
      auto got = t.drain(who);
      for (std::size_t i = 0; i < got.size() && i < list.size(); ++i)
        exact += got[i] == *list[i] && encode_message(got[i]) == encode_message(*list[i]);
    }
    return t.idle() ? exact : -1;
  };
  InProcessBus bus;
  SocketTransport sock;
  int via_bus = through(bus);
  int via_socket = through(sock);
  return {text_exact == kMessages && via_bus == kMessages && via_socket == kMessages,
          "codec " + std::to_string(text_exact) + ", bus " + std::to_string(via_bus) + ", socket " +
              std::to_string(via_socket) + " of " + std::to_string(kMessages)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"chain reproduction", chain},
      {"decision battery", battery},
      {"verifier golden derivation", golden},
      {"stability cross-check", stability},
      {"soundness in play", soundness},
      {"copycat mirroring", copycat},
      {"ATM end to end", atm},
      {"habitat end to end", habitat},
      {"scheduler discipline", scheduler},
      {"protocol round trip", protocol},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %-28s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
