#include <fstream>
#include <regex>
#include <sstream>

#include "cl9/agentd.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cl9;

namespace {

const std::string kScenarios = std::string(CL9_SOURCE_DIR) + "/scenarios/";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AgentSpec atm_agent(const std::string& name) { return parse_agent_file(slurp(kScenarios + "atm/" + name + ".cl9")); }

bool noted(const Effects& fx, const std::string& text) {
  for (const auto& n : fx.notes)
    if (n.find(text) != std::string::npos) return true;
  return false;
}

const Message* sent_to(const Effects& fx, const std::string& to, Message::Kind kind) {
  for (const auto& m : fx.sent)
    if (m.to == to && m.kind == kind) return &m;
  return nullptr;
}

Message frame(const std::string& line) { return decode_message(line); }

const char* kAnimals =
    "(animal_i1_lion + animal_i1_tiger) & (animal_i2_lion + animal_i2_tiger) & (animal_i3_lion + animal_i3_tiger)";

}  // namespace

TEST_CASE("wire frames") {
  Message q = Message::query("credit:2", "credit", "db", "b0 @ b1 @ b2");
  CHECK(encode_message(q) == "QUERY credit:2 credit db b0 @ b1 @ b2");
  CHECK(decode_message(encode_message(q)) == q);

  Message m = Message::move_msg("m:1", "kim", "m", Move::atom(Player::Environment, {1, 0, 2}, "x"));
  CHECK(encode_message(m) == "MOVE m:1 kim m ⊥ 1.0.2 atom:x");
  CHECK(decode_message(encode_message(m)) == m);

  CHECK(encode_message(Message::ok("a:1", "b", "a")) == "OK a:1");
  CHECK(encode_message(Message::fail("a:1", "b", "a", "unprovable")) == "FAIL a:1 unprovable");
  CHECK(encode_message(Message::done("a:1", "b", "a")) == "DONE a:1");
  CHECK(make_session_id("credit", 7) == "credit:7");
}

TEST_CASE("malformed frames are rejected with a position") {
  for (const char* bad : {"", "HELLO x:1", "QUERY x:1 a b", "MOVE x:1 a b ⊤ . leap", "OK", "OK x:1 extra",
                          "FAIL x:1", "DONE nocolon", "MOVE x:1 a b ⊤ 1..2 switch", "QUERY x:1 a  b p"}) {
    INFO(bad);
    try {
      decode_message(bad);
      FAIL("accepted");
    } catch (const ParseError& e) {
      CHECK(e.column() >= 1);
    }
  }
  try {
    decode_message("MOVE x:1 a b ⊤ . leap");
  } catch (const ParseError& e) {
    CHECK(e.column() == 14);
  }
}

TEST_CASE("generated frames round trip through the codec") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> pool = {"a", "b", "c"};
  for (int i = 0; i < 2000; ++i) {
    Message m = testing::random_message(rng, pool);
    std::string line = encode_message(m);
    Message back = decode_message(line);
    back.from = m.from;
    back.to = m.to;
    CHECK(back == m);
    CHECK(encode_message(back) == line);
  }
}

TEST_CASE("transports keep per-pair order") {
  auto exercise = [](Transport& t) {
    CHECK(t.idle());
    for (int i = 0; i < 50; ++i) {
      t.send(Message::query("a:" + std::to_string(i), "a", "b", "p"));
      t.send(Message::ok("c:" + std::to_string(i), "c", "b"));
    }
    CHECK_FALSE(t.idle());
    auto got = t.drain("b");
    REQUIRE(got.size() == 100);
    int from_a = 0, from_c = 0;
    for (const auto& m : got) {
      if (m.from == "a") CHECK(m.session == "a:" + std::to_string(from_a++));
      if (m.from == "c") CHECK(m.session == "c:" + std::to_string(from_c++));
      CHECK(m.to == "b");
    }
    CHECK(t.drain("b").empty());
    CHECK(t.idle());
  };
  InProcessBus bus;
  exercise(bus);
  SocketTransport sock;
  exercise(sock);
}

TEST_CASE("db answers credit's query and requeues after its KB moves") {
  Agent db(atm_agent("db"), {"credit", "m"});
  Effects in = db.on_message(frame("QUERY credit:2 credit db b0 @ b1 @ b2"));
  CHECK(in.sent.empty());
  CHECK(db.income().size() == 1);

  Effects solved = db.loop_step();
  CHECK(noted(solved, "answer credit:2 b0"));
  CHECK(db.solved().size() == 1);
  CHECK(db.income().empty());
  const Message* activation = sent_to(solved, "m", Message::Kind::Query);
  REQUIRE(activation);
  CHECK(activation->body == "d0 @ d1 @ d2");

  Effects quiet = db.loop_step();
  CHECK(quiet.sent.empty());
  CHECK(noted(quiet, "case2 idle credit:2 rev=0"));
  CHECK(db.idle());

  Effects moved = db.on_message(Message::move_msg(activation->session, "m", "db", Move::switch_at(Player::Machine, {})));
  CHECK(db.kb().revision == 1);
  const Message* pushed = sent_to(moved, "credit", Message::Kind::Move);
  REQUIRE(pushed);
  // Wire paths are relative to the consumer's session.
  CHECK(encode_message(*pushed) == "MOVE credit:2 db credit ⊤ . switch");
  CHECK(noted(moved, "credit:2 Wait case6"));
  CHECK_FALSE(db.idle());
  Effects requeued = db.loop_step();
  CHECK(noted(requeued, "case2 requeue credit:2 rev=0->1"));
  CHECK(db.income().size() == 1);
  CHECK(db.solved().empty());
}

TEST_CASE("empty queues idle without effects") {
  Agent db(atm_agent("db"), {"credit", "m"});
  Effects first = db.loop_step();
  CHECK(first.sent.empty());
  CHECK(noted(first, "case3 idle"));
  for (int i = 0; i < 3; ++i) {
    Effects again = db.loop_step();
    CHECK(again.sent.empty());
    CHECK(again.notes.empty());
  }
  CHECK(db.idle());
}

TEST_CASE("kim's deposit bumps m's knowledgebase revision") {
  Agent m(atm_agent("m"), {"db", "kim"});
  m.on_message(frame("QUERY db:1 db m d0 @ d1 @ d2"));
  Effects fx = m.loop_step();
  const Message* q = sent_to(fx, "kim", Message::Kind::Query);
  REQUIRE(q);
  CHECK(m.kb().revision == 0);
  m.on_message(Message::move_msg(q->session, "kim", "m", Move::switch_at(Player::Machine, {})));
  CHECK(m.kb().revision == 1);
}

TEST_CASE("bad traffic is answered with FAIL") {
  Agent db(atm_agent("db"), {"credit", "m"});
  Effects stale = db.on_message(frame("MOVE zz:9 credit db ⊥ . switch"));
  REQUIRE(stale.sent.size() == 1);
  CHECK(stale.sent[0].kind == Message::Kind::Fail);
  CHECK(stale.sent[0].body == "unknown-session");

  db.on_message(frame("QUERY credit:2 credit db b0 @ b1 @ b2"));
  Effects dup = db.on_message(frame("QUERY credit:2 credit db b0 @ b1 @ b2"));
  REQUIRE(dup.sent.size() == 1);
  CHECK(dup.sent[0].body == "duplicate-session");
  db.loop_step();

  const Session* s = db.session("credit:2");
  REQUIRE(s);
  HyperFormula before = s->state.view();
  Effects illegal = db.on_message(frame("MOVE credit:2 credit db ⊥ 4 switch"));
  REQUIRE(illegal.sent.size() == 1);
  CHECK(illegal.sent[0].body == "illegal-move");
  CHECK(db.session("credit:2")->state.view() == before);

  Effects unprovable = db.on_message(frame("QUERY credit:3 credit db b2"));
  CHECK(unprovable.sent.empty());
  Effects fx = db.loop_step();
  const Message* f = sent_to(fx, "credit", Message::Kind::Fail);
  REQUIRE(f);
  CHECK(f->body == "unprovable");

  Agent lonely(atm_agent("db"), {"credit"});
  lonely.on_message(frame("QUERY credit:2 credit db b0 @ b1 @ b2"));
  Effects unknown = lonely.loop_step();
  const Message* u = sent_to(unknown, "credit", Message::Kind::Fail);
  REQUIRE(u);
  CHECK(u->body == "unknown-agent");
}

TEST_CASE("search budget exhaustion fails the query") {
  Agent db(atm_agent("db"), {"credit", "m"});
  db.set_budget(1);
  db.on_message(frame("QUERY credit:2 credit db b0 @ b1 @ b2"));
  Effects fx = db.loop_step();
  const Message* f = sent_to(fx, "credit", Message::Kind::Fail);
  REQUIRE(f);
  CHECK(f->body == "timeout");
}

TEST_CASE("completely solved queries are reported OK") {
  Agent q(parse_agent_file("agent q. x0."), {"p"});
  q.on_message(frame("QUERY p:2 p q x0"));
  Effects fx = q.loop_step();
  const Message* ok = sent_to(fx, "p", Message::Kind::Ok);
  REQUIRE(ok);
  CHECK(ok->session == "p:2");
  CHECK(q.solved().empty());
}

TEST_CASE("super agents replay their script") {
  Agent kim(atm_agent("kim"), {"m"});
  CHECK(kim.script_step(3).empty());
  Message deposit = frame("MOVE m:1 kim m ⊤ . switch");
  kim.script(3, deposit);
  CHECK(kim.script_step(2).empty());
  auto at3 = kim.script_step(3);
  REQUIRE(at3.size() == 1);
  CHECK(at3[0] == deposit);
  CHECK(kim.idle());
}

TEST_CASE("neural agents memorize and answer") {
  Agent d(parse_agent_file("agent neural d."), {"a"});
  CHECK_FALSE(d.answer("animal_i3_lion"));
  d.train({{"animal_i3_lion", true}});
  CHECK(d.answer("animal_i3_lion") == true);
  d.train({});
  CHECK(d.oracle().size() == 1);
  d.train({{"animal_i3_lion", false}, {"animal_i3_lion", true}, {"animal_i3_tiger", false}});
  CHECK(d.answer("animal_i3_lion") == true);
  CHECK(d.answer("animal_i3_tiger") == false);

  Agent regular(atm_agent("db"));
  CHECK_THROWS_AS(regular.train({{"x", true}}), Error);
}

TEST_CASE("neural agents choose by their oracle") {
  Agent d(parse_agent_file("agent neural d."), {"a"});
  d.train({{"animal_i1_lion", false},
           {"animal_i1_tiger", true},
           {"animal_i2_lion", true},
           {"animal_i2_tiger", false},
           {"animal_i3_lion", true},
           {"animal_i3_tiger", false}});
  d.on_message(Message::query("a:1", "a", "d", kAnimals));
  d.loop_step();
  Effects third = d.on_message(frame("MOVE a:1 a d ⊥ . choose:2"));
  const Message* reply = sent_to(third, "a", Message::Kind::Move);
  REQUIRE(reply);
  CHECK(encode_message(*reply) == "MOVE a:1 d a ⊤ 2 choose:0");

  Agent forgetful(parse_agent_file("agent neural d."), {"a"});
  forgetful.train({{"animal_i1_lion", false}, {"animal_i1_tiger", true}, {"animal_i3_lion", true},
                   {"animal_i3_tiger", false}});
  forgetful.on_message(Message::query("a:1", "a", "d", kAnimals));
  Effects fx = forgetful.loop_step();
  const Message* f = sent_to(fx, "a", Message::Kind::Fail);
  REQUIRE(f);
  CHECK(f->body == "oracle-missing");
}

TEST_CASE("training waits while a query is in flight") {
  Agent d(parse_agent_file("agent neural d."), {"a"});
  d.train({{"animal_i3_lion", true}, {"animal_i3_tiger", false}});
  d.on_message(Message::query("a:1", "a", "d", "animal_i3_lion + animal_i3_tiger"));
  d.train({{"animal_i3_lion", false}});
  CHECK(d.answer("animal_i3_lion") == true);
  CHECK_FALSE(d.idle());
  d.loop_step();
  d.loop_step();
  CHECK(d.answer("animal_i3_lion") == false);
}

TEST_CASE("knowledgebase change detection") {
  KBState kb;
  QueryRecord q;
  q.snapshot = 0;
  CHECK_FALSE(kb_changed(kb, q));
  kb.revision = 2;
  CHECK(kb_changed(kb, q));
}

TEST_CASE("scenario configuration") {
  ScenarioConfig cfg = parse_scenario_config(
      "% comment\nticks 12\nseed 9\nquery credit b0 @ b1\nscript kim 3 MOVE m:1 kim m ⊤ . switch\ntrain d x true\n");
  CHECK(cfg.ticks == 12);
  CHECK(cfg.seed == 9);
  REQUIRE(cfg.queries.size() == 1);
  CHECK(cfg.queries[0].second == parse_formula("b0 @ b1"));
  REQUIRE(cfg.scripts.size() == 1);
  CHECK(cfg.scripts[0].second.first == 3);
  CHECK(cfg.training.at("d").size() == 1);

  for (const char* bad : {"ticks many", "frobnicate 1", "script kim 3 MOVE m:1 m kim ⊤ . switch",
                          "script kim 3 OK m:1", "train d x maybe", "query credit", "seed -1"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_scenario_config(bad), ParseError);
  }
  try {
    parse_scenario_config("ticks 3\n\nbogus\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("scenario loading") {
  Scenario atm = load_scenario(kScenarios + "atm");
  CHECK(atm.agents.size() == 4);
  CHECK(atm.config.seed == 11);
  CHECK_THROWS_AS(load_scenario(kScenarios + "does-not-exist"), Error);
}

TEST_CASE("shipped scenarios meet their expectations on both transports") {
  for (const char* name : {"atm", "habitat", "scheduler", "quiet"}) {
    Scenario sc = load_scenario(kScenarios + name);
    std::string patterns = slurp(kScenarios + name + "/expect.txt");
    std::string first;
    for (bool socket : {false, true}) {
      INFO(name << (socket ? " socket" : " bus"));
      RunOptions opts;
      opts.socket = socket;
      RunResult r = run_scenario(sc, opts);
      CHECK(r.quiescent);
      auto miss = check_trace(r.trace, patterns);
      CHECK_MESSAGE(!miss, (miss ? *miss : ""));
      std::string text = render_trace(r.trace);
      if (first.empty())
        first = text;
      else
        CHECK(text == first);
      CHECK(render_trace(run_scenario(sc, opts).trace) == text);
    }
  }
}

TEST_CASE("scenario outcomes do not depend on the seed") {
  for (const char* name : {"atm", "habitat", "scheduler", "quiet"}) {
    Scenario sc = load_scenario(kScenarios + name);
    std::string patterns = slurp(kScenarios + name + "/expect.txt");
    for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
      INFO(name << " seed " << seed);
      RunOptions opts;
      opts.seed = seed;
      RunResult r = run_scenario(sc, opts);
      CHECK(r.quiescent);
      auto miss = check_trace(r.trace, patterns);
      CHECK_MESSAGE(!miss, (miss ? *miss : ""));
    }
  }
}

TEST_CASE("queue discipline in traces") {
  for (const char* name : {"atm", "scheduler", "quiet"}) {
    RunResult r = run_scenario(load_scenario(kScenarios + name));
    std::regex requeue(R"(case2 requeue \S+ rev=(\d+)->(\d+))");
    int last_tick = 0;
    for (const auto& e : r.trace) {
      CHECK(e.tick >= last_tick);
      last_tick = e.tick;
      std::smatch m;
      if (std::regex_search(e.payload, m, requeue)) CHECK(m[1].str() != m[2].str());
    }
  }
  RunResult quiet = run_scenario(load_scenario(kScenarios + "quiet"));
  CHECK_FALSE(check_trace(quiet.trace, "q in QUERY p:2\nq internal answer p:2 x0\nq internal case2 idle p:2 rev=0"));
  // QI is served first in, first out.
  RunResult s = run_scenario(load_scenario(kScenarios + "scheduler"));
  CHECK_FALSE(check_trace(s.trace, "s internal case1 client:1\ns internal case1 client:2"));
}

TEST_CASE("check_trace matches ordered substrings") {
  std::vector<TraceEvent> t = {{0, "a", "out", "QUERY a:1 a b p"}, {1, "b", "internal", "answer a:1 p"}};
  CHECK_FALSE(check_trace(t, "a out QUERY\n% note\nanswer a:1"));
  CHECK(check_trace(t, "answer a:1\na out QUERY") == std::string("a out QUERY"));
  CHECK(render_trace(t) == "0 a out QUERY a:1 a b p\n1 b internal answer a:1 p\n");
}
