#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cl9/agentd.hpp"

namespace cl9 {

std::string render_trace(const std::vector<TraceEvent>& trace) {
  std::string out;
  for (const auto& e : trace)
    out += std::to_string(e.tick) + " " + e.agent + " " + e.dir + " " + e.payload + "\n";
  return out;
}

namespace {

std::string strip(std::string s) {
  if (auto c = s.find('%'); c != std::string::npos) s.erase(c);
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& text, int line) {
  try {
    std::size_t used = 0;
    long v = std::stol(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument(text);
    return static_cast<int>(v);
  } catch (const std::logic_error&) {
    throw ParseError("expected a non-negative number, got '" + text + "'", line, 1);
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text) {
  ScenarioConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip(raw);
    if (line.empty()) continue;
    std::istringstream words(line);
    std::string key;
    words >> key;
    std::string rest;
    std::getline(words, rest);
    rest = strip(rest);
    auto next_word = [&](std::string& from) {
      auto sp = from.find(' ');
      std::string w = from.substr(0, sp);
      from = sp == std::string::npos ? std::string() : strip(from.substr(sp + 1));
      return w;
    };
    try {
      if (key == "ticks") {
        cfg.ticks = to_int(rest, lineno);
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(to_int(rest, lineno));
      } else if (key == "query") {
        std::string agent = next_word(rest);
        if (agent.empty() || rest.empty()) throw ParseError("expected 'query <agent> <formula>'", lineno, 1);
        cfg.queries.emplace_back(agent, parse_formula(rest));
      } else if (key == "script") {
        std::string agent = next_word(rest);
        std::string tick = next_word(rest);
        if (agent.empty() || tick.empty() || rest.empty())
          throw ParseError("expected 'script <agent> <tick> <frame>'", lineno, 1);
        Message m = decode_message(rest);
        if (m.kind != Message::Kind::Query && m.kind != Message::Kind::Move)
          throw ParseError("scripted frames must be QUERY or MOVE", lineno, 1);
        if (m.from != agent) throw ParseError("scripted frame must be sent by " + agent, lineno, 1);
        cfg.scripts.push_back({agent, {to_int(tick, lineno), m}});
      } else if (key == "train") {
        std::string agent = next_word(rest);
        std::string atom = next_word(rest);
        if (agent.empty() || atom.empty() || (rest != "true" && rest != "false"))
          throw ParseError("expected 'train <agent> <atom> true|false'", lineno, 1);
        cfg.training[agent].emplace_back(atom, rest == "true");
      } else {
        throw ParseError("unknown directive '" + key + "'", lineno, 1);
      }
    } catch (const ParseError& e) {
      if (e.line() == lineno) throw;
      throw ParseError(e.what(), lineno, 1);
    }
  }
  return cfg;
}

Scenario load_scenario(const std::string& directory) {
  namespace fs = std::filesystem;
  fs::path dir(directory);
  if (!fs::is_directory(dir)) throw Error(directory + ": not a scenario directory");
  Scenario sc;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".cl9") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::set<std::string> names;
  for (const auto& f : files) {
    try {
      AgentSpec spec = parse_agent_file(read_file(f));
      if (!names.insert(spec.name).second) throw Error("agent '" + spec.name + "' declared twice");
      sc.agents.push_back(std::move(spec));
    } catch (const Error& e) {
      throw Error(f.filename().string() + ": " + e.what());
    }
  }
  if (sc.agents.empty()) throw Error(directory + ": no agent files");
  fs::path cfg = dir / "scenario.cfg";
  if (fs::exists(cfg)) {
    try {
      sc.config = parse_scenario_config(read_file(cfg));
    } catch (const Error& e) {
      throw Error("scenario.cfg: " + std::string(e.what()));
    }
  }
  auto require = [&](const std::string& who, AgentKind kind, const char* what) {
    auto it = std::find_if(sc.agents.begin(), sc.agents.end(), [&](const AgentSpec& a) { return a.name == who; });
    if (it == sc.agents.end()) throw Error("scenario.cfg: " + std::string(what) + " names unknown agent '" + who + "'");
    if (it->kind != kind) throw Error("scenario.cfg: agent '" + who + "' cannot take " + what);
  };
  for (const auto& [who, q] : sc.config.queries) require(who, AgentKind::Regular, "query");
  for (const auto& [who, s] : sc.config.scripts) require(who, AgentKind::Super, "script");
  for (const auto& [who, t] : sc.config.training) require(who, AgentKind::Neural, "train");
  return sc;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  RunResult result;
  std::unique_ptr<Transport> transport;
  if (options.socket) {
    transport = std::make_unique<SocketTransport>();
  } else {
    transport = std::make_unique<InProcessBus>();
  }

  std::set<std::string> names;
  for (const auto& a : scenario.agents) names.insert(a.name);
  std::map<std::string, Agent> agents;
  for (const auto& a : scenario.agents) {
    Agent agent(a, names);
    agent.set_budget(options.budget);
    agents.emplace(a.name, std::move(agent));
  }
  int last_script = -1;
  for (const auto& [who, entry] : scenario.config.scripts) {
    agents.at(who).script(entry.first, entry.second);
    last_script = std::max(last_script, entry.first);
  }
  for (const auto& [who, samples] : scenario.config.training) agents.at(who).train(samples);
  for (const auto& [who, goal] : scenario.config.queries) agents.at(who).enqueue_local(goal);

  int tick = 0;
  auto emit = [&](const std::string& agent, const Effects& fx) {
    for (const auto& n : fx.notes) result.trace.push_back({tick, agent, "internal", n});
    for (const auto& m : fx.sent) {
      result.trace.push_back({tick, agent, "out", encode_message(m)});
      transport->send(m);
    }
  };

  std::mt19937_64 rng(options.seed.value_or(scenario.config.seed));
  std::vector<std::string> order(names.begin(), names.end());
  for (tick = 0; tick < scenario.config.ticks; ++tick) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto& name : order) {
      Agent& agent = agents.at(name);
      if (agent.kind() == AgentKind::Super) {
        Effects fx;
        fx.sent = agent.script_step(tick);
        emit(name, fx);
      }
    }
    for (const auto& name : order) {
      Agent& agent = agents.at(name);
      for (const auto& msg : transport->drain(name)) {
        std::string line = encode_message(msg);
        if (msg.kind != Message::Kind::Query && msg.kind != Message::Kind::Move) line += " from " + msg.from;
        result.trace.push_back({tick, name, "in", line});
        emit(name, agent.on_message(msg));
      }
      emit(name, agent.loop_step());
    }
    bool quiet = transport->idle() && tick >= last_script;
    for (const auto& [name, agent] : agents) quiet = quiet && agent.idle();
    if (quiet) {
      result.quiescent = true;
      ++tick;
      break;
    }
  }
  result.ticks_used = tick;
  return result;
}

std::optional<std::string> check_trace(const std::vector<TraceEvent>& trace, std::string_view patterns) {
  std::vector<std::string> lines;
  for (const auto& e : trace) lines.push_back(std::to_string(e.tick) + " " + e.agent + " " + e.dir + " " + e.payload);
  std::istringstream in{std::string(patterns)};
  std::string raw;
  std::size_t pos = 0;
  while (std::getline(in, raw)) {
    std::string pat = strip(raw);
    if (pat.empty()) continue;
    while (pos < lines.size() && lines[pos].find(pat) == std::string::npos) ++pos;
    if (pos == lines.size()) return pat;
    ++pos;
  }
  return std::nullopt;
}

}  // namespace cl9
