#include "cl9/cl9.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cl9/agentd.hpp"

struct cl9_proof {
  cl9::ProofPtr proof;
};

struct cl9_run {
  cl9::RunResult result;
};

struct cl9_play {
  cl9::Session session;
  cl9::Interpretation interp = cl9::Interpretation::constant(cl9::Player::Machine);
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cl9_status set_error(cl9_status st, const std::string& msg) {
  last_error = msg;
  return st;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
cl9_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const cl9::ParseError& e) {
    return set_error(CL9_ERR_PARSE, e.what());
  } catch (const cl9::IllegalMove& e) {
    return set_error(CL9_ERR_ILLEGAL_MOVE, e.what());
  } catch (const cl9::Error& e) {
    return set_error(CL9_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return set_error(CL9_ERR_INTERNAL, e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

extern "C" {

const char* cl9_last_error(void) { return last_error.c_str(); }

void cl9_string_free(char* s) { std::free(s); }

cl9_status cl9_normalize(const char* formula, char** out) {
  if (!formula || !out) return set_error(CL9_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = dup(cl9::pretty(cl9::parse_formula(formula)));
    return CL9_OK;
  });
}

cl9_status cl9_prove(const char* formula, uint64_t budget, cl9_proof** out) {
  if (!formula || !out) return set_error(CL9_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    cl9::ProveOptions opts;
    if (budget) opts.budget = budget;
    cl9::ProveResult r = cl9::prove(cl9::parse_formula(formula), opts);
    if (r.status == cl9::ProveResult::Status::Timeout)
      return set_error(CL9_TIMEOUT, "search budget exhausted after " + std::to_string(r.steps) + " steps");
    if (!r.proved()) return set_error(CL9_UNPROVABLE, "no proof exists");
    *out = new cl9_proof{r.proof};
    return CL9_OK;
  });
}

char* cl9_proof_render(const cl9_proof* proof) { return proof ? dup(cl9::serialize(*proof->proof)) : nullptr; }

int cl9_proof_verify(const cl9_proof* proof) { return proof && cl9::verify(*proof->proof) ? 1 : 0; }

size_t cl9_proof_size(const cl9_proof* proof) { return proof ? cl9::proof_size(*proof->proof) : 0; }

int cl9_proof_rule_count(const cl9_proof* proof, cl9_rule rule) {
  if (!proof) return 0;
  auto counts = cl9::rule_counts(*proof->proof);
  auto it = counts.find(static_cast<cl9::Rule>(rule));
  return it == counts.end() ? 0 : it->second;
}

void cl9_proof_free(cl9_proof* proof) { delete proof; }

cl9_status cl9_verify_derivation(const char* text) {
  if (!text) return set_error(CL9_ERR_INVALID, "null argument");
  return guarded([&] {
    if (!cl9::verify_plain(cl9::parse_plain_derivation(text))) return set_error(CL9_ERR_MISMATCH, "derivation rejected");
    return CL9_OK;
  });
}

cl9_status cl9_check_path(const char* path, char** report) {
  if (!path || !report) return set_error(CL9_ERR_INVALID, "null argument");
  *report = nullptr;
  std::string p(path);
  std::error_code ec;
  if (!std::filesystem::exists(p, ec)) return set_error(CL9_ERR_IO, p + ": no such file or directory");
  try {
    std::string ok;
    if (std::filesystem::is_directory(p, ec)) {
      cl9::Scenario sc = cl9::load_scenario(p);
      ok = p + ": " + std::to_string(sc.agents.size()) + " agents, scenario ok\n";
    } else {
      cl9::AgentSpec spec = cl9::parse_agent_file(read_file(p));
      ok = p + ": agent " + spec.name + " (" + std::string(cl9::to_string(spec.kind)) + "), " +
           std::to_string(spec.kb.size()) + " entries ok\n";
    }
    *report = dup(ok);
    last_error.clear();
    return CL9_OK;
  } catch (const std::ios_base::failure& e) {
    *report = dup(p + ": " + e.what() + "\n");
    return set_error(CL9_ERR_IO, e.what());
  } catch (const std::exception& e) {
    *report = dup(p + ": " + e.what() + "\n");
    return set_error(CL9_ERR_PARSE, e.what());
  }
}

cl9_status cl9_run_scenario(const char* directory, int64_t seed, int use_socket, uint64_t budget, cl9_run** out) {
  if (!directory || !out) return set_error(CL9_ERR_INVALID, "null argument");
  *out = nullptr;
  cl9::Scenario sc;
  try {
    sc = cl9::load_scenario(directory);
  } catch (const std::exception& e) {
    return set_error(CL9_ERR_PARSE, e.what());
  }
  return guarded([&] {
    cl9::RunOptions opts;
    opts.socket = use_socket != 0;
    if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
    if (budget) opts.budget = budget;
    *out = new cl9_run{cl9::run_scenario(sc, opts)};
    return CL9_OK;
  });
}

char* cl9_run_trace(const cl9_run* run) { return run ? dup(cl9::render_trace(run->result.trace)) : nullptr; }

int cl9_run_quiescent(const cl9_run* run) { return run && run->result.quiescent ? 1 : 0; }

int cl9_run_ticks(const cl9_run* run) { return run ? run->result.ticks_used : 0; }

cl9_status cl9_run_assert(const cl9_run* run, const char* patterns) {
  if (!run || !patterns) return set_error(CL9_ERR_INVALID, "null argument");
  if (auto miss = cl9::check_trace(run->result.trace, patterns))
    return set_error(CL9_ERR_MISMATCH, "trace has no line matching '" + *miss + "' in order");
  last_error.clear();
  return CL9_OK;
}

void cl9_run_free(cl9_run* run) { delete run; }

cl9_status cl9_play_open(const cl9_proof* proof, cl9_play** out) {
  if (!proof || !out) return set_error(CL9_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto play = std::make_unique<cl9_play>();
    play->session.id = "play:1";
    play->session.formula = cl9::dehybridize(proof->proof->conclusion);
    play->session.state = cl9::GameState(play->session.formula);
    play->session.parts.push_back({{}, play->session.formula, {}, false});
    cl9::attach_proof(play->session, proof->proof);
    cl9::advance(play->session);
    *out = play.release();
    return CL9_OK;
  });
}

char* cl9_play_view(const cl9_play* play) {
  return play ? dup(cl9::render_debug(play->session.state.view())) : nullptr;
}

cl9_status cl9_play_move(cl9_play* play, const char* command, char** reply) {
  if (!play || !command || !reply) return set_error(CL9_ERR_INVALID, "null argument");
  *reply = nullptr;
  return guarded([&] {
    std::istringstream in(command);
    std::string verb, path_text, arg;
    in >> verb >> path_text;
    std::getline(in >> std::ws, arg);
    if (path_text.empty()) throw cl9::ParseError("expected '<verb> <path> ...'", 1, 1);
    cl9::GameState& st = play->session.state;
    cl9::Path path = st.to_original(cl9::parse_path(path_text));
    cl9::Move m;
    if (verb == "choose") {
      std::size_t used = 0;
      int i = -1;
      try {
        i = std::stoi(arg, &used);
      } catch (const std::exception&) {
      }
      if (arg.empty() || used != arg.size() || i < 0) throw cl9::ParseError("choose needs a component index", 1, 1);
      m = cl9::Move::choose(cl9::Player::Environment, path, i);
    } else if (verb == "switch") {
      m = cl9::Move::switch_at(cl9::Player::Environment, path);
    } else if (verb == "atom") {
      if (arg.empty() || arg.find_first_of(" \t") != std::string::npos)
        throw cl9::ParseError("atom needs one word of text", 1, 1);
      m = cl9::Move::atom(cl9::Player::Environment, path, arg);
    } else {
      throw cl9::ParseError("unknown move '" + verb + "'", 1, 1);
    }
    cl9::StepResult r = cl9::receive(play->session, m);
    std::string text;
    for (const auto& e : r.emitted) text += cl9::render_move(e) + "\n";
    *reply = dup(text);
    return CL9_OK;
  });
}

cl9_status cl9_play_set_valuation(cl9_play* play, const char* atom, int value) {
  if (!play || !atom || !cl9::is_identifier(atom)) return set_error(CL9_ERR_INVALID, "bad atom name");
  play->interp.valuation[atom] = value != 0;
  return CL9_OK;
}

cl9_status cl9_play_finish(cl9_play* play, char** winner) {
  if (!play || !winner) return set_error(CL9_ERR_INVALID, "null argument");
  *winner = nullptr;
  return guarded([&] {
    play->session.state.finish();
    play->session.closed = true;
    cl9::Player w = cl9::winner(play->session.state, play->interp);
    *winner = dup(w == cl9::Player::Machine ? "machine" : "environment");
    return CL9_OK;
  });
}

void cl9_play_free(cl9_play* play) { delete play; }

}  // extern "C"
