// cl9: prove formulas, check agent files, run scenarios, play sessions.
//
// Exit codes: 0 success, 1 negative answer (unprovable, failed check or
// assertion), 2 search budget exhausted, 64 usage or syntax error,
// 74 file I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cl9/cl9.h"

namespace {

constexpr int kExitNo = 1;
constexpr int kExitTimeout = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIO = 74;

struct CString {
  char* p = nullptr;
  ~CString() { cl9_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct ProofHandle {
  cl9_proof* p = nullptr;
  ~ProofHandle() { cl9_proof_free(p); }
};

int fail(int code, const std::string& what) {
  std::cerr << "cl9: " << what << "\n";
  return code;
}

int exit_for(cl9_status st) {
  switch (st) {
    case CL9_OK: return 0;
    case CL9_UNPROVABLE:
    case CL9_ERR_MISMATCH: return kExitNo;
    case CL9_TIMEOUT: return kExitTimeout;
    case CL9_ERR_IO: return kExitIO;
    default: return kExitUsage;
  }
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

int cmd_prove(const std::string& formula, bool verify, uint64_t budget) {
  ProofHandle proof;
  cl9_status st = cl9_prove(formula.c_str(), budget, &proof.p);
  if (st == CL9_UNPROVABLE) {
    std::cout << "UNPROVABLE\n";
    return kExitNo;
  }
  if (st == CL9_TIMEOUT) {
    std::cout << "TIMEOUT\n";
    return fail(kExitTimeout, cl9_last_error());
  }
  if (st != CL9_OK) return fail(exit_for(st), cl9_last_error());
  CString text{cl9_proof_render(proof.p)};
  std::cout << "PROVABLE (" << cl9_proof_size(proof.p) << " nodes)\n" << text.str();
  if (verify) {
    if (!cl9_proof_verify(proof.p)) return fail(kExitNo, "proof failed verification");
    std::cout << "verified\n";
  }
  return 0;
}

int cmd_check(const std::vector<std::string>& paths) {
  int worst = 0;
  for (const auto& p : paths) {
    CString report;
    cl9_status st = cl9_check_path(p.c_str(), &report.p);
    if (st == CL9_OK) {
      std::cout << report.str();
    } else {
      std::cerr << (report.p ? report.str() : p + ": " + cl9_last_error() + "\n");
      worst = kExitNo;
    }
  }
  return worst;
}

int cmd_run(const std::string& dir, int64_t seed, uint64_t budget, const std::string& transport,
            const std::string& trace_file, const std::string& assert_file) {
  if (transport != "bus" && transport != "socket") return fail(kExitUsage, "unknown transport '" + transport + "'");
  std::string patterns;
  if (!assert_file.empty() && !read_file(assert_file, patterns)) return fail(kExitIO, "cannot read " + assert_file);
  cl9_run* raw = nullptr;
  cl9_status st = cl9_run_scenario(dir.c_str(), seed, transport == "socket", budget, &raw);
  if (st != CL9_OK) return fail(st == CL9_ERR_PARSE ? kExitUsage : exit_for(st), cl9_last_error());
  std::unique_ptr<cl9_run, void (*)(cl9_run*)> run(raw, cl9_run_free);
  CString trace{cl9_run_trace(run.get())};
  if (trace_file.empty()) {
    std::cout << trace.str();
  } else {
    std::ofstream out(trace_file, std::ios::binary);
    out << trace.str();
    if (!out) return fail(kExitIO, "cannot write " + trace_file);
  }
  std::cerr << "ticks: " << cl9_run_ticks(run.get()) << (cl9_run_quiescent(run.get()) ? " (quiescent)" : " (tick limit)")
            << "\n";
  if (!assert_file.empty()) {
    if (cl9_run_assert(run.get(), patterns.c_str()) != CL9_OK) return fail(kExitNo, cl9_last_error());
    std::cerr << "assertions hold\n";
  }
  return 0;
}

int cmd_play(const std::string& formula, const std::vector<std::string>& valuation, uint64_t budget) {
  ProofHandle proof;
  cl9_status st = cl9_prove(formula.c_str(), budget, &proof.p);
  if (st == CL9_UNPROVABLE) return fail(kExitNo, "formula is not provable; nothing to play");
  if (st != CL9_OK) return fail(exit_for(st), cl9_last_error());
  cl9_play* raw = nullptr;
  if (cl9_play_open(proof.p, &raw) != CL9_OK) return fail(kExitUsage, cl9_last_error());
  std::unique_ptr<cl9_play, void (*)(cl9_play*)> play(raw, cl9_play_free);
  for (const auto& v : valuation) {
    auto eq = v.find('=');
    if (eq == std::string::npos) return fail(kExitUsage, "valuation entries look like atom=0|1");
    std::string atom = v.substr(0, eq);
    if (cl9_play_set_valuation(play.get(), atom.c_str(), v.substr(eq + 1) == "1") != CL9_OK)
      return fail(kExitUsage, cl9_last_error());
  }
  auto show = [&] {
    CString view{cl9_play_view(play.get())};
    std::cout << "view: " << view.str() << "\n";
  };
  show();
  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (line == "quit") break;
    if (line == "view") {
      show();
      continue;
    }
    CString reply;
    if (cl9_play_move(play.get(), line.c_str(), &reply.p) != CL9_OK) {
      std::cout << "rejected: " << cl9_last_error() << "\n";
      continue;
    }
    std::istringstream moves(reply.str());
    for (std::string m; std::getline(moves, m);) std::cout << "machine: " << m << "\n";
    show();
  }
  CString winner;
  if (cl9_play_finish(play.get(), &winner.p) != CL9_OK) return fail(kExitUsage, cl9_last_error());
  std::cout << "\nwinner: " << winner.str() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cl9: computability logic prover and agent runtime"};
  app.require_subcommand(1);
  int64_t seed = -1;
  uint64_t budget = 0;
  std::string trace_file;
  app.add_option("--seed", seed, "scenario seed (default: from scenario.cfg)");
  app.add_option("--budget", budget, "proof search node budget");
  app.add_option("--trace", trace_file, "write the scenario trace to this file");

  std::string formula;
  bool verify = false;
  auto* prove = app.add_subcommand("prove", "search for a proof");
  prove->add_option("formula", formula)->required();
  prove->add_flag("--verify", verify, "re-check the proof");
  prove->fallthrough();

  std::vector<std::string> paths;
  auto* check = app.add_subcommand("check", "parse agent files or scenario directories");
  check->add_option("paths", paths)->required();

  std::string dir, transport = "bus", assert_file;
  auto* run = app.add_subcommand("run", "run a scenario directory");
  run->add_option("dir", dir)->required();
  run->add_option("--transport", transport, "bus or socket");
  run->add_option("--assert", assert_file, "ordered trace patterns to check");
  run->fallthrough();

  std::vector<std::string> valuation;
  auto* play = app.add_subcommand("play", "play the environment against a proof's strategy");
  play->add_option("formula", formula)->required();
  play->add_option("--valuation", valuation, "elementary atom values, e.g. p=1")->delimiter(',');
  play->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*prove) return cmd_prove(formula, verify, budget);
  if (*check) return cmd_check(paths);
  if (*run) return cmd_run(dir, seed, budget, transport, trace_file, assert_file);
  return cmd_play(formula, valuation, budget);
}
