#include "cl9/prover.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cl9 {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::Wait: return "Wait";
    case Rule::Choose: return "Choose";
    case Rule::Switch: return "Switch";
    case Rule::Match: return "Match";
  }
  return "Wait";
}

Rule parse_rule(std::string_view name) {
  for (Rule r : {Rule::Wait, Rule::Choose, Rule::Switch, Rule::Match})
    if (to_string(r) == name) return r;
  throw Error("unknown rule '" + std::string(name) + "'");
}

std::vector<HyperFormula> wait_premises(const HyperFormula& h) {
  std::vector<HyperFormula> out;
  for (const auto& o : occurrences(h, filter::env_choices)) {
    if (!o.active_surface()) continue;
    int n = static_cast<int>(h.at(o.path).children.size());
    for (int i = 0; i < n; ++i) out.push_back(apply_env_choice(h, o.path, i));
  }
  for (const auto& o : occurrences(h, filter::env_seqs)) {
    if (!o.active_surface()) continue;
    const Formula& chain = h.at(o.path);
    if (chain.underline + 1 < static_cast<int>(chain.children.size())) out.push_back(advance_underline(h, o.path));
  }
  std::vector<std::pair<std::string, HyperFormula>> keyed;
  for (auto& f : out) keyed.emplace_back(render_debug(f), std::move(f));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());
  out.clear();
  for (auto& [k, f] : keyed) out.push_back(std::move(f));
  return out;
}

std::size_t termination_measure(const HyperFormula& h) {
  std::size_t m = 0;
  if (filter::general_literals(h)) ++m;
  if (is_choice(h.op)) ++m;
  if (is_sequential(h.op)) m += h.children.size() - 1 - h.underline;
  for (const auto& c : h.children) m += termination_measure(c);
  return m;
}

namespace {

// Hybrid witnesses renamed in discovery order, so that failures found under
// one fresh-name choice are reused under any other.
std::string canonical_key(const HyperFormula& h) {
  std::map<std::string, std::string> rename;
  std::function<HyperFormula(const HyperFormula&)> go = [&](const HyperFormula& f) {
    HyperFormula out = f;
    if (!out.witness.empty()) {
      auto [it, inserted] = rename.emplace(out.witness, "");
      if (inserted) it->second = "#" + std::to_string(rename.size());
      out.witness = it->second;
    }
    for (auto& c : out.children) c = go(c);
    return out;
  };
  return render_debug(go(h));
}

std::string fresh_atom(const HyperFormula& h) {
  auto used = all_atoms(h);
  for (int k = 1;; ++k) {
    std::string name = "q" + std::to_string(k);
    if (!used.count(name)) return name;
  }
}

struct Timeout {};

class Search {
 public:
  explicit Search(const ProveOptions& options) : options_(options) {}

  ProofPtr run(const HyperFormula& h) {
    std::string exact = render_debug(h);
    if (auto it = proved_.find(exact); it != proved_.end()) return it->second;
    std::string key = canonical_key(h);
    if (failed_.count(key)) return nullptr;
    if (++steps_ > options_.budget) throw Timeout{};

    ProofPtr result = try_rules(h);
    if (result) {
      proved_.emplace(std::move(exact), result);
    } else {
      failed_.insert(std::move(key));
    }
    return result;
  }

  std::uint64_t steps() const { return steps_; }

 private:
  ProofPtr single(const HyperFormula& h, Rule rule, const HyperFormula& premise, Path path) {
    ProofPtr sub = run(premise);
    if (!sub) return nullptr;
    auto p = std::make_shared<Proof>();
    p->conclusion = h;
    p->rule = rule;
    p->path = std::move(path);
    p->premises.push_back(std::move(sub));
    return p;
  }

  ProofPtr try_rules(const HyperFormula& h) {
    // Choose
    for (const auto& o : occurrences(h, filter::machine_choices)) {
      if (!o.active_surface()) continue;
      int n = static_cast<int>(h.at(o.path).children.size());
      for (int i = 0; i < n; ++i) {
        if (auto p = single(h, Rule::Choose, apply_choose(h, o.path, i), o.path)) {
          std::const_pointer_cast<Proof>(p)->choice = i;
          return p;
        }
      }
    }
    // Match
    auto generals = occurrences(h, filter::general_literals);
    for (const auto& pos : generals) {
      const Formula& pl = h.at(pos.path);
      if (!pos.active_surface() || pl.negated) continue;
      for (const auto& neg : generals) {
        const Formula& nl = h.at(neg.path);
        if (!neg.active_surface() || !nl.negated || nl.atom != pl.atom) continue;
        std::string fresh = fresh_atom(h);
        if (auto p = single(h, Rule::Match, hybridize(h, pos.path, neg.path, fresh), pos.path)) {
          auto mp = std::const_pointer_cast<Proof>(p);
          mp->negative_path = neg.path;
          mp->fresh = fresh;
          return p;
        }
      }
    }
    // Switch
    for (const auto& o : occurrences(h, filter::machine_seqs)) {
      if (!o.active_surface()) continue;
      const Formula& chain = h.at(o.path);
      if (chain.underline + 1 >= static_cast<int>(chain.children.size())) continue;
      if (auto p = single(h, Rule::Switch, advance_underline(h, o.path), o.path)) return p;
    }
    // Wait
    if (!is_stable(h)) return nullptr;
    auto p = std::make_shared<Proof>();
    p->conclusion = h;
    p->rule = Rule::Wait;
    for (const auto& premise : wait_premises(h)) {
      ProofPtr sub = run(premise);
      if (!sub) return nullptr;
      p->premises.push_back(std::move(sub));
    }
    return p;
  }

  ProveOptions options_;
  std::uint64_t steps_ = 0;
  std::unordered_map<std::string, ProofPtr> proved_;
  std::unordered_set<std::string> failed_;
};

}  // namespace

ProveResult prove_hyper(const HyperFormula& goal, const ProveOptions& options) {
  if (!is_balanced(goal)) throw Error("goal hyperformula is not balanced");
  Search search(options);
  ProveResult result;
  try {
    result.proof = search.run(goal);
    result.status = result.proof ? ProveResult::Status::Proved : ProveResult::Status::Unprovable;
  } catch (const Timeout&) {
    result.status = ProveResult::Status::Timeout;
  }
  result.steps = search.steps();
  return result;
}

ProveResult prove(const Formula& goal, const ProveOptions& options) { return prove_hyper(to_hyper(goal), options); }

namespace {

bool verify_node(const Proof& p, std::unordered_set<const Proof*>& done) {
  if (done.count(&p)) return true;
  const HyperFormula& h = p.conclusion;
  if (!is_balanced(h)) return false;
  for (const auto& sub : p.premises)
    if (!sub || !is_balanced(sub->conclusion)) return false;
  try {
    switch (p.rule) {
      case Rule::Wait: {
        if (!is_stable(h)) return false;
        auto expected = wait_premises(h);
        std::vector<std::string> want, got;
        for (const auto& e : expected) want.push_back(render_debug(e));
        for (const auto& sub : p.premises) got.push_back(render_debug(sub->conclusion));
        std::sort(got.begin(), got.end());
        if (want != got) return false;
        break;
      }
      case Rule::Choose:
        if (p.premises.size() != 1 || apply_choose(h, p.path, p.choice) != p.premises[0]->conclusion) return false;
        break;
      case Rule::Switch:
        if (p.premises.size() != 1 || h.at(p.path).op != Op::MachineSeq ||
            advance_underline(h, p.path) != p.premises[0]->conclusion)
          return false;
        break;
      case Rule::Match:
        if (p.premises.size() != 1 || hybridize(h, p.path, p.negative_path, p.fresh) != p.premises[0]->conclusion)
          return false;
        break;
    }
  } catch (const Error&) {
    return false;
  }
  for (const auto& sub : p.premises)
    if (!verify_node(*sub, done)) return false;
  done.insert(&p);
  return true;
}

void count_rules(const Proof& p, std::map<Rule, int>& counts) {
  counts[p.rule]++;
  for (const auto& sub : p.premises) count_rules(*sub, counts);
}

void serialize_node(const Proof& p, int depth, std::ostringstream& out) {
  out << std::string(2 * depth, ' ') << to_string(p.rule) << " @" << render_path(p.path) << " [";
  switch (p.rule) {
    case Rule::Wait: out << "premises=" << p.premises.size(); break;
    case Rule::Choose: out << "i=" << p.choice; break;
    case Rule::Switch: break;
    case Rule::Match: out << "neg=" << render_path(p.negative_path) << " fresh=" << p.fresh; break;
  }
  out << "] " << render_debug(p.conclusion) << "\n";
  for (const auto& sub : p.premises) serialize_node(*sub, depth + 1, out);
}

}  // namespace

bool verify(const Proof& proof) {
  std::unordered_set<const Proof*> done;
  return verify_node(proof, done);
}

std::size_t proof_size(const Proof& proof) {
  std::size_t n = 1;
  for (const auto& sub : proof.premises) n += proof_size(*sub);
  return n;
}

std::map<Rule, int> rule_counts(const Proof& proof) {
  std::map<Rule, int> counts;
  count_rules(proof, counts);
  return counts;
}

std::string serialize(const Proof& proof) {
  std::ostringstream out;
  serialize_node(proof, 0, out);
  return out.str();
}

}  // namespace cl9
