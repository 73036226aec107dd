#ifndef CL9_HYPER_HPP
#define CL9_HYPER_HPP

#include <functional>
#include <string>
#include <vector>

#include "cl9/formula.hpp"

namespace cl9 {

// Hyperformulas reuse the Formula node: `underline` marks the underlined
// component of each sequential node, `witness` turns a literal into a hybrid.
using HyperFormula = Formula;
// Built only from elementary literals, constants, /\ and \/.
using ElementaryFormula = Formula;

enum class Activity {
  Active,     // every enclosing chain component is underlined
  Abandoned,  // some enclosing chain component lies left of its underline
  Pending,    // some enclosing chain component lies right of its underline
};

struct Occurrence {
  Path path;
  bool surface = false;
  Activity activity = Activity::Active;

  bool active_surface() const { return surface && activity == Activity::Active; }
};

using NodeFilter = std::function<bool(const Formula&)>;

namespace filter {
bool literals(const Formula& f);
bool general_literals(const Formula& f);  // non-hybrid general literals
bool hybrid_literals(const Formula& f);
bool choices(const Formula& f);
bool env_choices(const Formula& f);
bool machine_choices(const Formula& f);
bool sequentials(const Formula& f);
bool env_seqs(const Formula& f);
bool machine_seqs(const Formula& f);
}  // namespace filter

/// Heads underlined, hybrids dropped.
HyperFormula to_hyper(const Formula& f);
/// Hybrids replaced by their general component; underlines kept.
Formula dehybridize(const HyperFormula& h);

/// Matching nodes in pre-order (left to right).
std::vector<Occurrence> occurrences(const HyperFormula& h, const NodeFilter& select);
Occurrence classify(const HyperFormula& h, const Path& path);

Formula capitalization(const HyperFormula& h);
ElementaryFormula elementarization(const HyperFormula& h);
bool is_tautology(const ElementaryFormula& e);
bool is_stable(const HyperFormula& h);
bool is_balanced(const HyperFormula& h);

/// `path` must address an active hybrid literal of a balanced h.
bool widowed(const HyperFormula& h, const Path& path);
/// Path of the other occurrence of the hybrid atom at `path`.
Path hybrid_twin(const HyperFormula& h, const Path& path);

/// Replace the active surface ⊔ at `path` by its i-th component.
HyperFormula apply_choose(const HyperFormula& h, const Path& path, int i);
/// Same for an active surface ⊓ (Wait premises, environment choices).
HyperFormula apply_env_choice(const HyperFormula& h, const Path& path, int i);
/// Move the underline of the active surface chain at `path` one step right.
HyperFormula advance_underline(const HyperFormula& h, const Path& path);
/// Turn a non-negated/negated pair of active surface occurrences of one
/// general atom into hybrids with elementary component `fresh`.
HyperFormula hybridize(const HyperFormula& h, const Path& pos, const Path& neg, const std::string& fresh);

}  // namespace cl9

#endif  // CL9_HYPER_HPP
