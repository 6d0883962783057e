#pragma once

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ptrs/model.hpp"
#include "ptrs/term.hpp"

namespace ptrs {

enum class Strategy {
  exhaustive,
  /// Only redexes with no matching proper subterm are contracted.
  innermost,
};

struct SearchBudget {
  std::size_t max_depth = 64;
  /// Cap on expanded states across the whole query, nested condition
  /// searches included.
  std::size_t max_derivations = 100000;
  bool prune_zero_prob = true;
  bool prune_infeasible = false;
  Strategy strategy = Strategy::exhaustive;
};

struct ProbStep {
  Position position;
  std::string rule;
  Substitution grounding;
  /// 1-based alternative of a probabilistic rule; 0 for a regular rule.
  std::size_t alt_index = 0;
  CompositeChoice new_choices;
  Probability step_prob = Probability::one();
};

struct Successor {
  ProbStep step;
  Term term;
  CompositeChoice choices;
};

struct Derivation {
  Term start;
  std::vector<ProbStep> steps;
  Term end;
  CompositeChoice explanation;
};

struct ExplanationSet {
  std::set<CompositeChoice> explanations;
  bool complete = true;
  /// One shortest derivation per explanation, in the order of `explanations`.
  std::vector<Derivation> derivations;
  std::vector<Diagnostic> diagnostics;
  std::size_t states = 0;
};

struct BoundedExplanations {
  std::set<CompositeChoice> lower;
  std::set<CompositeChoice> upper;
  std::vector<Diagnostic> diagnostics;
};

/// Outcome of a bounded search.
enum class Reach { yes, no, unknown };

/// Decides the alternative (1-based) of a probabilistic rule instance.
using ChoiceResolver = std::function<std::size_t(const ProbRule& rule, const Substitution& theta)>;

/// One ⇀ step from <t, kappa>.
std::vector<Successor> prob_successors(const Model& m, const Term& t, const CompositeChoice& kappa,
                                       const SearchBudget& budget = {});

ExplanationSet explanations(const Model& m, const Term& s, const Term& t, const SearchBudget& budget = {});

/// E_l and E_u at depth n.
BoundedExplanations explanations_bounded(const Model& m, const Term& s, const Term& t, std::size_t n,
                                         const SearchBudget& budget = {});

struct WorldStep {
  Position position;
  std::string rule;
  Term result;
};

std::vector<WorldStep> rewrite_once(const World& w, const Term& t, const SearchBudget& budget = {});

Reach reachable_in_world(const World& w, const Term& s, const Term& t, const SearchBudget& budget = {});

/// Reachability in the world fixed by `resolve`, asked at most once per rule
/// instance and only for instances the search actually meets.
Reach reachable_with_resolver(const Model& m, const Term& s, const Term& t, const SearchBudget& budget,
                              const ChoiceResolver& resolve);

}  // namespace ptrs
