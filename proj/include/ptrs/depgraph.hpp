#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ptrs/model.hpp"
#include "ptrs/term.hpp"

namespace ptrs {

/// Functional dependencies between rules. Lhs nodes point to the hatted
/// defined-rooted subterms of their right-hand sides (every alternative, and
/// the condition sources); hatted nodes point to the lhs nodes they unify with.
class DependencyGraph {
 public:
  struct Node {
    Term pattern;
    bool hatted = false;
    /// Label of the rule owning the node.
    std::string rule;
  };

  explicit DependencyGraph(const Model& m);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  std::size_t hatted_count() const;

  /// Lhs nodes whose pattern unifies with the hat of a defined-rooted subterm
  /// of `s`, closed under the edges.
  std::set<std::size_t> reachable_rules_from(const Term& s) const;
  /// Constructors that rules reachable from `s` may introduce.
  std::set<Symbol> producible_constructors(const Term& s) const;

 private:
  std::vector<std::size_t> lhs_matching(const Term& hat) const;

  std::map<Symbol, SymbolClass> classes_;
  std::vector<Node> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::size_t> lhs_nodes_;
  std::map<std::size_t, std::set<Symbol>> produced_;
};

DependencyGraph dependency_graph(const Model& m);

/// ⌊t⌋: defined-rooted subterms and variables become fresh variables.
Term abstract_term(const Model& m, const Term& t);
/// f(⌊t1⌋, ..., ⌊tn⌋).
Term hat_term(const Model& m, const Term& t);

/// Conservative test on S|kappa. True means t is unreachable from s; false
/// means unknown.
bool infeasible_wrt(const Model& m, const CompositeChoice& kappa, const Term& s, const Term& t);

/// infeasible_wrt for a fixed model and target, caching restricted systems.
class FeasibilityChecker {
 public:
  FeasibilityChecker(const Model& m, Term target);
  bool infeasible(const CompositeChoice& kappa, const Term& s);

 private:
  struct Restricted {
    Model model;
    DependencyGraph graph;
  };

  const Model* model_;
  Term target_;
  std::map<CompositeChoice, std::unique_ptr<Restricted>> cache_;
};

}  // namespace ptrs
