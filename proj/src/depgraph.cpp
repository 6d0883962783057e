#include "ptrs/depgraph.hpp"

#include <deque>

namespace ptrs {

namespace {

// Rule variables are renamed with a prefix no source identifier can carry.
constexpr std::string_view kApartPrefix = "'";

using DefinedFn = std::function<bool(const Symbol&)>;

Term abstract_with(const Term& t, const DefinedFn& defined, std::size_t& fresh) {
  if (t.is_var() || defined(t.symbol())) return Term::var("_h" + std::to_string(fresh++));
  if (t.ground()) {
    bool all_constructors = true;
    for (const Position& p : positions(t)) {
      if (defined(subterm_at(t, p).symbol())) {
        all_constructors = false;
        break;
      }
    }
    if (all_constructors) return t;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(abstract_with(a, defined, fresh));
  return Term::app(t.symbol(), std::move(args));
}

Term hat_with(const Term& t, const DefinedFn& defined, std::size_t& fresh) {
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(abstract_with(a, defined, fresh));
  return Term::app(t.symbol(), std::move(args));
}

void defined_subterms(const Term& t, const DefinedFn& defined, std::vector<Term>& out) {
  for (const Position& p : positions(t)) {
    const Term& u = subterm_at(t, p);
    if (u.is_app() && defined(u.symbol())) out.push_back(u);
  }
}

void collect_constructors(const Term& t, const DefinedFn& defined, std::set<Symbol>& out) {
  for (const Position& p : positions(t)) {
    const Term& u = subterm_at(t, p);
    if (u.is_app() && !defined(u.symbol())) out.insert(u.symbol());
  }
}

DefinedFn defined_in(const std::map<Symbol, SymbolClass>& classes) {
  return [&classes](const Symbol& f) {
    auto it = classes.find(f);
    return it != classes.end() && it->second != SymbolClass::constructor;
  };
}

bool has_redex(const Model& m, const Term& s) {
  for (const Position& p : positions(s)) {
    const Term& u = subterm_at(s, p);
    if (u.is_var()) continue;
    for (const ProbRule& r : m.prob_rules()) {
      if (match_term(r.lhs, u)) return true;
    }
    for (const RegRule& r : m.reg_rules()) {
      if (match_term(r.lhs, u)) return true;
    }
  }
  return false;
}

}  // namespace

DependencyGraph::DependencyGraph(const Model& m) : classes_(m.classification()) {
  DefinedFn defined = defined_in(classes_);
  std::size_t fresh = 0;

  struct RuleView {
    const std::string* label;
    const Term* lhs;
    std::vector<const Term*> rhss;
    const std::vector<Condition>* conditions;
  };
  std::vector<RuleView> rules;
  for (const ProbRule& r : m.prob_rules()) {
    RuleView v{&r.label, &r.lhs, {}, &r.conditions};
    for (const Alternative& a : r.alternatives) v.rhss.push_back(&a.rhs);
    rules.push_back(std::move(v));
  }
  for (const RegRule& r : m.reg_rules()) rules.push_back({&r.label, &r.lhs, {&r.rhs}, &r.conditions});

  std::vector<std::size_t> hatted;
  for (const RuleView& r : rules) {
    std::size_t lhs_node = nodes_.size();
    nodes_.push_back({rename_vars(*r.lhs, kApartPrefix), false, *r.label});
    lhs_nodes_.push_back(lhs_node);
    std::set<Symbol>& produced = produced_[lhs_node];

    std::vector<Term> sources;
    for (const Term* rhs : r.rhss) {
      defined_subterms(*rhs, defined, sources);
      collect_constructors(*rhs, defined, produced);
    }
    for (const Condition& c : *r.conditions) {
      defined_subterms(c.source, defined, sources);
      collect_constructors(c.source, defined, produced);
    }
    for (const Term& u : sources) {
      std::size_t node = nodes_.size();
      nodes_.push_back({hat_with(u, defined, fresh), true, *r.label});
      edges_.emplace_back(lhs_node, node);
      hatted.push_back(node);
    }
  }
  for (std::size_t h : hatted) {
    for (std::size_t l : lhs_matching(nodes_[h].pattern)) edges_.emplace_back(h, l);
  }
  succ_.resize(nodes_.size());
  for (const auto& [a, b] : edges_) succ_[a].push_back(b);
}

std::size_t DependencyGraph::hatted_count() const {
  std::size_t n = 0;
  for (const Node& node : nodes_) n += node.hatted ? 1 : 0;
  return n;
}

std::vector<std::size_t> DependencyGraph::lhs_matching(const Term& hat) const {
  std::vector<std::size_t> out;
  for (std::size_t l : lhs_nodes_) {
    if (unify_terms(hat, nodes_[l].pattern)) out.push_back(l);
  }
  return out;
}

std::set<std::size_t> DependencyGraph::reachable_rules_from(const Term& s) const {
  DefinedFn defined = defined_in(classes_);
  std::size_t fresh = 0;
  std::vector<Term> subs;
  defined_subterms(s, defined, subs);
  std::set<std::size_t> seen;
  std::deque<std::size_t> queue;
  for (const Term& u : subs) {
    for (std::size_t l : lhs_matching(hat_with(u, defined, fresh))) {
      if (seen.insert(l).second) queue.push_back(l);
    }
  }
  while (!queue.empty()) {
    std::size_t n = queue.front();
    queue.pop_front();
    for (std::size_t next : succ_[n]) {
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  std::set<std::size_t> rules;
  for (std::size_t n : seen) {
    if (!nodes_[n].hatted) rules.insert(n);
  }
  return rules;
}

std::set<Symbol> DependencyGraph::producible_constructors(const Term& s) const {
  std::set<Symbol> out;
  for (std::size_t l : reachable_rules_from(s)) {
    auto it = produced_.find(l);
    if (it != produced_.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

DependencyGraph dependency_graph(const Model& m) { return DependencyGraph(m); }

Term abstract_term(const Model& m, const Term& t) {
  std::size_t fresh = 0;
  return abstract_with(t, defined_in(m.classification()), fresh);
}

Term hat_term(const Model& m, const Term& t) {
  if (t.is_var()) return abstract_term(m, t);
  std::size_t fresh = 0;
  return hat_with(t, defined_in(m.classification()), fresh);
}

FeasibilityChecker::FeasibilityChecker(const Model& m, Term target) : model_(&m), target_(std::move(target)) {}

bool FeasibilityChecker::infeasible(const CompositeChoice& kappa, const Term& s) {
  if (s == target_) return false;
  auto it = cache_.find(kappa);
  if (it == cache_.end()) {
    Model restricted = restrict_model(*model_, kappa);
    DependencyGraph graph(restricted);
    it = cache_.emplace(kappa, std::make_unique<Restricted>(Restricted{std::move(restricted), std::move(graph)}))
             .first;
  }
  const Restricted& r = *it->second;
  if (!has_redex(r.model, s)) return true;

  DefinedFn defined = defined_in(r.model.classification());
  std::set<Symbol> available = r.graph.producible_constructors(s);
  collect_constructors(s, defined, available);
  std::set<Symbol> needed;
  collect_constructors(target_, defined, needed);
  for (const Symbol& c : needed) {
    if (!available.count(c)) return true;
  }
  return false;
}

bool infeasible_wrt(const Model& m, const CompositeChoice& kappa, const Term& s, const Term& t) {
  FeasibilityChecker checker(m, t);
  return checker.infeasible(kappa, s);
}

}  // namespace ptrs
