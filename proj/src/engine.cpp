#include "ptrs/engine.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "ptrs/depgraph.hpp"

namespace ptrs {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct StateKey {
  Term term;
  CompositeChoice kappa;

  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept {
    return k.term.hash() * 0x100000001b3ULL ^ k.kappa.hash();
  }
};

using StateList = std::vector<StateKey>;
using StateListPtr = std::shared_ptr<const StateList>;

struct SearchNode {
  Term term;
  CompositeChoice kappa;
  std::size_t parent;
  ProbStep step;
  std::size_t depth;
};

struct SearchResult {
  std::vector<SearchNode> nodes;
  bool truncated = false;
  bool found = false;
};

using PrunePredicate = std::function<bool(const Term&, const CompositeChoice&)>;

/// Variables a rule application binds: vars(lhs) and the condition targets.
std::set<std::string> bindable_vars(const Term& lhs, const std::vector<Condition>& conds) {
  std::set<std::string> out = lhs.vars();
  for (const Condition& c : conds) c.target.collect_vars(out);
  return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

class Engine {
 public:
  Engine(const std::vector<ProbRule>& prob, const std::vector<RegRule>& reg, const SearchBudget& budget,
         const ChoiceResolver* resolve)
      : budget_(budget), resolve_(resolve) {
    for (const ProbRule& r : prob) {
      prob_by_root_[r.lhs.symbol()].push_back(&r);
      prob_by_label_.emplace(r.label, &r);
      ProbInfo& info = prob_info_[&r];
      info.choice_vars = r.choice_vars();
      std::set<std::string> bindable = bindable_vars(r.lhs, r.conditions);
      for (const Alternative& a : r.alternatives) info.rhs_bound.push_back(subset(a.rhs.vars(), bindable));
    }
    for (const RegRule& r : reg) {
      reg_by_root_[r.lhs.symbol()].push_back(&r);
      reg_rhs_bound_[&r] = subset(r.rhs.vars(), bindable_vars(r.lhs, r.conditions));
    }
  }

  bool truncated() const noexcept { return truncated_; }
  std::size_t expanded() const noexcept { return expanded_; }
  std::vector<Diagnostic> diagnostics() const {
    std::vector<Diagnostic> out;
    for (const std::string& d : diagnostics_) out.push_back({d, std::nullopt});
    if (truncated_) out.push_back({"budget exhausted: the search was truncated", std::nullopt});
    return out;
  }

  void successors(const Term& t, const CompositeChoice& kappa, std::vector<Successor>& out, std::size_t nest) {
    for (const Position& p : positions(t)) {
      const Term& u = subterm_at(t, p);
      if (u.is_var()) continue;
      if (budget_.strategy == Strategy::innermost && has_proper_redex(u)) continue;
      Symbol f = u.symbol();
      if (auto it = prob_by_root_.find(f); it != prob_by_root_.end()) {
        for (const ProbRule* r : it->second) apply_prob(t, p, u, *r, kappa, nest, out);
      }
      if (auto it = reg_by_root_.find(f); it != reg_by_root_.end()) {
        for (const RegRule* r : it->second) apply_reg(t, p, u, *r, kappa, nest, out);
      }
    }
  }

  /// Breadth-first search over states from <s, kappa0>, one layer per step.
  SearchResult bfs(const Term& s, const CompositeChoice& kappa0, std::size_t nest, const Term* target,
                   bool stop_on_target, const PrunePredicate* prune) {
    SearchResult r;
    std::unordered_map<StateKey, std::size_t, StateKeyHash> index;
    r.nodes.push_back({s, kappa0, kNone, {}, 0});
    index.emplace(StateKey{s, kappa0}, 0);
    if (stop_on_target && target && s == *target) {
      r.found = true;
      return r;
    }
    std::vector<Successor> succ;
    for (std::size_t head = 0; head < r.nodes.size(); ++head) {
      if (expanded_ >= budget_.max_derivations) {
        r.truncated = true;
        truncated_ = true;
        break;
      }
      ++expanded_;
      Term term = r.nodes[head].term;
      CompositeChoice kappa = r.nodes[head].kappa;
      std::size_t depth = r.nodes[head].depth;
      succ.clear();
      successors(term, kappa, succ, nest);
      for (Successor& sc : succ) {
        if (prune && (*prune)(sc.term, sc.choices)) continue;
        StateKey key{sc.term, sc.choices};
        if (index.count(key)) continue;
        if (depth >= budget_.max_depth) {
          r.truncated = true;
          truncated_ = true;
          break;
        }
        index.emplace(key, r.nodes.size());
        r.nodes.push_back({std::move(sc.term), std::move(sc.choices), head, std::move(sc.step), depth + 1});
        if (stop_on_target && target && r.nodes.back().term == *target) {
          r.found = true;
          return r;
        }
      }
    }
    return r;
  }

  Probability prob_of(const CompositeChoice& kappa) const {
    Probability p = Probability::one();
    for (const auto& [key, index] : kappa.choices()) {
      auto it = prob_by_label_.find(key.rule);
      if (it != prob_by_label_.end()) p *= it->second->alternatives[index - 1].prob;
    }
    return p;
  }

 private:
  struct ProbInfo {
    std::set<std::string> choice_vars;
    std::vector<bool> rhs_bound;
  };

  struct GoalEntry {
    StateListPtr states = std::make_shared<StateList>();
    bool final = false;
    bool in_progress = false;
    bool reentered = false;
    std::size_t stack_index = 0;
  };

  struct Frame {
    StateKey goal;
    std::size_t lowest_dependency;
  };

  bool has_proper_redex(const Term& u) const {
    for (const Position& p : positions(u)) {
      if (p.is_root()) continue;
      const Term& v = subterm_at(u, p);
      if (v.is_var()) continue;
      Symbol f = v.symbol();
      if (auto it = prob_by_root_.find(f); it != prob_by_root_.end()) {
        for (const ProbRule* r : it->second) {
          if (match_term(r->lhs, v)) return true;
        }
      }
      if (auto it = reg_by_root_.find(f); it != reg_by_root_.end()) {
        for (const RegRule* r : it->second) {
          if (match_term(r->lhs, v)) return true;
        }
      }
    }
    return false;
  }

  void note(std::string message) {
    if (std::find(diagnostics_.begin(), diagnostics_.end(), message) == diagnostics_.end()) {
      diagnostics_.push_back(std::move(message));
    }
  }

  using Solution = std::pair<Substitution, CompositeChoice>;

  /// Conditions left to right, each under the choices accumulated so far.
  void solve(const std::vector<Condition>& conds, std::size_t j, const Substitution& sigma,
             const CompositeChoice& kappa, std::size_t nest, std::vector<Solution>& out) {
    if (j == conds.size()) {
      out.emplace_back(sigma, kappa);
      return;
    }
    Term source = apply_subst(sigma, conds[j].source);
    StateListPtr reached = reach(source, kappa, nest + 1);
    for (const StateKey& st : *reached) {
      if (auto extended = match_term(conds[j].target, st.term, sigma)) {
        solve(conds, j + 1, *extended, st.kappa, nest, out);
      }
    }
  }

  void apply_reg(const Term& t, const Position& p, const Term& u, const RegRule& r, const CompositeChoice& kappa,
                 std::size_t nest, std::vector<Successor>& out) {
    auto sigma = match_term(r.lhs, u);
    if (!sigma) return;
    if (!reg_rhs_bound_.at(&r)) {
      note("rule " + r.label + ": right-hand side variables left unbound by the conditions; application skipped");
      return;
    }
    std::vector<Solution> sols;
    solve(r.conditions, 0, *sigma, kappa, nest, sols);
    for (auto& [s2, k2] : sols) {
      Term result = replace_at(t, p, apply_subst(s2, r.rhs));
      CompositeChoice added = k2.minus(kappa);
      Probability step_prob = prob_of(added);
      out.push_back({{p, r.label, s2, 0, std::move(added), step_prob}, std::move(result), std::move(k2)});
    }
  }

  void apply_prob(const Term& t, const Position& p, const Term& u, const ProbRule& r, const CompositeChoice& kappa,
                  std::size_t nest, std::vector<Successor>& out) {
    auto sigma = match_term(r.lhs, u);
    if (!sigma) return;
    const ProbInfo& info = prob_info_.at(&r);
    std::vector<Solution> sols;
    solve(r.conditions, 0, *sigma, kappa, nest, sols);
    for (auto& [s2, k2] : sols) {
      Substitution theta = s2.restrict_to(info.choice_vars);
      bool ground = theta.size() == info.choice_vars.size() && theta.ground();
      if (!ground) {
        throw Error(ErrorKind::non_ground_probabilistic_redex,
                    "rule " + r.label + " matched the non-ground instance " + to_string(apply_subst(s2, r.lhs)),
                    r.location);
      }
      if (r.fixed_groundings.count(theta)) continue;
      if (resolve_) {
        std::size_t i = (*resolve_)(r, theta);
        if (i == 0 || i > r.alternatives.size()) continue;
        push_alternative(t, p, r, info, s2, theta, i, kappa, k2, out);
        continue;
      }
      for (std::size_t i = 1; i <= r.alternatives.size(); ++i) {
        if (budget_.prune_zero_prob && r.alternatives[i - 1].prob.is_zero()) continue;
        CompositeChoice k3 = k2;
        if (!k3.insert({r.label, theta, i})) continue;
        push_alternative(t, p, r, info, s2, theta, i, kappa, k3, out);
      }
    }
  }

  void push_alternative(const Term& t, const Position& p, const ProbRule& r, const ProbInfo& info,
                        const Substitution& sigma, const Substitution& theta, std::size_t i,
                        const CompositeChoice& entry, const CompositeChoice& kappa, std::vector<Successor>& out) {
    if (!info.rhs_bound[i - 1]) {
      note("rule " + r.label + ": right-hand side variables left unbound by the conditions; application skipped");
      return;
    }
    Term result = replace_at(t, p, apply_subst(sigma, r.alternatives[i - 1].rhs));
    CompositeChoice added = kappa.minus(entry);
    Probability step_prob = prob_of(added);
    out.push_back({{p, r.label, theta, i, std::move(added), step_prob}, std::move(result), kappa});
  }

  /// States reachable from <s, kappa>. Goals that recurse into themselves are
  /// solved by iterating to a fixpoint; results depending on an unfinished
  /// goal are not memoized.
  StateListPtr reach(const Term& s, const CompositeChoice& kappa, std::size_t nest) {
    StateKey goal{s, kappa};
    auto it = goals_.find(goal);
    if (it != goals_.end()) {
      GoalEntry& e = it->second;
      if (e.final) return e.states;
      if (e.in_progress) {
        e.reentered = true;
        for (std::size_t k = e.stack_index + 1; k < stack_.size(); ++k) {
          stack_[k].lowest_dependency = std::min(stack_[k].lowest_dependency, e.stack_index);
        }
        return e.states;
      }
    }
    if (nest > budget_.max_depth) {
      truncated_ = true;
      return std::make_shared<StateList>();
    }
    GoalEntry& entry = goals_[goal];
    entry.in_progress = true;
    entry.stack_index = stack_.size();
    std::size_t own = stack_.size();
    stack_.push_back({goal, kNone});
    while (true) {
      goals_.at(goal).reentered = false;
      SearchResult r = bfs(s, kappa, nest, nullptr, false, nullptr);
      auto states = std::make_shared<StateList>();
      states->reserve(r.nodes.size());
      for (SearchNode& n : r.nodes) states->push_back({std::move(n.term), std::move(n.kappa)});
      GoalEntry& e = goals_.at(goal);
      bool changed = *states != *e.states;
      e.states = std::move(states);
      if (!e.reentered || !changed) break;
    }
    std::size_t lowest = stack_.back().lowest_dependency;
    stack_.pop_back();
    GoalEntry& e = goals_.at(goal);
    e.in_progress = false;
    StateListPtr result = e.states;
    if (lowest == kNone || lowest >= own) {
      e.final = true;
    } else {
      goals_.erase(goal);
      if (!stack_.empty()) stack_.back().lowest_dependency = std::min(stack_.back().lowest_dependency, lowest);
    }
    return result;
  }

  SearchBudget budget_;
  const ChoiceResolver* resolve_;
  std::unordered_map<Symbol, std::vector<const ProbRule*>, SymbolHash> prob_by_root_;
  std::unordered_map<Symbol, std::vector<const RegRule*>, SymbolHash> reg_by_root_;
  std::unordered_map<std::string, const ProbRule*> prob_by_label_;
  std::unordered_map<const ProbRule*, ProbInfo> prob_info_;
  std::unordered_map<const RegRule*, bool> reg_rhs_bound_;
  std::unordered_map<StateKey, GoalEntry, StateKeyHash> goals_;
  std::vector<Frame> stack_;
  std::vector<std::string> diagnostics_;
  std::size_t expanded_ = 0;
  bool truncated_ = false;
};

Derivation derivation_to(const SearchResult& r, std::size_t node) {
  Derivation d{r.nodes[0].term, {}, r.nodes[node].term, r.nodes[node].kappa};
  for (std::size_t k = node; r.nodes[k].parent != kNone; k = r.nodes[k].parent) d.steps.push_back(r.nodes[k].step);
  std::reverse(d.steps.begin(), d.steps.end());
  return d;
}

}  // namespace

std::vector<Successor> prob_successors(const Model& m, const Term& t, const CompositeChoice& kappa,
                                       const SearchBudget& budget) {
  Engine e(m.prob_rules(), m.reg_rules(), budget, nullptr);
  std::vector<Successor> out;
  e.successors(t, kappa, out, 0);
  return out;
}

ExplanationSet explanations(const Model& m, const Term& s, const Term& t, const SearchBudget& budget) {
  Engine e(m.prob_rules(), m.reg_rules(), budget, nullptr);
  std::unique_ptr<FeasibilityChecker> checker;
  PrunePredicate prune;
  if (budget.prune_infeasible) {
    checker = std::make_unique<FeasibilityChecker>(m, t);
    prune = [&](const Term& u, const CompositeChoice& k) { return checker->infeasible(k, u); };
  }
  SearchResult r = e.bfs(s, {}, 0, &t, false, budget.prune_infeasible ? &prune : nullptr);

  ExplanationSet out;
  std::map<CompositeChoice, std::size_t> first;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    if (r.nodes[k].term == t) first.emplace(r.nodes[k].kappa, k);
  }
  for (const auto& [kappa, node] : first) {
    out.explanations.insert(kappa);
    out.derivations.push_back(derivation_to(r, node));
  }
  out.complete = !e.truncated();
  out.diagnostics = e.diagnostics();
  out.states = r.nodes.size();
  return out;
}

BoundedExplanations explanations_bounded(const Model& m, const Term& s, const Term& t, std::size_t n,
                                         const SearchBudget& budget) {
  Engine e(m.prob_rules(), m.reg_rules(), budget, nullptr);
  std::unique_ptr<FeasibilityChecker> checker;
  if (budget.prune_infeasible) checker = std::make_unique<FeasibilityChecker>(m, t);

  BoundedExplanations out;
  std::vector<StateKey> layer{{s, {}}};
  std::vector<Successor> succ;
  for (std::size_t k = 0;; ++k) {
    for (const StateKey& st : layer) {
      if (st.term == t) out.lower.insert(st.kappa);
    }
    if (k == n) {
      for (const StateKey& st : layer) {
        if (st.term == t) continue;
        succ.clear();
        e.successors(st.term, st.kappa, succ, 0);
        if (!succ.empty()) out.upper.insert(st.kappa);
      }
      break;
    }
    std::vector<StateKey> next;
    std::unordered_set<StateKey, StateKeyHash> seen;
    for (const StateKey& st : layer) {
      succ.clear();
      e.successors(st.term, st.kappa, succ, 0);
      for (Successor& sc : succ) {
        if (checker && checker->infeasible(sc.choices, sc.term)) continue;
        StateKey key{std::move(sc.term), std::move(sc.choices)};
        if (seen.insert(key).second) next.push_back(std::move(key));
      }
    }
    layer = std::move(next);
    if (layer.empty()) break;
  }
  out.upper.insert(out.lower.begin(), out.lower.end());
  out.diagnostics = e.diagnostics();
  return out;
}

std::vector<WorldStep> rewrite_once(const World& w, const Term& t, const SearchBudget& budget) {
  Engine e({}, w.rules, budget, nullptr);
  std::vector<Successor> succ;
  e.successors(t, {}, succ, 0);
  std::vector<WorldStep> out;
  for (Successor& s : succ) out.push_back({s.step.position, s.step.rule, s.term});
  return out;
}

Reach reachable_in_world(const World& w, const Term& s, const Term& t, const SearchBudget& budget) {
  Engine e({}, w.rules, budget, nullptr);
  SearchResult r = e.bfs(s, {}, 0, &t, true, nullptr);
  if (r.found) return Reach::yes;
  return e.truncated() ? Reach::unknown : Reach::no;
}

Reach reachable_with_resolver(const Model& m, const Term& s, const Term& t, const SearchBudget& budget,
                              const ChoiceResolver& resolve) {
  Engine e(m.prob_rules(), m.reg_rules(), budget, &resolve);
  SearchResult r = e.bfs(s, {}, 0, &t, true, nullptr);
  if (r.found) return Reach::yes;
  return e.truncated() ? Reach::unknown : Reach::no;
}

}  // namespace ptrs
