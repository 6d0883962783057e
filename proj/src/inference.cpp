#include "ptrs/inference.hpp"

#include <algorithm>

#include "ptrs/decision_diagram.hpp"

namespace ptrs {

namespace {

std::size_t alternative_count(const Model& m, const std::string& rule) {
  const ProbRule* r = m.find_prob_rule(rule);
  if (!r) throw Error(ErrorKind::unknown_label, "no probabilistic rule labeled " + rule);
  return r->alternatives.size();
}

/// Drops every member that strictly contains another member.
void remove_supersets(std::vector<CompositeChoice>& k) {
  std::vector<CompositeChoice> by_size = k;
  std::stable_sort(by_size.begin(), by_size.end(),
                   [](const CompositeChoice& a, const CompositeChoice& b) { return a.size() < b.size(); });
  std::vector<CompositeChoice> kept;
  for (const CompositeChoice& c : by_size) {
    bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const CompositeChoice& s) {
      return s.size() < c.size() && s.subset_of(c);
    });
    if (!absorbed) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  k = std::move(kept);
}

}  // namespace

Probability prob_of_choice(const Model& m, const CompositeChoice& kappa) {
  Probability p = Probability::one();
  for (const AtomicChoice& a : kappa.atoms()) p *= choice_probability(m, a);
  return p;
}

Rational naive_sum(const Model& m, const std::set<CompositeChoice>& k) {
  Rational sum = 0;
  for (const CompositeChoice& c : k) sum += prob_of_choice(m, c).value();
  return sum;
}

bool mutually_incompatible(const std::set<CompositeChoice>& k) {
  for (auto i = k.begin(); i != k.end(); ++i) {
    for (auto j = std::next(i); j != k.end(); ++j) {
      if (i->compatible_with(*j)) return false;
    }
  }
  return true;
}

std::set<CompositeChoice> split_to_incompatible(const Model& m, const std::set<CompositeChoice>& k) {
  std::vector<CompositeChoice> cur(k.begin(), k.end());
  while (true) {
    remove_supersets(cur);
    // Least compatible pair (i, j) in sorted order.
    std::size_t pi = 0, pj = 0;
    bool found = false;
    for (std::size_t i = 0; i < cur.size() && !found; ++i) {
      for (std::size_t j = i + 1; j < cur.size(); ++j) {
        if (cur[i].compatible_with(cur[j])) {
          pi = i;
          pj = j;
          found = true;
          break;
        }
      }
    }
    if (!found) break;
    // Least variable fixed by cur[i] and free in cur[j]; it exists because
    // cur[i] is not a subset of cur[j].
    const ChoiceKey* key = nullptr;
    for (const auto& [ck, idx] : cur[pi].choices()) {
      if (!cur[pj].index_of(ck)) {
        key = &ck;
        break;
      }
    }
    ChoiceKey var = *key;
    CompositeChoice base = cur[pj];
    cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(pj));
    std::size_t n = alternative_count(m, var.rule);
    for (std::size_t a = 1; a <= n; ++a) {
      CompositeChoice c = base;
      c.insert({var.rule, var.theta, a});
      cur.push_back(std::move(c));
    }
    std::sort(cur.begin(), cur.end());
    cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
  }
  return {cur.begin(), cur.end()};
}

Probability measure(const Model& m, const std::set<CompositeChoice>& k) {
  Rational sum = 0;
  for (const CompositeChoice& c : split_to_incompatible(m, k)) sum += prob_of_choice(m, c).value();
  return Probability(sum);
}

QueryResult exact_query(const Model& m, const Term& s, const Term& t, const QueryOptions& opts) {
  Model g = ground_instances(m);
  ExplanationSet ex = explanations(g, s, t, opts.budget);
  QueryResult r;
  r.kind = ResultKind::exact;
  if (opts.method == ExactMethod::dd) {
    r.value = weighted_count(compile_dd(g, ex.explanations, opts.var_order));
  } else {
    r.value = measure(g, ex.explanations);
  }
  r.complete = ex.complete;
  r.diagnostics = std::move(ex.diagnostics);
  if (!r.complete) {
    r.diagnostics.push_back({"explanation search truncated; the probability is a lower bound", std::nullopt});
  }
  r.explanations = std::move(ex.explanations);
  r.derivations = std::move(ex.derivations);
  return r;
}

QueryResult worlds_query(const Model& m, const Term& s, const Term& t, const QueryOptions& opts) {
  Model g = ground_instances(m);
  Rational yes = 0;
  Rational unknown = 0;
  for_each_selection(g, opts.world_cap, [&](const CompositeChoice& sel, const Probability& p) {
    switch (reachable_in_world(world_of(g, sel), s, t, opts.budget)) {
      case Reach::yes:
        yes += p.value();
        break;
      case Reach::unknown:
        unknown += p.value();
        break;
      case Reach::no:
        break;
    }
  });
  QueryResult r;
  if (sgn(unknown) == 0) {
    r.kind = ResultKind::exact;
    r.value = Probability(yes);
  } else {
    r.kind = ResultKind::interval;
    r.low = Probability(yes);
    r.high = Probability(yes + unknown);
    r.complete = false;
    r.diagnostics.push_back({"some worlds were undecided within the budget", std::nullopt});
  }
  return r;
}

QueryResult bounds_query(const Model& m, const Term& s, const Term& t, std::size_t n, const QueryOptions& opts) {
  Model g = ground_instances(m);
  BoundedExplanations b = explanations_bounded(g, s, t, n, opts.budget);
  QueryResult r;
  r.kind = ResultKind::interval;
  r.low = measure(g, b.lower);
  r.high = measure(g, b.upper);
  r.explanations = b.lower;
  r.diagnostics = std::move(b.diagnostics);
  return r;
}

}  // namespace ptrs
