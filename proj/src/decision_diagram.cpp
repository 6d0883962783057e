#include "ptrs/decision_diagram.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace ptrs {

class DiagramBuilder {
 public:
  DiagramBuilder(const Model& m, const std::set<CompositeChoice>& k, const std::vector<std::string>& prefer) {
    std::set<ChoiceKey> keys;
    for (const CompositeChoice& c : k) {
      for (const auto& [key, idx] : c.choices()) keys.insert(key);
    }
    struct Ranked {
      std::size_t rank;
      ChoiceKey key;
    };
    std::vector<Ranked> ranked;
    for (const ChoiceKey& key : keys) {
      const ProbRule* r = m.find_prob_rule(key.rule);
      if (!r) throw Error(ErrorKind::unknown_label, "no probabilistic rule labeled " + key.rule);
      std::size_t rank = prefer.size() + *m.prob_rule_index(key.rule);
      for (std::size_t p = 0; p < prefer.size(); ++p) {
        if (prefer[p] == key.rule || prefer[p] == r->origin_label) {
          rank = p;
          break;
        }
      }
      ranked.push_back({rank, key});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.rank != b.rank) return a.rank < b.rank;
      return a.key.theta < b.key.theta;
    });
    for (const Ranked& r : ranked) {
      const ProbRule* rule = m.find_prob_rule(r.key.rule);
      ChoiceVariable v{r.key.rule, r.key.theta, rule->alternatives.size(), {}};
      for (const Alternative& a : rule->alternatives) v.weights.push_back(a.prob);
      level_.emplace(r.key, dd_.vars_.size());
      dd_.vars_.push_back(std::move(v));
    }
    dd_.root_ = build(std::vector<CompositeChoice>(k.begin(), k.end()));
  }

  DecisionDiagram result() && { return std::move(dd_); }

 private:
  /// Shannon expansion on the first variable (in order) that occurs in `k`.
  std::size_t build(std::vector<CompositeChoice> k) {
    absorb(k);
    if (k.empty()) return DecisionDiagram::kFalse;
    if (k.front().empty()) return DecisionDiagram::kTrue;
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;

    std::size_t top = std::numeric_limits<std::size_t>::max();
    for (const CompositeChoice& c : k) {
      for (const auto& [key, idx] : c.choices()) top = std::min(top, level_.at(key));
    }
    const ChoiceVariable& v = dd_.vars_[top];
    ChoiceKey key = v.key();
    std::vector<std::size_t> children;
    for (std::size_t a = 1; a <= v.cardinality; ++a) {
      std::vector<CompositeChoice> cofactor;
      for (const CompositeChoice& c : k) {
        auto idx = c.index_of(key);
        if (!idx) {
          cofactor.push_back(c);
        } else if (*idx == a) {
          cofactor.push_back(c.minus(CompositeChoice{AtomicChoice{key.rule, key.theta, a}}));
        }
      }
      children.push_back(build(std::move(cofactor)));
    }
    std::size_t id;
    if (std::all_of(children.begin(), children.end(), [&](std::size_t c) { return c == children.front(); })) {
      id = children.front();
    } else {
      auto [it, inserted] = unique_.emplace(std::make_pair(top, children), dd_.nodes_.size());
      if (inserted) dd_.nodes_.push_back({top, std::move(children)});
      id = it->second;
    }
    memo_.emplace(std::move(k), id);
    return id;
  }

  static void absorb(std::vector<CompositeChoice>& k) {
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    std::vector<CompositeChoice> kept;
    for (const CompositeChoice& c : k) {
      bool absorbed = std::any_of(k.begin(), k.end(), [&](const CompositeChoice& s) {
        return s.size() < c.size() && s.subset_of(c);
      });
      if (!absorbed) kept.push_back(c);
    }
    // The empty choice sorts first and absorbs everything else.
    k = std::move(kept);
  }

  DecisionDiagram dd_;
  std::map<ChoiceKey, std::size_t> level_;
  std::map<std::vector<CompositeChoice>, std::size_t> memo_;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> unique_;
};

DecisionDiagram compile_dd(const Model& m, const std::set<CompositeChoice>& k, const std::vector<std::string>& prefer) {
  return DiagramBuilder(m, k, prefer).result();
}

Probability weighted_count(const DecisionDiagram& dd) {
  const auto& nodes = dd.nodes();
  std::vector<Rational> value(nodes.size());
  value[DecisionDiagram::kFalse] = 0;
  value[DecisionDiagram::kTrue] = 1;
  for (std::size_t id = 2; id < nodes.size(); ++id) {
    const ChoiceVariable& v = dd.variables()[nodes[id].var];
    Rational sum = 0;
    for (std::size_t a = 0; a < nodes[id].children.size(); ++a) sum += v.weights[a].value() * value[nodes[id].children[a]];
    value[id] = sum;
  }
  return Probability(value[dd.root()]);
}

bool is_reduced(const DecisionDiagram& dd) {
  std::set<std::pair<std::size_t, std::vector<std::size_t>>> seen;
  for (std::size_t id = 2; id < dd.nodes().size(); ++id) {
    const auto& n = dd.nodes()[id];
    if (std::all_of(n.children.begin(), n.children.end(), [&](std::size_t c) { return c == n.children.front(); })) {
      return false;
    }
    if (!seen.emplace(n.var, n.children).second) return false;
  }
  return true;
}

bool is_ordered(const DecisionDiagram& dd) {
  for (std::size_t id = 2; id < dd.nodes().size(); ++id) {
    const auto& n = dd.nodes()[id];
    for (std::size_t c : n.children) {
      if (c >= id) return false;
      if (!DecisionDiagram::is_terminal(c) && dd.nodes()[c].var <= n.var) return false;
    }
  }
  return true;
}

}  // namespace ptrs
