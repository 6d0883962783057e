#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "ptrs/model.hpp"
#include "ptrs/probability.hpp"

namespace ptrs {

/// The random variable of one probabilistic rule instance.
struct ChoiceVariable {
  std::string rule;
  Substitution theta;
  std::size_t cardinality = 0;
  std::vector<Probability> weights;

  ChoiceKey key() const { return {rule, theta}; }
};

/// Reduced ordered multivalued decision diagram. Ids 0 and 1 are the
/// terminals; every other node's children have smaller ids.
class DecisionDiagram {
 public:
  static constexpr std::size_t kFalse = 0;
  static constexpr std::size_t kTrue = 1;

  struct Node {
    /// Index into variables(); unused for terminals.
    std::size_t var = 0;
    /// One child per alternative, in alternative order.
    std::vector<std::size_t> children;
  };

  const std::vector<ChoiceVariable>& variables() const noexcept { return vars_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return root_; }
  static bool is_terminal(std::size_t id) noexcept { return id <= kTrue; }
  /// Non-terminal nodes.
  std::size_t size() const noexcept { return nodes_.size() - 2; }

 private:
  friend class DiagramBuilder;

  std::vector<ChoiceVariable> vars_;
  std::vector<Node> nodes_{Node{}, Node{}};
  std::size_t root_ = kFalse;
};

/// Variable order: rules named in `prefer` first (in that order, matching a
/// label or the label a grounded rule came from), then declaration order,
/// then grounding.
DecisionDiagram compile_dd(const Model& m, const std::set<CompositeChoice>& k,
                           const std::vector<std::string>& prefer = {});

Probability weighted_count(const DecisionDiagram& dd);

/// No node has all-equal children and no two nodes share variable and children.
bool is_reduced(const DecisionDiagram& dd);
/// Variables strictly increase along every edge.
bool is_ordered(const DecisionDiagram& dd);

}  // namespace ptrs
