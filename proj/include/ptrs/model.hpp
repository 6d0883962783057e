#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ptrs/error.hpp"
#include "ptrs/probability.hpp"
#include "ptrs/term.hpp"

namespace ptrs {

/// Name of the reserved nullary constructor that pads sub-stochastic rules.
inline constexpr std::string_view kBottomName = "bot";
Term bottom();

/// Default cap on the number of worlds enumerated by the oracle.
inline constexpr std::size_t kDefaultWorldCap = std::size_t{1} << 20;

/// Oriented condition s ->> t.
struct Condition {
  Term source;
  Term target;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct RegRule {
  std::string label;
  Term lhs;
  Term rhs;
  std::vector<Condition> conditions;
  std::optional<SourceLocation> location;
  /// Produced by restriction or world construction rather than read from source.
  bool generated = false;
};

struct Alternative {
  Probability prob;
  Term rhs;
};

/// `where X in {t1, ..., tn}`.
struct DomainClause {
  std::string var;
  std::vector<Term> values;
};

struct ProbRule {
  std::string label;
  Term lhs;
  std::vector<Alternative> alternatives;
  std::vector<Condition> conditions;
  std::vector<DomainClause> domains;
  std::optional<SourceLocation> location;
  /// The last alternative is the bottom padding added by normalization.
  bool padded = false;
  /// Groundings already fixed to a regular instance by restriction; the rule
  /// must not fire for them.
  std::set<Substitution> fixed_groundings;
  /// Set by grounding: the source rule and instance this rule came from.
  std::string origin_label;
  Substitution origin_grounding;

  /// vars(lhs) together with the variables of all conditions. An atomic
  /// choice for this rule grounds exactly these.
  std::set<std::string> choice_vars() const;
  bool ground() const { return choice_vars().empty(); }
};

enum class SymbolClass { constructor, regular_defined, probabilistic_defined };

struct Diagnostic {
  std::string message;
  std::optional<SourceLocation> location;
};

/// A probabilistic rewrite system S = S_p + S_r. Immutable once normalized.
class Model {
 public:
  Model() = default;
  Model(std::vector<ProbRule> prob_rules, std::vector<RegRule> reg_rules);

  const std::vector<ProbRule>& prob_rules() const noexcept { return prob_rules_; }
  const std::vector<RegRule>& reg_rules() const noexcept { return reg_rules_; }
  const std::vector<Diagnostic>& warnings() const noexcept { return warnings_; }
  const std::map<Symbol, SymbolClass>& classification() const noexcept { return classes_; }
  bool normalized() const noexcept { return normalized_; }

  const ProbRule* find_prob_rule(std::string_view label) const;
  /// Index of the rule in declaration order among probabilistic rules.
  std::optional<std::size_t> prob_rule_index(std::string_view label) const;
  /// Unknown symbols are constructors.
  SymbolClass classify(const Symbol& f) const;
  bool is_defined(const Symbol& f) const { return classify(f) != SymbolClass::constructor; }
  /// Arity of `name` when the model uses it.
  std::optional<std::size_t> arity_of(std::string_view name) const;

 private:
  friend Model normalize_model(Model raw);

  void reindex();

  std::vector<ProbRule> prob_rules_;
  std::vector<RegRule> reg_rules_;
  std::map<Symbol, SymbolClass> classes_;
  std::vector<Diagnostic> warnings_;
  std::unordered_map<std::string, std::size_t> prob_index_;
  bool normalized_ = false;
};

/// Labels compare with embedded digit runs taken numerically: R2 < R10 < R10#2.
int natural_compare(std::string_view a, std::string_view b);

/// Identifies one random variable: a probabilistic rule and a ground instance.
struct ChoiceKey {
  std::string rule;
  Substitution theta;

  friend bool operator==(const ChoiceKey&, const ChoiceKey&) = default;
  friend std::strong_ordering operator<=>(const ChoiceKey& a, const ChoiceKey& b);
};

/// (R, theta, i) with a 1-based alternative index.
struct AtomicChoice {
  std::string rule;
  Substitution theta;
  std::size_t index = 1;

  ChoiceKey key() const { return {rule, theta}; }
  friend bool operator==(const AtomicChoice&, const AtomicChoice&) = default;
};

/// A consistent set of atomic choices. Consistency holds by construction.
class CompositeChoice {
 public:
  using Map = std::map<ChoiceKey, std::size_t>;

  CompositeChoice() = default;
  /// Throws Error(inconsistent_composite_choice) on two different indexes for
  /// one variable.
  CompositeChoice(std::initializer_list<AtomicChoice> atoms);
  static CompositeChoice from_atoms(const std::vector<AtomicChoice>& atoms);

  bool empty() const noexcept { return choices_.empty(); }
  std::size_t size() const noexcept { return choices_.size(); }
  const Map& choices() const noexcept { return choices_; }
  std::vector<AtomicChoice> atoms() const;

  std::optional<std::size_t> index_of(const ChoiceKey& key) const;
  bool consistent_with(const AtomicChoice& atom) const;
  /// Adds the atom; returns false (and leaves the set unchanged) on conflict.
  bool insert(const AtomicChoice& atom);
  bool contains(const AtomicChoice& atom) const;
  bool subset_of(const CompositeChoice& other) const;
  /// True when the union is consistent.
  bool compatible_with(const CompositeChoice& other) const;
  /// Choices of this set that are absent from `base`.
  CompositeChoice minus(const CompositeChoice& base) const;

  std::size_t hash() const noexcept;

  friend bool operator==(const CompositeChoice&, const CompositeChoice&) = default;
  friend std::strong_ordering operator<=>(const CompositeChoice& a, const CompositeChoice& b);

 private:
  Map choices_;
};

struct CompositeChoiceHash {
  std::size_t operator()(const CompositeChoice& c) const noexcept { return c.hash(); }
};

std::optional<CompositeChoice> union_consistent(const CompositeChoice& a, const CompositeChoice& b);

/// The regular system selected by one choice per grounded probabilistic rule.
struct World {
  std::vector<RegRule> rules;
  CompositeChoice selection;
};

/// Validates, pads sub-stochastic rules with bottom, and classifies symbols.
/// Idempotent.
Model normalize_model(Model raw);

/// Replaces every probabilistic rule that carries a domain clause by its
/// ground instances "<label>#<k>". Idempotent.
Model ground_instances(const Model& m);

/// Number of selections; throws world_count_exceeds_limit above `cap` and
/// unsupported_ungrounded_rule when a probabilistic rule has variables.
std::size_t world_count(const Model& m, std::size_t cap = kDefaultWorldCap);

/// Visits every selection with its probability without materializing worlds,
/// in lexicographic order over (declaration order, alternative index).
void for_each_selection(const Model& m, std::size_t cap,
                        const std::function<void(const CompositeChoice&, const Probability&)>& visit);

World world_of(const Model& m, const CompositeChoice& selection);

std::vector<std::pair<World, Probability>> enumerate_worlds(const Model& m,
                                                            std::size_t cap = kDefaultWorldCap);

/// S|kappa: chosen probabilistic rules become regular rules l theta -> r_i theta.
Model restrict_model(const Model& m, const CompositeChoice& kappa);

/// p(R, i); throws unknown_label when the rule or index does not exist.
Probability choice_probability(const Model& m, const AtomicChoice& atom);

}  // namespace ptrs
