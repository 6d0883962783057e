#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ptrs/error.hpp"
#include "ptrs/model.hpp"
#include "ptrs/probability.hpp"
#include "ptrs/term.hpp"

namespace ptrs {

inline constexpr int kDefaultPrecision = 6;

/// One `rule` or `prob` statement as written.
struct Statement {
  enum class Kind { rule, prob };

  Kind kind = Kind::rule;
  std::string label;
  Term lhs;
  /// A regular rule has exactly one alternative, with probability 1.
  std::vector<Alternative> alternatives;
  std::vector<Condition> conditions;
  std::vector<DomainClause> domains;
  SourceLocation location;

  /// Locations are ignored.
  friend bool operator==(const Statement& a, const Statement& b);
};

struct SourceModel {
  std::vector<Statement> statements;

  friend bool operator==(const SourceModel&, const SourceModel&) = default;
};

/// Throws Error(syntax) with a location.
SourceModel parse_source(std::string_view text);
std::string print_source(const SourceModel& src);

/// Builds and normalizes the model. Errors carry the statement location.
Model to_model(const SourceModel& src);
Model parse_model(std::string_view text);

/// Parses a single term. With a model, symbol arities are checked against it.
Term parse_term(std::string_view text, const Model* m = nullptr);

/// Exact decimal when the denominator is 2^a 5^b, otherwise
/// "num/den (≈0.333333)" rounded half up to `precision` digits.
std::string render(const Rational& value, int precision = kDefaultPrecision);
std::string render(const Probability& p, int precision = kDefaultPrecision);
std::string render(const Term& t);
/// "{(R1,1), (R4,{X/senior},1)}".
std::string render(const CompositeChoice& kappa);
std::string render(const AtomicChoice& atom);

/// Inverse of render(CompositeChoice). Throws Error(syntax).
CompositeChoice parse_choice(std::string_view text);

/// Text of a probability literal that parses back to the same rational.
std::string render_literal(const Rational& value);

}  // namespace ptrs
