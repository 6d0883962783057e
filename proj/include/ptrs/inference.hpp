#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ptrs/engine.hpp"
#include "ptrs/model.hpp"
#include "ptrs/probability.hpp"

namespace ptrs {

enum class ExactMethod { dd, split };

enum class ResultKind { exact, interval, estimate };

struct QueryResult {
  ResultKind kind = ResultKind::exact;
  /// kind == exact.
  Probability value;
  /// kind == interval.
  Probability low;
  Probability high;
  /// kind == estimate: successes / samples. `unknown` samples hit the budget
  /// and count as failures.
  Rational estimate{0};
  std::size_t samples = 0;
  std::size_t successes = 0;
  std::size_t unknown = 0;

  std::optional<std::set<CompositeChoice>> explanations;
  std::vector<Derivation> derivations;
  /// False when the explanation search was truncated; `value` is then only
  /// a lower bound.
  bool complete = true;
  std::vector<Diagnostic> diagnostics;
};

/// P(kappa): product of the chosen alternatives' probabilities.
Probability prob_of_choice(const Model& m, const CompositeChoice& kappa);

/// Sum of P(kappa) over K; exceeds 1 when explanations overlap.
Rational naive_sum(const Model& m, const std::set<CompositeChoice>& k);

/// Mutually incompatible set with the same worlds.
std::set<CompositeChoice> split_to_incompatible(const Model& m, const std::set<CompositeChoice>& k);

bool mutually_incompatible(const std::set<CompositeChoice>& k);

/// mu(K), through splitting.
Probability measure(const Model& m, const std::set<CompositeChoice>& k);

struct QueryOptions {
  SearchBudget budget;
  ExactMethod method = ExactMethod::dd;
  std::vector<std::string> var_order;
  std::size_t world_cap = kDefaultWorldCap;
};

/// Models with domain clauses are grounded first.
QueryResult exact_query(const Model& m, const Term& s, const Term& t, const QueryOptions& opts = {});
QueryResult worlds_query(const Model& m, const Term& s, const Term& t, const QueryOptions& opts = {});
QueryResult bounds_query(const Model& m, const Term& s, const Term& t, std::size_t n, const QueryOptions& opts = {});

struct MonteCarloOptions {
  SearchBudget budget;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  /// 0 picks the hardware concurrency.
  std::size_t threads = 1;
};

/// Samples worlds lazily. For a fixed seed the result does not depend on the
/// thread count.
QueryResult mc_query(const Model& m, const Term& s, const Term& t, const MonteCarloOptions& opts = {});

/// The alternative (1-based) drawn for variable `key` in sample `sample`.
std::size_t draw_alternative(std::uint64_t seed, std::uint64_t sample, const ChoiceKey& key,
                             const std::vector<Probability>& weights);

}  // namespace ptrs
