#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ptrs/inference.hpp"
#include "ptrs/model.hpp"
#include "ptrs/syntax.hpp"

namespace ptrs::testing {

Model load_model(const std::string& file);
std::string models_dir();
Term T(const std::string& text);
Rational Q(const std::string& text);
CompositeChoice C(const std::string& text);
std::set<CompositeChoice> K(const std::vector<std::string>& choices);

// ---------------------------------------------------------------------------
// Oracles. None of these go through the explanation search or the splitting code.

/// Reachability s ->* t in an ordinary (conditional) ground rewrite system,
/// by breadth-first search over terms. `ok` is cleared when the depth limit
/// cut the search.
bool oracle_reaches(const std::vector<RegRule>& rules, const Term& s, const Term& t, std::size_t depth,
                    bool& ok);

/// Every term reachable from s within `depth` steps, s included.
std::vector<Term> oracle_reach_set(const std::vector<RegRule>& rules, const Term& s, std::size_t depth);

/// Sum of P(W) over every selection whose world reaches t from s. Enumerates
/// selections with its own odometer over the grounded model.
Rational oracle_world_probability(const Model& grounded, const Term& s, const Term& t, std::size_t depth,
                                  bool& ok);

/// mu(K) by summing over all joint assignments of the variables K mentions.
Rational oracle_measure(const Model& m, const std::set<CompositeChoice>& k);

/// E_l and E_u at depth n by enumerating every derivation path of length at
/// most n, without merging states.
struct PathBounds {
  std::set<CompositeChoice> lower;
  std::set<CompositeChoice> upper;
};
PathBounds oracle_path_bounds(const Model& m, const Term& s, const Term& t, std::size_t n);

// ---------------------------------------------------------------------------
// Generators.

struct GeneratedQuery {
  Model model;
  Term from;
  Term to;
  std::string text;
};

/// Ground model with at most 5 probabilistic rules of at most 3 alternatives
/// and at most 4 regular rules. Every rule's lhs root outranks all symbols of
/// its right-hand side and conditions, so rewriting terminates.
GeneratedQuery random_query(std::mt19937_64& rng);

/// Random consistent explanation sets over a random model, with a variable
/// rule contributing several groundings.
struct GeneratedChoices {
  Model model;
  std::set<CompositeChoice> k;
};
GeneratedChoices random_choices(std::mt19937_64& rng);

}  // namespace ptrs::testing
