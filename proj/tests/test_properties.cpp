#include "doctest.h"
#include "ptrs/decision_diagram.hpp"
#include "ptrs/engine.hpp"
#include "ptrs/inference.hpp"
#include "support.hpp"

using namespace ptrs;
using namespace ptrs::testing;

TEST_CASE("exact inference equals world enumeration on random models") {
  std::mt19937_64 rng(2024);
  int nonzero = 0;
  for (int it = 0; it < 200; ++it) {
    auto q = random_query(rng);
    CAPTURE(q.text);
    CAPTURE(to_string(q.from));
    CAPTURE(to_string(q.to));
    auto e = exact_query(q.model, q.from, q.to);
    REQUIRE(e.complete);
    auto w = worlds_query(q.model, q.from, q.to);
    REQUIRE(w.kind == ResultKind::exact);
    CHECK(e.value == w.value);
    QueryOptions split;
    split.method = ExactMethod::split;
    CHECK(exact_query(q.model, q.from, q.to, split).value == e.value);
    bool ok = true;
    CHECK(oracle_world_probability(q.model, q.from, q.to, 64, ok) == e.value.value());
    CHECK(ok);
    for (const auto& k : *e.explanations) CHECK(prob_of_choice(q.model, k).value() > 0);
    if (!e.value.is_zero()) ++nonzero;
  }
  CHECK(nonzero > 100);
}

TEST_CASE("pruning options do not change exact answers") {
  std::mt19937_64 rng(77);
  for (int it = 0; it < 100; ++it) {
    auto q = random_query(rng);
    CAPTURE(q.text);
    auto base = exact_query(q.model, q.from, q.to);
    QueryOptions o;
    o.budget.prune_infeasible = true;
    CHECK(exact_query(q.model, q.from, q.to, o).value == base.value);
    QueryOptions z;
    z.budget.prune_zero_prob = false;
    CHECK(exact_query(q.model, q.from, q.to, z).value == base.value);
  }
}

TEST_CASE("splitting and diagrams preserve the measure") {
  std::mt19937_64 rng(99);
  for (int it = 0; it < 300; ++it) {
    auto g = random_choices(rng);
    CAPTURE(it);
    auto split = split_to_incompatible(g.model, g.k);
    CHECK(mutually_incompatible(split));
    Rational truth = oracle_measure(g.model, g.k);
    CHECK(oracle_measure(g.model, split) == truth);
    CHECK(naive_sum(g.model, split) == truth);
    CHECK(measure(g.model, g.k).value() == truth);
    auto dd = compile_dd(g.model, g.k);
    CHECK(is_reduced(dd));
    CHECK(is_ordered(dd));
    CHECK(weighted_count(dd).value() == truth);
    auto rev = compile_dd(g.model, g.k, {"V", "R3", "R2"});
    CHECK(is_reduced(rev));
    CHECK(weighted_count(rev).value() == truth);
    // Every split element lies inside the world set of some original one.
    for (const auto& s : split) {
      bool inside = false;
      for (const auto& k : g.k) inside = inside || k.subset_of(s);
      CHECK(inside);
    }
  }
}

TEST_CASE("bounds tighten monotonically on the corpus") {
  struct Q3 {
    const char* file;
    const char* from;
    const char* to;
  };
  const Q3 qs[] = {{"coins.ptrs", "main", "t2(heads, heads)"},
                   {"coins_switch.ptrs", "switch(main)", "t2(heads, tails)"},
                   {"coins_shortcut.ptrs", "switch(main)", "t2(heads, tails)"},
                   {"covid.ptrs", "protection(senior)", "strong"},
                   {"covid2_where.ptrs", "protection(senior)", "strong"},
                   {"alarm.ptrs", "alarm", "ring"},
                   {"bayesian.ptrs", "death", "true"}};
  for (const auto& q : qs) {
    CAPTURE(q.file);
    Model m = load_model(q.file);
    Probability exact = exact_query(m, T(q.from), T(q.to)).value;
    Probability low = Probability::zero(), high = Probability::one();
    for (std::size_t n = 0; n <= 10; ++n) {
      auto b = bounds_query(m, T(q.from), T(q.to), n);
      CHECK(b.low <= exact);
      CHECK(exact <= b.high);
      CHECK(low <= b.low);
      CHECK(b.high <= high);
      low = b.low;
      high = b.high;
    }
    CHECK(low == exact);
    CHECK(high == exact);
  }
}

TEST_CASE("bounded search agrees with path enumeration on random models") {
  std::mt19937_64 rng(5150);
  for (int it = 0; it < 60; ++it) {
    auto q = random_query(rng);
    CAPTURE(q.text);
    for (std::size_t n = 0; n <= 4; ++n) {
      auto eng = explanations_bounded(q.model, q.from, q.to, n);
      auto ora = oracle_path_bounds(q.model, q.from, q.to, n);
      CHECK(measure(q.model, eng.lower) == measure(q.model, ora.lower));
      CHECK(measure(q.model, eng.upper) == measure(q.model, ora.upper));
    }
  }
}

TEST_CASE("restriction keeps exactly the compatible worlds") {
  std::mt19937_64 rng(8);
  for (int it = 0; it < 100; ++it) {
    auto q = random_query(rng);
    const auto& pr = q.model.prob_rules();
    CompositeChoice kappa;
    for (const auto& r : pr)
      if (rng() % 2) kappa.insert({r.label, {}, 1 + rng() % r.alternatives.size()});
    Model r = restrict_model(q.model, kappa);
    std::size_t compatible = 0;
    for_each_selection(q.model, kDefaultWorldCap, [&](const CompositeChoice& s, const Probability&) {
      if (kappa.subset_of(s)) ++compatible;
    });
    CAPTURE(q.text);
    CHECK(world_count(r) == compatible);
  }
}
