#include "doctest.h"
#include "ptrs/model.hpp"
#include "ptrs/syntax.hpp"
#include "support.hpp"

using namespace ptrs;
using namespace ptrs::testing;

namespace {

ErrorKind load_error(const std::string& text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("model was accepted");
  return ErrorKind::syntax;
}

}  // namespace

TEST_CASE("natural label order") {
  CHECK(natural_compare("R2", "R10") < 0);
  CHECK(natural_compare("R10", "R10#2") < 0);
  CHECK(natural_compare("R4#2", "R4#10") < 0);
  CHECK(natural_compare("R1", "R1") == 0);
  CHECK(natural_compare("b", "a") > 0);
}

TEST_CASE("composite choices") {
  CompositeChoice k{{"R1", {}, 1}, {"R2", {}, 2}};
  CHECK(k.size() == 2);
  CHECK(k.contains({"R1", {}, 1}));
  CHECK_FALSE(k.consistent_with({"R1", {}, 2}));
  CHECK_THROWS_AS((CompositeChoice{{"R1", {}, 1}, {"R1", {}, 2}}), Error);

  CompositeChoice small{{"R1", {}, 1}};
  CHECK(small.subset_of(k));
  CHECK_FALSE(k.subset_of(small));
  CHECK(k.minus(small) == CompositeChoice{{"R2", {}, 2}});

  CompositeChoice other{{"R2", {}, 1}};
  CHECK_FALSE(k.compatible_with(other));
  CHECK_FALSE(union_consistent(k, other));
  auto u = union_consistent(small, other);
  REQUIRE(u);
  CHECK(u->size() == 2);

  CompositeChoice copy = k;
  CHECK_FALSE(copy.insert({"R2", {}, 1}));
  CHECK(copy == k);

  SUBCASE("groundings make distinct variables") {
    Substitution a, b;
    a.bind("X", T("senior"));
    b.bind("X", T("adult"));
    CompositeChoice c{{"R4", a, 1}, {"R4", b, 2}};
    CHECK(c.size() == 2);
  }
}

TEST_CASE("normalization pads, classifies and validates") {
  Model m = load_model("alarm.ptrs");
  const ProbRule* r3 = m.find_prob_rule("R3");
  REQUIRE(r3);
  CHECK(r3->padded);
  REQUIRE(r3->alternatives.size() == 2);
  CHECK(r3->alternatives[1].rhs == bottom());
  CHECK(r3->alternatives[1].prob.value() == Q("0.1"));
  CHECK(m.classify(Symbol("alarm", 0)) == SymbolClass::probabilistic_defined);
  CHECK(m.classify(Symbol("ring", 0)) == SymbolClass::constructor);

  Model c = load_model("coins_switch.ptrs");
  CHECK(c.classify(Symbol("switch", 1)) == SymbolClass::regular_defined);
  CHECK(c.classify(Symbol("coin1", 0)) == SymbolClass::probabilistic_defined);
  CHECK_FALSE(c.find_prob_rule("R1")->padded);

  SUBCASE("idempotent") {
    Model again = normalize_model(m);
    REQUIRE(again.prob_rules().size() == m.prob_rules().size());
    for (std::size_t i = 0; i < m.prob_rules().size(); ++i) {
      CHECK(again.prob_rules()[i].alternatives.size() == m.prob_rules()[i].alternatives.size());
    }
    CHECK(again.warnings().size() == m.warnings().size());
  }
}

TEST_CASE("normalization errors") {
  CHECK(load_error("prob R1: c -> 0.6: a; 0.5: b.") == ErrorKind::probability_sum_exceeds_one);
  CHECK(load_error("prob R1: c -> 1.5: a.") == ErrorKind::probability_out_of_range);
  CHECK(load_error("rule R1: f -> a.\nrule R1: g -> b.") == ErrorKind::duplicate_label);
  CHECK(load_error("prob R1: c -> 1: a.\nrule R2: c -> b.") == ErrorKind::defined_symbol_classified_twice);
  CHECK(load_error("rule R1: f(a) -> g.\nrule R2: f -> g.") == ErrorKind::arity_mismatch);
  CHECK(load_error("rule R1: f -> bot.") == ErrorKind::reserved_symbol);
  CHECK(load_error("rule R1: f -> X.") == ErrorKind::invalid_rule);
  CHECK(load_error("rule R1: X -> a.") == ErrorKind::invalid_rule);
  CHECK(load_error("prob R1: m(X, Y) -> 1: a where X in {b}.") == ErrorKind::incomplete_domain);
  CHECK(load_error("prob R1: m(X -> 1: a.") == ErrorKind::syntax);
}

TEST_CASE("errors carry the statement location") {
  try {
    parse_model("rule R1: f -> a.\n\nprob R2: c -> 0.6: a; 0.5: b.");
    FAIL("accepted");
  } catch (const Error& e) {
    REQUIRE(e.location());
    CHECK(e.location()->line == 3);
    CHECK(e.location()->column == 1);
  }
}

TEST_CASE("dynamic rules warn once") {
  Model m = load_model("covid3_dynamic.ptrs");
  REQUIRE(m.warnings().size() == 1);
  CHECK(m.warnings()[0].message.find("R4") != std::string::npos);
  CHECK(normalize_model(m).warnings().size() == 1);
  CHECK_THROWS_AS(world_count(m), Error);
}

TEST_CASE("grounding expands domains in order") {
  Model m = load_model("covid2_where.ptrs");
  Model g = ground_instances(m);
  std::vector<std::string> labels;
  for (const auto& r : g.prob_rules()) labels.push_back(r.label);
  CHECK(labels == std::vector<std::string>{"R1", "R2", "R3", "R4#1", "R4#2", "R4#3"});
  const ProbRule* r = g.find_prob_rule("R4#2");
  REQUIRE(r);
  CHECK(r->lhs == T("mask(adult)"));
  CHECK(r->origin_label == "R4");
  CHECK(*r->origin_grounding.find("X") == T("adult"));
  CHECK(r->ground());
  CHECK(world_count(g) == 216);
  // Idempotent.
  CHECK(ground_instances(g).prob_rules().size() == g.prob_rules().size());

  SUBCASE("two variables, first slowest") {
    Model two = parse_model("prob R1: m(X, Y) -> 1: a where X in {p, q}, Y in {u, v}.");
    Model gt = ground_instances(two);
    REQUIRE(gt.prob_rules().size() == 4);
    CHECK(gt.prob_rules()[0].lhs == T("m(p, u)"));
    CHECK(gt.prob_rules()[1].lhs == T("m(p, v)"));
    CHECK(gt.prob_rules()[2].lhs == T("m(q, u)"));
  }
}

TEST_CASE("worlds") {
  Model m = load_model("coins.ptrs");
  CHECK(world_count(m) == 4);
  auto worlds = enumerate_worlds(m);
  REQUIRE(worlds.size() == 4);
  std::vector<Rational> probs;
  Rational total = 0;
  for (const auto& [w, p] : worlds) {
    probs.push_back(p.value());
    total += p.value();
    CHECK(w.rules.size() == m.reg_rules().size() + m.prob_rules().size());
  }
  CHECK(probs == std::vector<Rational>{Q("0.3"), Q("0.2"), Q("0.3"), Q("0.2")});
  CHECK(total == 1);
  CHECK(worlds[1].first.selection == C("{(R1,1), (R2,2)}"));
  CHECK_THROWS_AS(world_count(m, 3), Error);

  std::size_t visits = 0;
  for_each_selection(m, kDefaultWorldCap, [&](const CompositeChoice& s, const Probability& p) {
    CHECK(s.size() == 2);
    CHECK(p == prob_of_choice(m, s));
    ++visits;
  });
  CHECK(visits == 4);
}

TEST_CASE("choice probabilities") {
  Model m = load_model("coins.ptrs");
  CHECK(choice_probability(m, {"R2", {}, 2}).value() == Q("0.4"));
  CHECK_THROWS_AS(choice_probability(m, {"R2", {}, 3}), Error);
  CHECK_THROWS_AS(choice_probability(m, {"R9", {}, 1}), Error);
}

TEST_CASE("restriction") {
  Model m = load_model("coins.ptrs");
  Model r = restrict_model(m, C("{(R1,2)}"));
  CHECK(r.prob_rules().size() == 1);
  CHECK(r.reg_rules().size() == m.reg_rules().size() + 1);
  const RegRule& gen = r.reg_rules().back();
  CHECK(gen.generated);
  CHECK(gen.label == "R1");
  CHECK(gen.rhs == T("tails"));
  CHECK(r.classify(Symbol("coin1", 0)) == SymbolClass::regular_defined);

  SUBCASE("restricting by the empty choice changes nothing") {
    Model e = restrict_model(m, {});
    CHECK(e.prob_rules().size() == m.prob_rules().size());
    CHECK(e.reg_rules().size() == m.reg_rules().size());
  }
  SUBCASE("a full selection gives the world") {
    Model w = restrict_model(m, C("{(R1,1), (R2,2)}"));
    CHECK(w.prob_rules().empty());
    CHECK(w.reg_rules().size() == world_of(m, C("{(R1,1), (R2,2)}")).rules.size());
  }
  SUBCASE("restriction composes") {
    Model a = restrict_model(restrict_model(m, C("{(R1,1)}")), C("{(R2,1)}"));
    Model b = restrict_model(m, C("{(R1,1), (R2,1)}"));
    CHECK(a.prob_rules().size() == b.prob_rules().size());
    CHECK(a.reg_rules().size() == b.reg_rules().size());
  }
  SUBCASE("dynamic instances stay probabilistic") {
    Model d = load_model("covid3_dynamic.ptrs");
    Model rd = restrict_model(d, C("{(R4,{X/senior},1)}"));
    const ProbRule* r4 = rd.find_prob_rule("R4");
    REQUIRE(r4);
    CHECK(r4->fixed_groundings.size() == 1);
    CHECK(rd.reg_rules().back().lhs == T("mask(senior)"));
    CHECK(rd.reg_rules().back().rhs == T("ffp2"));
  }
  CHECK_THROWS_AS(restrict_model(m, C("{(R7,1)}")), Error);
  CHECK_THROWS_AS(restrict_model(m, C("{(R1,3)}")), Error);
}
