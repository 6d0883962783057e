#include "ptrs/model.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace ptrs {

Term bottom() { return Term::constant(kBottomName); }

// ---------------------------------------------------------------------------
// Rules and model

namespace {

void collect_condition_vars(const std::vector<Condition>& conds, std::set<std::string>& out) {
  for (const Condition& c : conds) {
    c.source.collect_vars(out);
    c.target.collect_vars(out);
  }
}

}  // namespace

std::set<std::string> ProbRule::choice_vars() const {
  std::set<std::string> out = lhs.vars();
  collect_condition_vars(conditions, out);
  return out;
}

Model::Model(std::vector<ProbRule> prob_rules, std::vector<RegRule> reg_rules)
    : prob_rules_(std::move(prob_rules)), reg_rules_(std::move(reg_rules)) {
  reindex();
}

void Model::reindex() {
  prob_index_.clear();
  for (std::size_t i = 0; i < prob_rules_.size(); ++i) prob_index_.emplace(prob_rules_[i].label, i);
}

const ProbRule* Model::find_prob_rule(std::string_view label) const {
  auto idx = prob_rule_index(label);
  return idx ? &prob_rules_[*idx] : nullptr;
}

std::optional<std::size_t> Model::prob_rule_index(std::string_view label) const {
  auto it = prob_index_.find(std::string(label));
  if (it == prob_index_.end()) return std::nullopt;
  return it->second;
}

SymbolClass Model::classify(const Symbol& f) const {
  auto it = classes_.find(f);
  return it == classes_.end() ? SymbolClass::constructor : it->second;
}

std::optional<std::size_t> Model::arity_of(std::string_view name) const {
  // Symbols order by name first, so all arities of a name are adjacent.
  auto it = classes_.lower_bound(Symbol(name, 0));
  if (it != classes_.end() && it->first.name() == name) return it->first.arity();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Choices

int natural_compare(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t i2 = i, j2 = j;
      while (i2 < a.size() && digit(a[i2])) ++i2;
      while (j2 < b.size() && digit(b[j2])) ++j2;
      std::string_view na = a.substr(i, i2 - i);
      std::string_view nb = b.substr(j, j2 - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size() ? -1 : 1;
      if (int c = na.compare(nb); c != 0) return c < 0 ? -1 : 1;
      // Equal value: the shorter digit run (fewer leading zeros) first.
      if (i2 - i != j2 - j) return (i2 - i) < (j2 - j) ? -1 : 1;
      i = i2;
      j = j2;
      continue;
    }
    if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]) ? -1 : 1;
    ++i;
    ++j;
  }
  if (i == a.size() && j == b.size()) return 0;
  return i == a.size() ? -1 : 1;
}

std::strong_ordering operator<=>(const ChoiceKey& a, const ChoiceKey& b) {
  if (int c = natural_compare(a.rule, b.rule); c != 0) {
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return a.theta <=> b.theta;
}

CompositeChoice::CompositeChoice(std::initializer_list<AtomicChoice> atoms) {
  for (const AtomicChoice& a : atoms) {
    if (!insert(a)) {
      throw Error(ErrorKind::inconsistent_composite_choice,
                  "two different choices for rule " + a.rule + " " + to_string(a.theta));
    }
  }
}

CompositeChoice CompositeChoice::from_atoms(const std::vector<AtomicChoice>& atoms) {
  CompositeChoice out;
  for (const AtomicChoice& a : atoms) {
    if (!out.insert(a)) {
      throw Error(ErrorKind::inconsistent_composite_choice,
                  "two different choices for rule " + a.rule + " " + to_string(a.theta));
    }
  }
  return out;
}

std::vector<AtomicChoice> CompositeChoice::atoms() const {
  std::vector<AtomicChoice> out;
  out.reserve(choices_.size());
  for (const auto& [k, i] : choices_) out.push_back({k.rule, k.theta, i});
  return out;
}

std::optional<std::size_t> CompositeChoice::index_of(const ChoiceKey& key) const {
  auto it = choices_.find(key);
  if (it == choices_.end()) return std::nullopt;
  return it->second;
}

bool CompositeChoice::consistent_with(const AtomicChoice& atom) const {
  auto idx = index_of(atom.key());
  return !idx || *idx == atom.index;
}

bool CompositeChoice::insert(const AtomicChoice& atom) {
  auto [it, inserted] = choices_.emplace(atom.key(), atom.index);
  return inserted || it->second == atom.index;
}

bool CompositeChoice::contains(const AtomicChoice& atom) const {
  auto idx = index_of(atom.key());
  return idx && *idx == atom.index;
}

bool CompositeChoice::subset_of(const CompositeChoice& other) const {
  if (size() > other.size()) return false;
  for (const auto& [k, i] : choices_) {
    auto idx = other.index_of(k);
    if (!idx || *idx != i) return false;
  }
  return true;
}

bool CompositeChoice::compatible_with(const CompositeChoice& other) const {
  const CompositeChoice& small = size() <= other.size() ? *this : other;
  const CompositeChoice& large = size() <= other.size() ? other : *this;
  for (const auto& [k, i] : small.choices_) {
    auto idx = large.index_of(k);
    if (idx && *idx != i) return false;
  }
  return true;
}

CompositeChoice CompositeChoice::minus(const CompositeChoice& base) const {
  CompositeChoice out;
  for (const auto& [k, i] : choices_) {
    if (!base.index_of(k)) out.choices_.emplace(k, i);
  }
  return out;
}

std::size_t CompositeChoice::hash() const noexcept {
  std::size_t h = 0xcbf29ce4u;
  for (const auto& [k, i] : choices_) {
    std::size_t kh = std::hash<std::string>{}(k.rule) ^ (hash_value(k.theta) * 31);
    h = (h ^ (kh + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2))) * 1099511628211ULL + i;
  }
  return h;
}

std::strong_ordering operator<=>(const CompositeChoice& a, const CompositeChoice& b) {
  auto ia = a.choices_.begin();
  auto ib = b.choices_.begin();
  for (; ia != a.choices_.end() && ib != b.choices_.end(); ++ia, ++ib) {
    if (auto c = ia->first <=> ib->first; c != 0) return c;
    if (auto c = ia->second <=> ib->second; c != 0) return c;
  }
  return a.choices_.size() <=> b.choices_.size();
}

std::optional<CompositeChoice> union_consistent(const CompositeChoice& a, const CompositeChoice& b) {
  CompositeChoice out = a;
  for (const AtomicChoice& atom : b.atoms()) {
    if (!out.insert(atom)) return std::nullopt;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

class SymbolCollector {
 public:
  void add(const Term& t, const std::optional<SourceLocation>& loc) {
    if (t.is_var()) return;
    auto [it, inserted] = arity_.emplace(t.name(), t.arity());
    if (!inserted && it->second != t.arity()) {
      throw Error(ErrorKind::arity_mismatch,
                  "symbol '" + t.name() + "' used with arity " + std::to_string(t.arity()) +
                      " and arity " + std::to_string(it->second),
                  loc);
    }
    symbols_.insert(t.symbol());
    for (const Term& a : t.args()) add(a, loc);
  }
  const std::set<Symbol>& symbols() const { return symbols_; }

 private:
  std::map<std::string, std::size_t> arity_;
  std::set<Symbol> symbols_;
};

bool mentions_bottom(const Term& t) {
  if (t.is_var()) return false;
  if (t.name() == kBottomName) return true;
  for (const Term& a : t.args()) {
    if (mentions_bottom(a)) return true;
  }
  return false;
}

void check_not_reserved(const Term& t, const std::optional<SourceLocation>& loc) {
  if (mentions_bottom(t)) {
    throw Error(ErrorKind::reserved_symbol,
                "'" + std::string(kBottomName) + "' is reserved and cannot appear in a model", loc);
  }
}

void check_rhs_vars(const std::string& label, const Term& lhs, const std::vector<Condition>& conds,
                    const Term& rhs, const std::optional<SourceLocation>& loc) {
  std::set<std::string> allowed = lhs.vars();
  collect_condition_vars(conds, allowed);
  for (const std::string& x : rhs.vars()) {
    if (!allowed.count(x)) {
      throw Error(ErrorKind::invalid_rule,
                  "rule " + label + ": variable " + x + " of the right-hand side occurs neither in the "
                      "left-hand side nor in the conditions",
                  loc);
    }
  }
}

void check_lhs(const std::string& label, const Term& lhs, const std::optional<SourceLocation>& loc) {
  if (lhs.is_var()) {
    throw Error(ErrorKind::invalid_rule, "rule " + label + ": left-hand side must not be a variable", loc);
  }
}

}  // namespace

Model normalize_model(Model raw) {
  Model m;
  m.prob_rules_ = std::move(raw.prob_rules_);
  m.reg_rules_ = std::move(raw.reg_rules_);

  std::set<std::string> labels;
  auto check_label = [&](const std::string& label, const std::optional<SourceLocation>& loc) {
    if (!labels.insert(label).second) {
      throw Error(ErrorKind::duplicate_label, "label " + label + " is used more than once", loc);
    }
  };

  SymbolCollector symbols;
  std::set<Symbol> prob_roots;
  std::set<Symbol> reg_roots;

  for (ProbRule& r : m.prob_rules_) {
    check_label(r.label, r.location);
    check_lhs(r.label, r.lhs, r.location);
    if (r.alternatives.empty()) {
      throw Error(ErrorKind::invalid_rule, "rule " + r.label + " has no alternatives", r.location);
    }
    check_not_reserved(r.lhs, r.location);
    symbols.add(r.lhs, r.location);
    for (const Condition& c : r.conditions) {
      check_not_reserved(c.source, r.location);
      check_not_reserved(c.target, r.location);
      symbols.add(c.source, r.location);
      symbols.add(c.target, r.location);
    }
    Rational sum = 0;
    for (std::size_t i = 0; i < r.alternatives.size(); ++i) {
      const Alternative& alt = r.alternatives[i];
      bool is_padding = r.padded && i + 1 == r.alternatives.size();
      if (!is_padding) check_not_reserved(alt.rhs, r.location);
      symbols.add(alt.rhs, r.location);
      check_rhs_vars(r.label, r.lhs, r.conditions, alt.rhs, r.location);
      sum += alt.prob.value();
    }
    if (sum > 1) {
      throw Error(ErrorKind::probability_sum_exceeds_one,
                  "rule " + r.label + ": probabilities sum to " + sum.get_str() + " > 1", r.location);
    }
    if (sum < 1) {
      r.alternatives.push_back({Probability(1 - sum), bottom()});
      r.padded = true;
      symbols.add(r.alternatives.back().rhs, r.location);
    }

    std::set<std::string> vars = r.choice_vars();
    if (!r.domains.empty()) {
      std::set<std::string> covered;
      for (const DomainClause& d : r.domains) {
        if (!covered.insert(d.var).second) {
          throw Error(ErrorKind::invalid_rule, "rule " + r.label + ": variable " + d.var + " has two domains",
                      r.location);
        }
        if (!vars.count(d.var)) {
          throw Error(ErrorKind::invalid_rule,
                      "rule " + r.label + ": domain variable " + d.var + " does not occur in the rule",
                      r.location);
        }
        if (d.values.empty()) {
          throw Error(ErrorKind::invalid_rule, "rule " + r.label + ": empty domain for " + d.var, r.location);
        }
        for (const Term& v : d.values) {
          check_not_reserved(v, r.location);
          symbols.add(v, r.location);
        }
      }
      for (const std::string& x : vars) {
        if (!covered.count(x)) {
          throw Error(ErrorKind::incomplete_domain,
                      "rule " + r.label + ": the where clause does not cover variable " + x, r.location);
        }
      }
    } else if (!vars.empty()) {
      m.warnings_.push_back({"rule " + r.label +
                                 " has variables and no domain clause; its instances are grounded "
                                 "dynamically during rewriting",
                             r.location});
    }
    prob_roots.insert(r.lhs.symbol());
  }

  for (RegRule& r : m.reg_rules_) {
    check_label(r.label, r.location);
    check_lhs(r.label, r.lhs, r.location);
    if (!r.generated) {
      check_not_reserved(r.lhs, r.location);
      check_not_reserved(r.rhs, r.location);
    }
    symbols.add(r.lhs, r.location);
    symbols.add(r.rhs, r.location);
    for (const Condition& c : r.conditions) {
      if (!r.generated) {
        check_not_reserved(c.source, r.location);
        check_not_reserved(c.target, r.location);
      }
      symbols.add(c.source, r.location);
      symbols.add(c.target, r.location);
    }
    check_rhs_vars(r.label, r.lhs, r.conditions, r.rhs, r.location);
    reg_roots.insert(r.lhs.symbol());
  }

  for (const RegRule& r : m.reg_rules_) {
    // Restricted instances may share a root with the remaining rules of S_p.
    if (!r.generated && prob_roots.count(r.lhs.symbol())) {
      throw Error(ErrorKind::defined_symbol_classified_twice,
                  "symbol '" + r.lhs.name() + "' is defined by both probabilistic and regular rules",
                  r.location);
    }
  }

  for (const Symbol& f : symbols.symbols()) {
    SymbolClass c = SymbolClass::constructor;
    if (prob_roots.count(f)) {
      c = SymbolClass::probabilistic_defined;
    } else if (reg_roots.count(f)) {
      c = SymbolClass::regular_defined;
    }
    m.classes_.emplace(f, c);
  }
  m.warnings_.insert(m.warnings_.begin(), raw.warnings_.begin(), raw.warnings_.end());
  // Re-normalizing must not duplicate warnings.
  std::vector<Diagnostic> unique;
  for (const Diagnostic& d : m.warnings_) {
    bool seen = std::any_of(unique.begin(), unique.end(), [&](const Diagnostic& u) {
      return u.message == d.message;
    });
    if (!seen) unique.push_back(d);
  }
  m.warnings_ = std::move(unique);
  m.normalized_ = true;
  m.reindex();
  return m;
}

// ---------------------------------------------------------------------------
// Grounding

namespace {

std::vector<Condition> apply_conditions(const Substitution& s, const std::vector<Condition>& conds) {
  std::vector<Condition> out;
  out.reserve(conds.size());
  for (const Condition& c : conds) out.push_back({apply_subst(s, c.source), apply_subst(s, c.target)});
  return out;
}

}  // namespace

Model ground_instances(const Model& m) {
  std::vector<ProbRule> prob;
  for (const ProbRule& r : m.prob_rules()) {
    if (r.domains.empty()) {
      prob.push_back(r);
      continue;
    }
    for (const DomainClause& d : r.domains) {
      for (const Term& v : d.values) {
        if (!v.ground()) {
          throw Error(ErrorKind::domain_term_not_ground,
                      "rule " + r.label + ": domain value " + to_string(v) + " for " + d.var + " is not ground",
                      r.location);
        }
      }
    }
    // Odometer over the domains; the first declared variable varies slowest.
    std::vector<std::size_t> digits(r.domains.size(), 0);
    std::size_t k = 0;
    while (true) {
      Substitution theta;
      for (std::size_t i = 0; i < digits.size(); ++i) theta.bind(r.domains[i].var, r.domains[i].values[digits[i]]);
      ProbRule inst{r.label + "#" + std::to_string(++k), apply_subst(theta, r.lhs), {}, {}, {}, {}, false, {}, {}, {}};
      for (const Alternative& alt : r.alternatives) inst.alternatives.push_back({alt.prob, apply_subst(theta, alt.rhs)});
      inst.conditions = apply_conditions(theta, r.conditions);
      inst.location = r.location;
      inst.padded = r.padded;
      inst.origin_label = r.label;
      inst.origin_grounding = theta;
      prob.push_back(std::move(inst));

      std::size_t pos = digits.size();
      bool done = true;
      while (pos > 0) {
        --pos;
        if (++digits[pos] < r.domains[pos].values.size()) {
          done = false;
          break;
        }
        digits[pos] = 0;
      }
      if (done) break;
    }
  }
  return normalize_model(Model(std::move(prob), m.reg_rules()));
}

// ---------------------------------------------------------------------------
// Worlds

std::size_t world_count(const Model& m, std::size_t cap) {
  std::size_t count = 1;
  for (const ProbRule& r : m.prob_rules()) {
    if (!r.ground()) {
      throw Error(ErrorKind::unsupported_ungrounded_rule,
                  "rule " + r.label + " has variables; worlds cannot be enumerated", r.location);
    }
    std::size_t n = r.alternatives.size();
    if (count > cap / n) {
      throw Error(ErrorKind::world_count_exceeds_limit,
                  "more than " + std::to_string(cap) + " worlds");
    }
    count *= n;
  }
  if (count > cap) throw Error(ErrorKind::world_count_exceeds_limit, "more than " + std::to_string(cap) + " worlds");
  return count;
}

void for_each_selection(const Model& m, std::size_t cap,
                        const std::function<void(const CompositeChoice&, const Probability&)>& visit) {
  world_count(m, cap);
  const auto& rules = m.prob_rules();
  std::vector<std::size_t> digits(rules.size(), 0);
  while (true) {
    CompositeChoice selection;
    Probability p = Probability::one();
    for (std::size_t i = 0; i < rules.size(); ++i) {
      selection.insert({rules[i].label, {}, digits[i] + 1});
      p *= rules[i].alternatives[digits[i]].prob;
    }
    visit(selection, p);
    std::size_t pos = rules.size();
    bool done = true;
    while (pos > 0) {
      --pos;
      if (++digits[pos] < rules[pos].alternatives.size()) {
        done = false;
        break;
      }
      digits[pos] = 0;
    }
    if (done) break;
  }
}

World world_of(const Model& m, const CompositeChoice& selection) {
  World w;
  w.selection = selection;
  for (const ProbRule& r : m.prob_rules()) {
    auto idx = selection.index_of({r.label, {}});
    if (!idx) {
      throw Error(ErrorKind::inconsistent_composite_choice, "selection has no choice for rule " + r.label);
    }
    if (*idx == 0 || *idx > r.alternatives.size()) {
      throw Error(ErrorKind::unknown_label, "rule " + r.label + " has no alternative " + std::to_string(*idx));
    }
    w.rules.push_back({r.label, r.lhs, r.alternatives[*idx - 1].rhs, r.conditions, r.location, true});
  }
  for (const RegRule& r : m.reg_rules()) w.rules.push_back(r);
  return w;
}

std::vector<std::pair<World, Probability>> enumerate_worlds(const Model& m, std::size_t cap) {
  std::vector<std::pair<World, Probability>> out;
  for_each_selection(m, cap, [&](const CompositeChoice& sel, const Probability& p) {
    out.emplace_back(world_of(m, sel), p);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Restriction

Probability choice_probability(const Model& m, const AtomicChoice& atom) {
  const ProbRule* r = m.find_prob_rule(atom.rule);
  if (!r) throw Error(ErrorKind::unknown_label, "no probabilistic rule labeled " + atom.rule);
  if (atom.index == 0 || atom.index > r->alternatives.size()) {
    throw Error(ErrorKind::unknown_label, "rule " + atom.rule + " has no alternative " + std::to_string(atom.index));
  }
  return r->alternatives[atom.index - 1].prob;
}

Model restrict_model(const Model& m, const CompositeChoice& kappa) {
  std::map<std::string, std::vector<AtomicChoice>> by_rule;
  for (const AtomicChoice& a : kappa.atoms()) {
    const ProbRule* r = m.find_prob_rule(a.rule);
    if (!r) throw Error(ErrorKind::unknown_label, "no probabilistic rule labeled " + a.rule);
    choice_probability(m, a);
    std::set<std::string> vars = r->choice_vars();
    std::set<std::string> bound;
    for (const auto& [x, t] : a.theta.bindings()) {
      if (!t.ground()) {
        throw Error(ErrorKind::inconsistent_composite_choice, "grounding " + to_string(a.theta) + " is not ground");
      }
      bound.insert(x);
    }
    if (bound != vars) {
      throw Error(ErrorKind::inconsistent_composite_choice,
                  "grounding " + to_string(a.theta) + " does not match the variables of rule " + a.rule);
    }
    by_rule[a.rule].push_back(a);
  }

  std::vector<ProbRule> prob;
  std::vector<RegRule> generated;
  for (const ProbRule& r : m.prob_rules()) {
    auto it = by_rule.find(r.label);
    if (it == by_rule.end()) {
      prob.push_back(r);
      continue;
    }
    ProbRule rest = r;
    for (const AtomicChoice& a : it->second) {
      generated.push_back({a.theta.empty() ? r.label : r.label + "@" + to_string(a.theta),
                           apply_subst(a.theta, r.lhs), apply_subst(a.theta, r.alternatives[a.index - 1].rhs),
                           apply_conditions(a.theta, r.conditions), r.location, true});
      rest.fixed_groundings.insert(a.theta);
    }
    // A ground rule has a single instance, which is now fixed.
    if (!r.ground()) prob.push_back(std::move(rest));
  }
  std::vector<RegRule> reg = m.reg_rules();
  reg.insert(reg.end(), generated.begin(), generated.end());

  Model raw(std::move(prob), std::move(reg));
  return normalize_model(std::move(raw));
}

}  // namespace ptrs
