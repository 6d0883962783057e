#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptrs {

/// A ranked function symbol. Names are interned process-wide, so equality is
/// a pointer comparison plus the arity.
class Symbol {
 public:
  Symbol(std::string_view name, std::size_t arity);

  const std::string& name() const noexcept { return *name_; }
  std::size_t arity() const noexcept { return arity_; }

  friend bool operator==(const Symbol& a, const Symbol& b) noexcept {
    return a.name_ == b.name_ && a.arity_ == b.arity_;
  }
  /// Orders by name text, then arity.
  friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) noexcept;

 private:
  friend class Term;
  Symbol(const std::string* interned, std::size_t arity) : name_(interned), arity_(arity) {}

  const std::string* name_;
  std::size_t arity_;
};

struct SymbolHash {
  std::size_t operator()(const Symbol& s) const noexcept;
};

/// Returns the stable interned copy of `name`.
const std::string* intern(std::string_view name);

class Term;

namespace detail {
struct TermNode;
}

/// Immutable first-order term: a variable or an application f(t1, ..., tn).
/// Copies share structure.
class Term {
 public:
  static Term var(std::string_view name);
  /// Throws Error(arity_mismatch) when args.size() != f.arity().
  static Term app(const Symbol& f, std::vector<Term> args = {});
  /// Shorthand for a nullary application.
  static Term constant(std::string_view name);

  bool is_var() const noexcept;
  bool is_app() const noexcept { return !is_var(); }
  /// Variable name or the symbol name.
  const std::string& name() const noexcept;
  /// Precondition: is_app().
  Symbol symbol() const;
  std::span<const Term> args() const noexcept;
  std::size_t arity() const noexcept { return args().size(); }

  bool ground() const noexcept;
  std::size_t hash() const noexcept;
  /// Number of nodes.
  std::size_t size() const noexcept;

  std::set<std::string> vars() const;
  void collect_vars(std::set<std::string>& out) const;

  friend bool operator==(const Term& a, const Term& b) noexcept;
  /// Total structural order: variables before applications, then by name,
  /// arity and arguments left to right.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept;

 private:
  explicit Term(std::shared_ptr<const detail::TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::TermNode> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

/// Path of 1-based argument indexes from the root.
class Position {
 public:
  Position() = default;
  explicit Position(std::vector<std::size_t> steps);

  static Position root() { return Position(); }
  bool is_root() const noexcept { return steps_.empty(); }
  const std::vector<std::size_t>& steps() const noexcept { return steps_; }
  Position child(std::size_t index) const;
  /// True when this is a proper prefix of `other`.
  bool strictly_above(const Position& other) const;
  /// "ε" for the root, otherwise dot-separated steps such as "1.2".
  std::string to_string() const;

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;

 private:
  std::vector<std::size_t> steps_;
};

/// All positions of `t` in pre-order (leftmost-outermost first).
std::vector<Position> positions(const Term& t);
bool valid_position(const Term& t, const Position& pos);
/// Throws Error(invalid_position).
const Term& subterm_at(const Term& t, const Position& pos);
/// t[s]_pos. Throws Error(invalid_position).
Term replace_at(const Term& t, const Position& pos, const Term& s);

/// Finite map from variable names to terms. Identity bindings are never stored.
class Substitution {
 public:
  using Map = std::map<std::string, Term>;

  Substitution() = default;

  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }
  const Map& bindings() const noexcept { return bindings_; }

  /// Binding for `name`, or nullptr.
  const Term* find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  /// Adds x -> t; binding x -> x is dropped. Replaces any previous binding.
  void bind(const std::string& name, const Term& t);

  /// True when every bound term is ground.
  bool ground() const;
  /// sigma|vars: keeps only bindings of the listed variables.
  Substitution restrict_to(const std::set<std::string>& vars) const;

  friend bool operator==(const Substitution& a, const Substitution& b) { return a.bindings_ == b.bindings_; }
  friend std::strong_ordering operator<=>(const Substitution& a, const Substitution& b);

 private:
  Map bindings_;
};

std::size_t hash_value(const Substitution& s) noexcept;

Term apply_subst(const Substitution& sigma, const Term& t);

/// Syntactic matching: the unique sigma with apply(sigma, pattern) == subject,
/// restricted to vars(pattern) plus the bindings already in `base`.
/// Variables in the subject are treated as constants.
std::optional<Substitution> match_term(const Term& pattern, const Term& subject,
                                       const Substitution& base = {});

/// Syntactic most general unifier with occurs check. Both terms share one
/// variable namespace; rename apart beforehand if needed.
std::optional<Substitution> unify_terms(const Term& a, const Term& b);

/// Renames every variable x of t to prefix + x.
Term rename_vars(const Term& t, std::string_view prefix);

/// Input syntax: "f(a,g(X))"; nullary symbols bare.
std::string to_string(const Term& t);
/// "{X/senior, Y/t}".
std::string to_string(const Substitution& s);

}  // namespace ptrs
