#include "ptrs/term.hpp"

#include <mutex>
#include <unordered_set>

#include "ptrs/error.hpp"

namespace ptrs {

namespace {

std::size_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

std::size_t mix(std::size_t seed, std::size_t v) noexcept {
  std::uint64_t x = seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return static_cast<std::size_t>(x);
}

}  // namespace

const std::string* intern(std::string_view name) {
  static std::mutex mutex;
  static std::unordered_set<std::string> pool;
  std::lock_guard lock(mutex);
  auto [it, inserted] = pool.emplace(name);
  return &*it;
}

Symbol::Symbol(std::string_view name, std::size_t arity) : name_(intern(name)), arity_(arity) {}

std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) noexcept {
  if (a.name_ != b.name_) {
    int c = a.name_->compare(*b.name_);
    if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return a.arity_ <=> b.arity_;
}

std::size_t SymbolHash::operator()(const Symbol& s) const noexcept {
  return mix(fnv1a(s.name()), s.arity());
}

namespace detail {

struct TermNode {
  bool is_var = false;
  const std::string* name = nullptr;
  std::vector<Term> args;
  std::size_t hash = 0;
  std::size_t size = 1;
  bool ground = true;
};

}  // namespace detail

Term Term::var(std::string_view name) {
  auto node = std::make_shared<detail::TermNode>();
  node->is_var = true;
  node->name = intern(name);
  node->hash = mix(0x5bd1e995u, fnv1a(name));
  node->ground = false;
  return Term(std::move(node));
}

Term Term::app(const Symbol& f, std::vector<Term> args) {
  if (args.size() != f.arity()) {
    throw Error(ErrorKind::arity_mismatch,
                "symbol '" + f.name() + "' has arity " + std::to_string(f.arity()) + " but got " +
                    std::to_string(args.size()) + " arguments");
  }
  auto node = std::make_shared<detail::TermNode>();
  node->name = &f.name();
  std::size_t h = mix(fnv1a(f.name()), args.size());
  for (const Term& a : args) {
    h = mix(h, a.hash());
    node->size += a.size();
    node->ground = node->ground && a.ground();
  }
  node->hash = h;
  node->args = std::move(args);
  return Term(std::move(node));
}

Term Term::constant(std::string_view name) { return app(Symbol(name, 0)); }

bool Term::is_var() const noexcept { return node_->is_var; }
const std::string& Term::name() const noexcept { return *node_->name; }
Symbol Term::symbol() const { return Symbol(node_->name, node_->args.size()); }
std::span<const Term> Term::args() const noexcept { return node_->args; }
bool Term::ground() const noexcept { return node_->ground; }
std::size_t Term::hash() const noexcept { return node_->hash; }
std::size_t Term::size() const noexcept { return node_->size; }

void Term::collect_vars(std::set<std::string>& out) const {
  if (ground()) return;
  if (is_var()) {
    out.insert(name());
    return;
  }
  for (const Term& a : args()) a.collect_vars(out);
}

std::set<std::string> Term::vars() const {
  std::set<std::string> out;
  collect_vars(out);
  return out;
}

bool operator==(const Term& a, const Term& b) noexcept {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.hash != y.hash || x.is_var != y.is_var || x.name != y.name || x.args.size() != y.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!(x.args[i] == y.args[i])) return false;
  }
  return true;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.is_var != y.is_var) return x.is_var ? std::strong_ordering::less : std::strong_ordering::greater;
  if (x.name != y.name) {
    int c = x.name->compare(*y.name);
    if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (auto c = x.args.size() <=> y.args.size(); c != 0) return c;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (auto c = x.args[i] <=> y.args[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

// Positions.

Position::Position(std::vector<std::size_t> steps) : steps_(std::move(steps)) {}

Position Position::child(std::size_t index) const {
  Position p = *this;
  p.steps_.push_back(index);
  return p;
}

bool Position::strictly_above(const Position& other) const {
  if (steps_.size() >= other.steps_.size()) return false;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i] != other.steps_[i]) return false;
  }
  return true;
}

std::string Position::to_string() const {
  if (steps_.empty()) return "ε";
  std::string out;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(steps_[i]);
  }
  return out;
}

namespace {

void collect_positions(const Term& t, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  if (t.is_var()) return;
  auto args = t.args();
  for (std::size_t i = 0; i < args.size(); ++i) {
    Position next = cur.child(i + 1);
    collect_positions(args[i], next, out);
  }
}

Term replace_rec(const Term& t, const std::vector<std::size_t>& steps, std::size_t depth, const Term& s) {
  if (depth == steps.size()) return s;
  std::size_t idx = steps[depth];
  std::vector<Term> args(t.args().begin(), t.args().end());
  args[idx - 1] = replace_rec(args[idx - 1], steps, depth + 1, s);
  return Term::app(t.symbol(), std::move(args));
}

}  // namespace

std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  Position root;
  collect_positions(t, root, out);
  return out;
}

bool valid_position(const Term& t, const Position& pos) {
  const Term* cur = &t;
  for (std::size_t step : pos.steps()) {
    if (cur->is_var() || step == 0 || step > cur->arity()) return false;
    cur = &cur->args()[step - 1];
  }
  return true;
}

const Term& subterm_at(const Term& t, const Position& pos) {
  const Term* cur = &t;
  for (std::size_t step : pos.steps()) {
    if (cur->is_var() || step == 0 || step > cur->arity()) {
      throw Error(ErrorKind::invalid_position, "position " + pos.to_string() + " is not a position of the term");
    }
    cur = &cur->args()[step - 1];
  }
  return *cur;
}

Term replace_at(const Term& t, const Position& pos, const Term& s) {
  if (!valid_position(t, pos)) {
    throw Error(ErrorKind::invalid_position, "position " + pos.to_string() + " is not a position of the term");
  }
  return replace_rec(t, pos.steps(), 0, s);
}

// Substitutions.

const Term* Substitution::find(const std::string& name) const {
  auto it = bindings_.find(name);
  return it == bindings_.end() ? nullptr : &it->second;
}

void Substitution::bind(const std::string& name, const Term& t) {
  if (t.is_var() && t.name() == name) {
    bindings_.erase(name);
    return;
  }
  bindings_.insert_or_assign(name, t);
}

bool Substitution::ground() const {
  for (const auto& [_, t] : bindings_) {
    if (!t.ground()) return false;
  }
  return true;
}

Substitution Substitution::restrict_to(const std::set<std::string>& vars) const {
  Substitution out;
  for (const auto& [x, t] : bindings_) {
    if (vars.count(x)) out.bindings_.emplace(x, t);
  }
  return out;
}

std::strong_ordering operator<=>(const Substitution& a, const Substitution& b) {
  auto ia = a.bindings_.begin();
  auto ib = b.bindings_.begin();
  for (; ia != a.bindings_.end() && ib != b.bindings_.end(); ++ia, ++ib) {
    if (int c = ia->first.compare(ib->first); c != 0) {
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (auto c = ia->second <=> ib->second; c != 0) return c;
  }
  return a.bindings_.size() <=> b.bindings_.size();
}

std::size_t hash_value(const Substitution& s) noexcept {
  std::size_t h = 0x2545f491u;
  for (const auto& [x, t] : s.bindings()) h = mix(mix(h, fnv1a(x)), t.hash());
  return h;
}

Term apply_subst(const Substitution& sigma, const Term& t) {
  if (sigma.empty() || t.ground()) return t;
  if (t.is_var()) {
    const Term* b = sigma.find(t.name());
    return b ? *b : t;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply_subst(sigma, a));
    changed = changed || !(args.back() == a);
  }
  if (!changed) return t;
  return Term::app(t.symbol(), std::move(args));
}

namespace {

bool match_rec(const Term& p, const Term& s, Substitution& sigma) {
  if (p.is_var()) {
    if (const Term* b = sigma.find(p.name())) return *b == s;
    sigma.bind(p.name(), s);
    return true;
  }
  if (s.is_var() || p.name() != s.name() || p.arity() != s.arity()) return false;
  if (p.ground()) return p == s;
  auto pa = p.args();
  auto sa = s.args();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!match_rec(pa[i], sa[i], sigma)) return false;
  }
  return true;
}

}  // namespace

std::optional<Substitution> match_term(const Term& pattern, const Term& subject, const Substitution& base) {
  Substitution sigma = base;
  if (!match_rec(pattern, subject, sigma)) return std::nullopt;
  return sigma;
}

namespace {

Term resolve(const Term& t, const Substitution& sigma) {
  Term cur = t;
  while (cur.is_var()) {
    const Term* b = sigma.find(cur.name());
    if (!b) break;
    cur = *b;
  }
  return cur;
}

bool occurs(const std::string& x, const Term& t, const Substitution& sigma) {
  Term r = resolve(t, sigma);
  if (r.is_var()) return r.name() == x;
  for (const Term& a : r.args()) {
    if (occurs(x, a, sigma)) return true;
  }
  return false;
}

bool unify_rec(const Term& a, const Term& b, Substitution& sigma) {
  Term x = resolve(a, sigma);
  Term y = resolve(b, sigma);
  if (x == y) return true;
  if (x.is_var()) {
    if (occurs(x.name(), y, sigma)) return false;
    sigma.bind(x.name(), y);
    return true;
  }
  if (y.is_var()) return unify_rec(y, x, sigma);
  if (x.name() != y.name() || x.arity() != y.arity()) return false;
  for (std::size_t i = 0; i < x.arity(); ++i) {
    if (!unify_rec(x.args()[i], y.args()[i], sigma)) return false;
  }
  return true;
}

}  // namespace

std::optional<Substitution> unify_terms(const Term& a, const Term& b) {
  Substitution triangular;
  if (!unify_rec(a, b, triangular)) return std::nullopt;
  // Fully resolve the triangular form into an idempotent substitution.
  Substitution out;
  for (const auto& [x, t] : triangular.bindings()) {
    Term r = t;
    for (Term prev = r;; prev = r) {
      r = apply_subst(triangular, r);
      if (r == prev) break;
    }
    out.bind(x, r);
  }
  return out;
}

Term rename_vars(const Term& t, std::string_view prefix) {
  if (t.ground()) return t;
  if (t.is_var()) return Term::var(std::string(prefix) + t.name());
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(rename_vars(a, prefix));
  return Term::app(t.symbol(), std::move(args));
}

namespace {

void print_rec(const Term& t, std::string& out) {
  out += t.name();
  if (t.is_var() || t.arity() == 0) return;
  out += '(';
  bool first = true;
  for (const Term& a : t.args()) {
    if (!first) out += ',';
    first = false;
    print_rec(a, out);
  }
  out += ')';
}

}  // namespace

std::string to_string(const Term& t) {
  std::string out;
  print_rec(t, out);
  return out;
}

std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, t] : s.bindings()) {
    if (!first) out += ", ";
    first = false;
    out += x;
    out += '/';
    print_rec(t, out);
  }
  out += '}';
  return out;
}

}  // namespace ptrs
