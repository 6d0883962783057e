#include "ptrs/syntax.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace ptrs {

namespace {

enum class Tok {
  ident,   // lowercase-initial
  var,     // uppercase- or underscore-initial
  number,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  dot,
  colon,
  semicolon,
  arrow,   // ->
  arrows,  // ->>
  implied, // <=
  end,
};

struct Token {
  Tok kind;
  std::string text;
  SourceLocation loc;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end:
      return "end of input";
    case Tok::ident:
    case Tok::var:
    case Tok::number:
      return "'" + t.text + "'";
    default:
      return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      SourceLocation loc{line_, col_};
      if (pos_ >= text_.size()) {
        out.push_back({Tok::end, "", loc});
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          advance();
        }
        std::string word(text_.substr(start, pos_ - start));
        bool is_var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
        out.push_back({is_var ? Tok::var : Tok::ident, std::move(word), loc});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back({Tok::number, number(), loc});
        continue;
      }
      auto single = [&](Tok k) {
        out.push_back({k, std::string(1, c), loc});
        advance();
      };
      switch (c) {
        case '(':
          single(Tok::lparen);
          break;
        case ')':
          single(Tok::rparen);
          break;
        case '{':
          single(Tok::lbrace);
          break;
        case '}':
          single(Tok::rbrace);
          break;
        case ',':
          single(Tok::comma);
          break;
        case '.':
          single(Tok::dot);
          break;
        case ':':
          single(Tok::colon);
          break;
        case ';':
          single(Tok::semicolon);
          break;
        case '-':
          if (peek(1) == '>') {
            if (peek(2) == '>') {
              out.push_back({Tok::arrows, "->>", loc});
              advance(3);
            } else {
              out.push_back({Tok::arrow, "->", loc});
              advance(2);
            }
            break;
          }
          throw Error(ErrorKind::syntax, "unexpected character '-'", loc);
        case '<':
          if (peek(1) == '=') {
            out.push_back({Tok::implied, "<=", loc});
            advance(2);
            break;
          }
          throw Error(ErrorKind::syntax, "unexpected character '<'", loc);
        default:
          throw Error(ErrorKind::syntax, std::string("unexpected character '") + c + "'", loc);
      }
    }
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && pos_ < text_.size(); ++k) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  // digits ["." digits] | digits "/" digits; a dot not followed by a digit
  // ends the statement instead.
  std::string number() {
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    };
    std::size_t start = pos_;
    digits();
    if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance();
      digits();
    } else if (peek(0) == '/' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance();
      digits();
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  SourceModel model() {
    SourceModel out;
    while (cur().kind != Tok::end) out.statements.push_back(statement());
    return out;
  }

  Term single_term() {
    Term t = term();
    expect(Tok::end, "end of input");
    return t;
  }

 private:
  const Token& cur() const { return toks_[i_]; }

  const Token& take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  [[noreturn]] void fail(const std::string& wanted) const {
    throw Error(ErrorKind::syntax, "expected " + wanted + ", found " + describe(cur()), cur().loc);
  }

  const Token& expect(Tok k, const std::string& wanted) {
    if (cur().kind != k) fail(wanted);
    return take();
  }

  bool accept(Tok k) {
    if (cur().kind != k) return false;
    take();
    return true;
  }

  bool keyword(std::string_view word) const { return cur().kind == Tok::ident && cur().text == word; }

  Statement statement() {
    SourceLocation loc = cur().loc;
    Statement::Kind kind;
    if (keyword("rule")) {
      kind = Statement::Kind::rule;
    } else if (keyword("prob")) {
      kind = Statement::Kind::prob;
    } else {
      fail("'rule' or 'prob'");
    }
    take();
    if (cur().kind != Tok::ident && cur().kind != Tok::var) fail("a rule label");
    std::string label = take().text;
    expect(Tok::colon, "':'");
    Term lhs = term();
    expect(Tok::arrow, "'->'");
    std::vector<Alternative> alts;
    if (kind == Statement::Kind::rule) {
      alts.push_back({Probability::one(), term()});
    } else {
      do {
        const Token& num = cur();
        if (num.kind != Tok::number) fail("a probability");
        SourceLocation nloc = num.loc;
        Rational value = parse_rational(take().text);
        if (value > 1) throw Error(ErrorKind::probability_out_of_range, "probability " + value.get_str() + " exceeds 1", nloc);
        expect(Tok::colon, "':'");
        alts.push_back({Probability(value), term()});
      } while (accept(Tok::semicolon));
    }
    std::vector<Condition> conds;
    if (accept(Tok::implied)) {
      do {
        Term s = term();
        expect(Tok::arrows, "'->>'");
        conds.push_back({s, term()});
      } while (accept(Tok::comma));
    }
    std::vector<DomainClause> doms;
    if (keyword("where")) {
      take();
      do {
        std::string var = expect(Tok::var, "a variable").text;
        if (!keyword("in")) fail("'in'");
        take();
        expect(Tok::lbrace, "'{'");
        std::vector<Term> values;
        do {
          values.push_back(term());
        } while (accept(Tok::comma));
        expect(Tok::rbrace, "'}'");
        doms.push_back({var, std::move(values)});
      } while (accept(Tok::comma));
    }
    expect(Tok::dot, "'.'");
    return Statement{kind, std::move(label), std::move(lhs), std::move(alts), std::move(conds), std::move(doms), loc};
  }

  Term term() {
    if (cur().kind == Tok::var) return Term::var(take().text);
    if (cur().kind != Tok::ident) fail("a term");
    const Token& head = take();
    std::string name = head.text;
    SourceLocation loc = head.loc;
    std::vector<Term> args;
    if (accept(Tok::lparen)) {
      if (cur().kind == Tok::rparen) fail("an argument");
      do {
        args.push_back(term());
      } while (accept(Tok::comma));
      expect(Tok::rparen, "')' or ','");
    }
    auto [it, inserted] = arity_.emplace(name, args.size());
    if (!inserted && it->second != args.size()) {
      throw Error(ErrorKind::arity_mismatch,
                  "symbol '" + name + "' used with arity " + std::to_string(args.size()) + " and arity " +
                      std::to_string(it->second),
                  loc);
    }
    Symbol f(name, args.size());
    return Term::app(f, std::move(args));
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::map<std::string, std::size_t> arity_;
};

bool terminating_decimal(const mpz_class& den, std::size_t& digits) {
  mpz_class d = den;
  std::size_t twos = 0, fives = 0;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) {
    d /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) {
    d /= 5;
    ++fives;
  }
  digits = std::max(twos, fives);
  return d == 1;
}

/// |value| * 10^digits is an integer; prints it with a decimal point.
std::string fixed_point(const mpz_class& scaled, std::size_t digits, bool negative) {
  std::string s = scaled.get_str();
  if (digits > 0) {
    if (s.size() <= digits) s.insert(0, digits - s.size() + 1, '0');
    s.insert(s.size() - digits, ".");
  }
  return (negative ? "-" : "") + s;
}

std::string exact_decimal(const Rational& value, std::size_t digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  mpz_class num = abs(value.get_num()) * scale / value.get_den();
  return fixed_point(num, digits, sgn(value) < 0);
}

std::string rounded_decimal(const Rational& value, int precision) {
  std::size_t digits = static_cast<std::size_t>(std::max(precision, 0));
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  // floor(|v| * 10^d + 1/2): half up.
  mpz_class num = abs(value.get_num()) * scale * 2 + value.get_den();
  mpz_class den = value.get_den() * 2;
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return fixed_point(q, digits, sgn(value) < 0 && q != 0);
}

void print_term_list(std::ostream& os, const std::vector<Term>& ts) {
  for (std::size_t i = 0; i < ts.size(); ++i) os << (i ? ", " : "") << to_string(ts[i]);
}

}  // namespace

bool operator==(const Statement& a, const Statement& b) {
  if (a.kind != b.kind || a.label != b.label || !(a.lhs == b.lhs) || !(a.conditions == b.conditions)) return false;
  if (a.alternatives.size() != b.alternatives.size() || a.domains.size() != b.domains.size()) return false;
  for (std::size_t i = 0; i < a.alternatives.size(); ++i) {
    if (!(a.alternatives[i].prob == b.alternatives[i].prob) || !(a.alternatives[i].rhs == b.alternatives[i].rhs)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.domains.size(); ++i) {
    if (a.domains[i].var != b.domains[i].var || a.domains[i].values != b.domains[i].values) return false;
  }
  return true;
}

SourceModel parse_source(std::string_view text) { return Parser(text).model(); }

std::string print_source(const SourceModel& src) {
  std::ostringstream os;
  for (const Statement& st : src.statements) {
    bool prob = st.kind == Statement::Kind::prob;
    os << (prob ? "prob " : "rule ") << st.label << ": " << to_string(st.lhs) << " -> ";
    for (std::size_t i = 0; i < st.alternatives.size(); ++i) {
      if (i) os << "; ";
      if (prob) os << render_literal(st.alternatives[i].prob.value()) << ": ";
      os << to_string(st.alternatives[i].rhs);
    }
    for (std::size_t i = 0; i < st.conditions.size(); ++i) {
      os << (i ? ", " : " <= ") << to_string(st.conditions[i].source) << " ->> " << to_string(st.conditions[i].target);
    }
    for (std::size_t i = 0; i < st.domains.size(); ++i) {
      os << (i ? ", " : " where ") << st.domains[i].var << " in {";
      print_term_list(os, st.domains[i].values);
      os << "}";
    }
    os << ".\n";
  }
  return os.str();
}

Model to_model(const SourceModel& src) {
  std::vector<ProbRule> prob;
  std::vector<RegRule> reg;
  for (const Statement& st : src.statements) {
    if (st.kind == Statement::Kind::prob) {
      prob.push_back({st.label, st.lhs, st.alternatives, st.conditions, st.domains, st.location, false, {}, {}, {}});
    } else {
      if (!st.domains.empty()) {
        throw Error(ErrorKind::invalid_rule, "rule " + st.label + ": only probabilistic rules take a where clause",
                    st.location);
      }
      reg.push_back({st.label, st.lhs, st.alternatives.front().rhs, st.conditions, st.location, false});
    }
  }
  return normalize_model(Model(std::move(prob), std::move(reg)));
}

Model parse_model(std::string_view text) { return to_model(parse_source(text)); }

Term parse_term(std::string_view text, const Model* m) {
  Term t = Parser(text).single_term();
  if (m) {
    for (const Position& p : positions(t)) {
      const Term& u = subterm_at(t, p);
      if (u.is_var()) continue;
      auto arity = m->arity_of(u.name());
      if (arity && *arity != u.arity()) {
        throw Error(ErrorKind::arity_mismatch,
                    "symbol '" + u.name() + "' has arity " + std::to_string(*arity) + " in the model, used with " +
                        std::to_string(u.arity()),
                    SourceLocation{1, 1});
      }
    }
  }
  return t;
}

std::string render(const Rational& value, int precision) {
  std::size_t digits = 0;
  if (terminating_decimal(value.get_den(), digits)) return exact_decimal(value, digits);
  return value.get_str() + " (≈" + rounded_decimal(value, precision) + ")";
}

std::string render(const Probability& p, int precision) { return render(p.value(), precision); }

std::string render(const Term& t) { return to_string(t); }

std::string render(const AtomicChoice& atom) {
  std::string out = "(" + atom.rule + ",";
  if (!atom.theta.empty()) out += to_string(atom.theta) + ",";
  return out + std::to_string(atom.index) + ")";
}

std::string render(const CompositeChoice& kappa) {
  std::string out = "{";
  bool first = true;
  for (const AtomicChoice& a : kappa.atoms()) {
    if (!first) out += ", ";
    first = false;
    out += render(a);
  }
  return out + "}";
}

namespace {

class ChoiceReader {
 public:
  explicit ChoiceReader(std::string_view text) : text_(text) {}

  CompositeChoice read() {
    expect('{');
    CompositeChoice out;
    skip();
    if (peek() == '}') {
      ++pos_;
    } else {
      while (true) {
        AtomicChoice a = atom();
        if (!out.insert(a)) throw Error(ErrorKind::inconsistent_composite_choice, "conflicting choices for " + a.rule);
        skip();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect('}');
        break;
      }
    }
    skip();
    if (pos_ != text_.size()) fail("trailing text");
    return out;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::syntax, what + " in choice at offset " + std::to_string(pos_));
  }
  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  /// Text up to the next top-level occurrence of one of `stops`.
  std::string_view until(std::string_view stops) {
    std::size_t start = pos_;
    int depth = 0;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (depth == 0 && stops.find(c) != std::string_view::npos) break;
      if (c == '(' || c == '{') ++depth;
      if (c == ')' || c == '}') --depth;
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  AtomicChoice atom() {
    expect('(');
    skip();
    std::string label(until(","));
    while (!label.empty() && std::isspace(static_cast<unsigned char>(label.back()))) label.pop_back();
    if (label.empty()) fail("missing label");
    expect(',');
    skip();
    Substitution theta;
    if (peek() == '{') {
      ++pos_;
      skip();
      while (peek() != '}') {
        std::string_view var = until("/");
        expect('/');
        std::string_view value = until(",}");
        std::string name(var);
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
        theta.bind(name, parse_term(value));
        if (peek() == ',') ++pos_;
        skip();
      }
      ++pos_;
      expect(',');
      skip();
    }
    std::string_view digits = until(")");
    std::size_t index = 0;
    for (char c : digits) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (!std::isdigit(static_cast<unsigned char>(c))) fail("bad alternative index");
      index = index * 10 + static_cast<std::size_t>(c - '0');
    }
    if (index == 0) fail("bad alternative index");
    expect(')');
    return {label, theta, index};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CompositeChoice parse_choice(std::string_view text) { return ChoiceReader(text).read(); }

std::string render_literal(const Rational& value) {
  std::size_t digits = 0;
  if (terminating_decimal(value.get_den(), digits)) return exact_decimal(value, digits);
  return value.get_str();
}

}  // namespace ptrs
