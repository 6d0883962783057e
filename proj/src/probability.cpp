#include "ptrs/probability.hpp"

#include <cctype>

#include "ptrs/error.hpp"

namespace ptrs {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto bad = [&] {
    return Error(ErrorKind::syntax, "malformed number '" + std::string(text) + "'");
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view num = text.substr(0, slash);
    std::string_view den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) throw bad();
    mpz_class d(std::string(den), 10);
    if (d == 0) throw Error(ErrorKind::syntax, "zero denominator in '" + std::string(text) + "'");
    Rational r(mpz_class(std::string(num), 10), d);
    r.canonicalize();
    return r;
  }
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
    if (!all_digits(frac_part)) throw bad();
  }
  if (!all_digits(int_part)) throw bad();
  mpz_class num(std::string(int_part) + std::string(frac_part), 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_part.size());
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Probability::Probability(const Rational& value) : value_(value) {
  if (sgn(value_) < 0 || value_ > 1) {
    throw Error(ErrorKind::probability_out_of_range,
                "probability " + value_.get_str() + " is outside [0, 1]");
  }
}

Probability Probability::one() { return Probability(Rational(1)); }

Probability Probability::operator*(const Probability& other) const {
  Probability p;
  p.value_ = value_ * other.value_;
  return p;
}

Probability& Probability::operator*=(const Probability& other) {
  value_ *= other.value_;
  return *this;
}

Probability Probability::complement() const {
  Probability p;
  p.value_ = 1 - value_;
  return p;
}

}  // namespace ptrs
