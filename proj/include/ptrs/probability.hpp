#pragma once

#include <compare>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace ptrs {

/// Arbitrary-precision rational; always kept in canonical (reduced) form.
using Rational = mpq_class;

/// Parses "0.3", "17", "1/3" into an exact rational. Throws Error(syntax).
Rational parse_rational(std::string_view text);

/// A rational in [0, 1].
class Probability {
 public:
  Probability() = default;
  /// Throws Error(probability_out_of_range) outside [0, 1].
  explicit Probability(const Rational& value);

  static Probability zero() { return Probability(); }
  static Probability one();

  const Rational& value() const noexcept { return value_; }
  bool is_zero() const { return sgn(value_) == 0; }
  bool is_one() const { return value_ == 1; }

  Probability operator*(const Probability& other) const;
  Probability& operator*=(const Probability& other);
  Probability complement() const;

  friend bool operator==(const Probability& a, const Probability& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Probability& a, const Probability& b) {
    int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  Rational value_{0};
};

}  // namespace ptrs
