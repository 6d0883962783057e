#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ptrs {

/// 1-based line/column of a statement or token in model source text.
struct SourceLocation {
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class ErrorKind {
  syntax,
  arity_mismatch,
  probability_out_of_range,
  probability_sum_exceeds_one,
  duplicate_label,
  defined_symbol_classified_twice,
  reserved_symbol,
  invalid_rule,
  incomplete_domain,
  domain_term_not_ground,
  unsupported_ungrounded_rule,
  world_count_exceeds_limit,
  inconsistent_composite_choice,
  unknown_label,
  invalid_position,
  non_ground_probabilistic_redex,
};

/// Kebab-case name used in diagnostics, e.g. "probability-sum-exceeds-one".
std::string_view kind_name(ErrorKind kind);

/// The single exception type thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<SourceLocation> location = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<SourceLocation>& location() const noexcept { return location_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::optional<SourceLocation> location_;
  std::string message_;
};

}  // namespace ptrs
