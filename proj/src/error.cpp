#include "ptrs/error.hpp"

namespace ptrs {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax: return "syntax-error";
    case ErrorKind::arity_mismatch: return "arity-mismatch";
    case ErrorKind::probability_out_of_range: return "probability-out-of-range";
    case ErrorKind::probability_sum_exceeds_one: return "probability-sum-exceeds-one";
    case ErrorKind::duplicate_label: return "duplicate-label";
    case ErrorKind::defined_symbol_classified_twice: return "defined-symbol-classified-twice";
    case ErrorKind::reserved_symbol: return "reserved-symbol";
    case ErrorKind::invalid_rule: return "invalid-rule";
    case ErrorKind::incomplete_domain: return "incomplete-domain";
    case ErrorKind::domain_term_not_ground: return "domain-term-not-ground";
    case ErrorKind::unsupported_ungrounded_rule: return "unsupported-ungrounded-rule";
    case ErrorKind::world_count_exceeds_limit: return "world-count-exceeds-limit";
    case ErrorKind::inconsistent_composite_choice: return "inconsistent-composite-choice";
    case ErrorKind::unknown_label: return "unknown-label";
    case ErrorKind::invalid_position: return "invalid-position";
    case ErrorKind::non_ground_probabilistic_redex: return "non-ground-probabilistic-redex";
  }
  return "error";
}

namespace {

std::string format_what(ErrorKind kind, const std::string& message,
                        const std::optional<SourceLocation>& location) {
  std::string out;
  if (location) {
    out += std::to_string(location->line) + ":" + std::to_string(location->column) + ": ";
  }
  out += kind_name(kind);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<SourceLocation> location)
    : std::runtime_error(format_what(kind, message, location)),
      kind_(kind),
      location_(location),
      message_(message) {}

}  // namespace ptrs
