#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace detwalk {

enum class Errc {
  RowSumNotOne,
  DuplicateEntry,
  IndexOutOfRange,
  NotErgodic,
  NoConvergence,
  LengthMismatch,
  CapExceeded,
  NegativeTokens,
  InternalInvariantViolation,
  Overflow,
  OutOfRange,
  MassMismatch,
  HypothesisViolated,
  BadParams,
  GenerationFailed,
  ParseError,
  SchemaViolation,
  IoError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::RowSumNotOne: return "RowSumNotOne";
    case Errc::DuplicateEntry: return "DuplicateEntry";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NotErgodic: return "NotErgodic";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::NegativeTokens: return "NegativeTokens";
    case Errc::InternalInvariantViolation: return "InternalInvariantViolation";
    case Errc::Overflow: return "Overflow";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::MassMismatch: return "MassMismatch";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::BadParams: return "BadParams";
    case Errc::GenerationFailed: return "GenerationFailed";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message holds the detail (vertex index, offending hypothesis, ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code), detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace detwalk
