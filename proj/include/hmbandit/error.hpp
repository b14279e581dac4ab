#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmb {

enum class ErrorCode {
  NonSquare,
  EntryOutOfRange,
  TiedPreference,
  MalformedRanking,
  OracleTooLarge,
  NonUniqueCore,
  EmptyCore,
  MeanOutOfRange,
  RoundOutOfRange,
  Desync,
  InfeasibleGapFloor,
  InfeasibleDelta,
  InvalidParameter,
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Validation errors come from bad user input; everything else is a runtime fault.
  bool is_validation() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace hmb
