#ifndef H2R_ERROR_HPP
#define H2R_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace h2r {

enum class ErrorKind {
  InvalidInput,
  OutOfRange,
  NotCovered,
  InsufficientData,
  InsufficientHistory,
  Degenerate,
  DegenerateProfile,
  BehindCamera,
  NoConvergence,
  DimensionMismatch,
  NumericalFailure,
  UnmappedTimestep,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotCovered: return "NotCovered";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::UnmappedTimestep: return "UnmappedTimestep";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define H2R_REQUIRE(cond, kind, msg)        \
  do {                                      \
    if (!(cond)) throw ::h2r::Error((kind), (msg)); \
  } while (0)

}  // namespace h2r

#endif  // H2R_ERROR_HPP
