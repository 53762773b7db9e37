#ifndef DUQ_ERROR_HPP
#define DUQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace duq {

enum class ErrorKind {
  MalformedProblem,
  DimensionMismatch,
  NegativeWind,
  DisconnectedNetwork,
  SingularSusceptanceMatrix,
  PressureOrderViolation,
  ZeroFlowSingularity,
  SlpNonconvergence,
  DegenerateSample,
  EmptySample,
  SingularMomentMatrix,
  CandidateExplosion,
  NonPositiveNorm,
  RankDeficientActiveSet,
  LeverageOne,
  NoImprovement,
  AllDegreesFailed,
  InsufficientData,
  ZeroBaseline,
  ParseError,
  SchemaError,
  InvariantViolation,
  IoError
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace duq

#endif
