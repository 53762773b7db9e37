#include "duq/error.hpp"

namespace duq {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedProblem: return "MalformedProblem";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NegativeWind: return "NegativeWind";
    case ErrorKind::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorKind::SingularSusceptanceMatrix: return "SingularSusceptanceMatrix";
    case ErrorKind::PressureOrderViolation: return "PressureOrderViolation";
    case ErrorKind::ZeroFlowSingularity: return "ZeroFlowSingularity";
    case ErrorKind::SlpNonconvergence: return "SlpNonconvergence";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::SingularMomentMatrix: return "SingularMomentMatrix";
    case ErrorKind::CandidateExplosion: return "CandidateExplosion";
    case ErrorKind::NonPositiveNorm: return "NonPositiveNorm";
    case ErrorKind::RankDeficientActiveSet: return "RankDeficientActiveSet";
    case ErrorKind::LeverageOne: return "LeverageOne";
    case ErrorKind::NoImprovement: return "NoImprovement";
    case ErrorKind::AllDegreesFailed: return "AllDegreesFailed";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ZeroBaseline: return "ZeroBaseline";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace duq
