#include "lbto/types.hpp"

namespace lbto {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PositionOutOfDomain: return "PositionOutOfDomain";
    case ErrorCode::CycleUnavailable: return "CycleUnavailable";
    case ErrorCode::InvalidLayout: return "InvalidLayout";
    case ErrorCode::EmptyBlock: return "EmptyBlock";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::UnfillableHole: return "UnfillableHole";
    case ErrorCode::NonpositiveCell: return "NonpositiveCell";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::NoCommonSamples: return "NoCommonSamples";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

const char* to_string(Pathline::Status status) {
  switch (status) {
    case Pathline::Status::Complete: return "complete";
    case Pathline::Status::TruncatedOutOfHull: return "truncated_out_of_hull";
    case Pathline::Status::TruncatedOutOfDomain: return "truncated_out_of_domain";
  }
  return "unknown";
}

}  // namespace lbto
