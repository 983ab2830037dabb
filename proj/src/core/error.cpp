#include "workbench/error.hpp"

namespace workbench {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::IdentifierMismatch: return "IdentifierMismatch";
    case ErrorCode::CardinalityError: return "CardinalityError";
    case ErrorCode::SectionMismatch: return "SectionMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::MissingAttachment: return "MissingAttachment";
    case ErrorCode::TemplateCorruption: return "TemplateCorruption";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::PlanIncomplete: return "PlanIncomplete";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::UnknownHypothesis: return "UnknownHypothesis";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::NonBinaryCell: return "NonBinaryCell";
    case ErrorCode::DuplicateRow: return "DuplicateRow";
    case ErrorCode::CountExceedsRows: return "CountExceedsRows";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::RowMismatch: return "RowMismatch";
    case ErrorCode::NoMatrix: return "NoMatrix";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::PortBusy: return "PortBusy";
    case ErrorCode::StoreLocked: return "StoreLocked";
    case ErrorCode::RunReferenced: return "RunReferenced";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace workbench
