#include "softft/common.hpp"

namespace softft {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::AngleAtPi: return "AngleAtPi";
    case ErrorCode::SingularField: return "SingularField";
    case ErrorCode::DegenerateSweep: return "DegenerateSweep";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::GapDetected: return "GapDetected";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& what, std::optional<std::size_t> record) {
  std::string msg(to_string(code));
  if (record) msg += " [record " + std::to_string(*record) + "]";
  msg += ": ";
  msg += what;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> record)
    : std::runtime_error(compose(code, what, record)), code_(code), record_(record), detail_(what) {}

Error Error::with_record(std::size_t index) const { return Error(code_, detail_, index); }

}  // namespace softft
