#include "wlanprobe/error.hpp"

namespace wlanprobe {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyTrain: return "EmptyTrain";
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ShortDatagram: return "ShortDatagram";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::NoTinyPairs: return "NoTinyPairs";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NoTriggers: return "NoTriggers";
    case ErrorCode::MalformedReport: return "MalformedReport";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace wlanprobe
