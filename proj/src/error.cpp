#include "error.hpp"

namespace shmvdr {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::NotFactorizable: return "NotFactorizable";
    case ErrorCode::DegenerateConstraint: return "DegenerateConstraint";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::OutsideSweetArea: return "OutsideSweetArea";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::NoFrames: return "NoFrames";
    case ErrorCode::ZeroBeamOutput: return "ZeroBeamOutput";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace shmvdr
