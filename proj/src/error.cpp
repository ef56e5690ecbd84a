#include "nova/error.hpp"

namespace nova {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::QualityOutOfRange: return "QualityOutOfRange";
    case Errc::InfeasibleFloor: return "InfeasibleFloor";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case Errc::EmptyChoiceSet: return "EmptyChoiceSet";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::ZeroAllocation: return "ZeroAllocation";
    case Errc::TraceExhausted: return "TraceExhausted";
    case Errc::InfeasibleModel: return "InfeasibleModel";
    case Errc::TooLarge: return "TooLarge";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace nova
