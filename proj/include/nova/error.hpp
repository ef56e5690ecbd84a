#pragma once

#include <stdexcept>
#include <string>

namespace nova {

enum class Errc {
  InvalidArgument,
  QualityOutOfRange,
  InfeasibleFloor,
  NoConvergence,
  EmptyFeasibleSet,
  EmptyChoiceSet,
  EmptySeries,
  ZeroAllocation,
  TraceExhausted,
  InfeasibleModel,
  TooLarge,
  Config,
  Io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace nova
