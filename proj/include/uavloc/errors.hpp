#pragma once

#include <stdexcept>
#include <string>

namespace uavloc {

// Base class for all toolkit errors. Every failure mode raised by the
// library is a typed subclass so callers can react per class.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define UAVLOC_ERROR(Name)                                     \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& msg) : Error(msg) {}      \
  }

// signal-core
UAVLOC_ERROR(RecordingTooShort);
UAVLOC_ERROR(InvalidConfig);
UAVLOC_ERROR(InconsistentBlocks);
UAVLOC_ERROR(EmptyInput);

// geometry
UAVLOC_ERROR(InvalidMicIndex);
UAVLOC_ERROR(InvalidStep);
UAVLOC_ERROR(InvalidGeometry);

// enhance
UAVLOC_ERROR(TooFewFrames);
UAVLOC_ERROR(ZeroSignal);
UAVLOC_ERROR(EmptyTemplateBank);
UAVLOC_ERROR(SpeedOutOfRange);
UAVLOC_ERROR(InvalidAlpha);
UAVLOC_ERROR(SingularNoiseCovariance);
UAVLOC_ERROR(ShapeMismatch);
UAVLOC_ERROR(InvalidCutoff);

// angular-spectrum
UAVLOC_ERROR(InsufficientEnergy);
UAVLOC_ERROR(AllMasked);
UAVLOC_ERROR(InvalidSourceCount);

// tracking
UAVLOC_ERROR(EmptyTrajectory);

// scene-sim
UAVLOC_ERROR(DelayTooLarge);
UAVLOC_ERROR(ZeroNoise);

// io / eval
UAVLOC_ERROR(FileNotFound);
UAVLOC_ERROR(UnsupportedFormat);
UAVLOC_ERROR(CorruptHeader);
UAVLOC_ERROR(MalformedRow);
UAVLOC_ERROR(DuplicateId);
UAVLOC_ERROR(ParseError);
UAVLOC_ERROR(ValidationError);
UAVLOC_ERROR(IoFailure);
UAVLOC_ERROR(TaskKindMismatch);

#undef UAVLOC_ERROR

}  // namespace uavloc
