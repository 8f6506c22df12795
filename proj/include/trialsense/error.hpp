// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trialsense {

/// Failure class, used by the CLI to pick an exit code.
enum class ErrorKind {
  Usage,    // bad flags or configuration values
  Data,     // malformed or inconsistent input files
  Numeric,  // divergence, gradient check failures
};

/// CLI exit status: 1 usage, 2 data, 3 numeric.
constexpr int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Data: return 2;
    case ErrorKind::Numeric: return 3;
  }
  return 2;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define TRIALSENSE_DEFINE_ERROR(Name, Kind)                                       \
  class Name : public Error {                                                     \
   public:                                                                        \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name ": " + what) {} \
  };

TRIALSENSE_DEFINE_ERROR(ConfigError, Usage)
TRIALSENSE_DEFINE_ERROR(DomainError, Usage)

TRIALSENSE_DEFINE_ERROR(MalformedManifest, Data)
TRIALSENSE_DEFINE_ERROR(TooFewSamples, Data)
TRIALSENSE_DEFINE_ERROR(UnsupportedWav, Data)
TRIALSENSE_DEFINE_ERROR(CorruptWav, Data)
TRIALSENSE_DEFINE_ERROR(SignalTooShort, Data)
TRIALSENSE_DEFINE_ERROR(MalformedLandmarks, Data)
TRIALSENSE_DEFINE_ERROR(MalformedEmbedding, Data)
TRIALSENSE_DEFINE_ERROR(MalformedCheckpoint, Data)
TRIALSENSE_DEFINE_ERROR(MissingModality, Data)
TRIALSENSE_DEFINE_ERROR(DuplicateModality, Data)
TRIALSENSE_DEFINE_ERROR(ShapeMismatch, Data)
TRIALSENSE_DEFINE_ERROR(KernelTooLarge, Data)
TRIALSENSE_DEFINE_ERROR(EmptyTrainingSet, Data)

#undef TRIALSENSE_DEFINE_ERROR

/// Landmark frame whose eye centers coincide. Carries the offending frame index.
class DegenerateFace : public Error {
 public:
  explicit DegenerateFace(std::size_t frame)
      : Error(ErrorKind::Data,
              "DegenerateFace: inter-ocular distance vanishes at frame " + std::to_string(frame)),
        frame_(frame) {}
  std::size_t frame() const noexcept { return frame_; }

 private:
  std::size_t frame_;
};

/// Training produced a NaN/Inf loss.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t epoch, std::size_t batch)
      : Error(ErrorKind::Numeric, "NonFiniteLoss: epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

}  // namespace trialsense
