#pragma once

#include <stdexcept>
#include <string>

namespace wlanprobe {

enum class ErrorCode {
  EmptyTrain,
  MalformedTrace,
  SchemaVersionMismatch,
  InvalidConfig,
  ShortDatagram,
  BindFailure,
  InvalidScenario,
  NoTinyPairs,
  InsufficientData,
  DegenerateSample,
  NoTriggers,
  MalformedReport,
  Io,
};

const char* to_string(ErrorCode code);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wlanprobe
