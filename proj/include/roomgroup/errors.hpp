#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roomgroup {

enum class ErrorKind {
  MalformedDocument,
  SchemaViolation,
  IoFailure,
  DimensionMismatch,
  BackendFailure,
  MissingScore,
  MalformedRow,
  OutOfRangeScore,
  MagicMismatch,
  NoConvergence,
  EmptyInventory,
  InventoryExhausted,
  PredictorViolation,
  RemoteFailure,
  LengthMismatch,
  TooFewItems,
  MissingTruth,
  InsufficientRooms,
  ConfigError,
};

std::string_view error_kind_name(ErrorKind kind);

/// Single exception type for the engine; `kind()` carries the failure class
/// so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace roomgroup
