#include "roomgroup/errors.hpp"

#include <cmath>
#include <numbers>

#include "json.hpp"

#include "roomgroup/diagnostics.hpp"
#include "roomgroup/rng.hpp"

namespace roomgroup {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedDocument: return "MalformedDocument";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BackendFailure: return "BackendFailure";
    case ErrorKind::MissingScore: return "MissingScore";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::OutOfRangeScore: return "OutOfRangeScore";
    case ErrorKind::MagicMismatch: return "MagicMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::EmptyInventory: return "EmptyInventory";
    case ErrorKind::InventoryExhausted: return "InventoryExhausted";
    case ErrorKind::PredictorViolation: return "PredictorViolation";
    case ErrorKind::RemoteFailure: return "RemoteFailure";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooFewItems: return "TooFewItems";
    case ErrorKind::MissingTruth: return "MissingTruth";
    case ErrorKind::InsufficientRooms: return "InsufficientRooms";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string to_json_line(const Diagnostic& d) {
  nlohmann::json j{{"level", d.level}, {"code", d.code}, {"message", d.message}};
  return j.dump();
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace roomgroup
