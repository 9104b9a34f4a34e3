#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace roomgroup {

/// Remaining bed-type counts, keyed by canonical bed-type text and kept in
/// first-appearance order so the offered options are deterministic.
class BedInventory {
 public:
  /// Throws Error{EmptyInventory} for an empty list.
  static BedInventory from_list(const std::vector<std::string>& bed_types);

  std::vector<std::string> options() const;
  int count(const std::string& bed_type) const;
  int total() const;
  bool empty() const { return entries_.empty(); }

  /// Decrements `bed_type`, dropping it at zero. Requires count > 0.
  void take(const std::string& bed_type);

  const std::vector<std::pair<std::string, int>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, int>> entries_;
};

inline BedInventory build_frequency_dict(const std::vector<std::string>& bed_types) {
  return BedInventory::from_list(bed_types);
}

struct BedGroup {
  std::string group_id;
  std::vector<std::string> image_ids;
  std::vector<std::string> image_uris;
};

struct PredictionRequest {
  std::string group_id;
  std::vector<std::string> image_ids;
  std::vector<std::string> image_uris;
  std::vector<std::string> options;
};

class PredictorBackend {
 public:
  virtual ~PredictorBackend() = default;
  virtual std::string predict(const PredictionRequest& request) = 0;
};

/// Answers from a group_id -> bed type table. Falls back to the first option
/// when the true answer is no longer on offer (or the group is unknown).
class OracleFromTruth final : public PredictorBackend {
 public:
  explicit OracleFromTruth(std::map<std::string, std::string> truth);
  std::string predict(const PredictionRequest& request) override;

 private:
  std::map<std::string, std::string> truth_;
};

class FirstOption final : public PredictorBackend {
 public:
  std::string predict(const PredictionRequest& request) override;
};

/// Wraps another predictor and, with probability `error_rate`, replaces a
/// multi-option answer by a different option chosen uniformly. Used to model
/// an imperfect bed-type predictor in evaluation runs.
class ErrorInjectingPredictor final : public PredictorBackend {
 public:
  ErrorInjectingPredictor(PredictorBackend& inner, double error_rate, std::uint64_t seed);
  std::string predict(const PredictionRequest& request) override;

 private:
  PredictorBackend& inner_;
  double error_rate_;
  std::uint64_t seed_;
};

struct RemoteOptions {
  std::string endpoint;  // http://host[:port]/path
  std::string token;     // sent as "Authorization: Bearer <token>" when set
  int retries = 2;
  std::chrono::milliseconds timeout{10000};
};

/// HTTP client for an external bed-type predictor.
/// Request: {"group_id","image_uris","options","prompt_context"}.
/// Response: {"bed_type": "..."}.
class RemoteService final : public PredictorBackend {
 public:
  explicit RemoteService(RemoteOptions options);
  std::string predict(const PredictionRequest& request) override;

  std::size_t requests_sent() const { return requests_sent_; }

 private:
  std::string post(const PredictionRequest& request, const std::string& prompt_context);

  RemoteOptions options_;
  std::string host_;
  std::string path_;
  std::size_t requests_sent_ = 0;
};

inline constexpr const char* kDefaultPromptContext = "select exactly one option";

/// One POST round with retries on transport or HTTP status failures.
/// Errors: RemoteFailure, PredictorViolation (after one re-ask).
std::string remote_predict(const PredictionRequest& request, const RemoteOptions& options);

struct MappingStep {
  std::string group_id;
  std::vector<std::string> options;
  std::string choice;
  bool forced = false;  // single option, predictor not consulted

  bool operator==(const MappingStep&) const = default;
};

struct BedAssignment {
  std::vector<std::pair<std::string, std::string>> assignments;  // group_id -> bed type
  std::vector<MappingStep> trace;
  std::vector<std::pair<std::string, int>> leftover;

  std::map<std::string, std::string> as_map() const {
    return {assignments.begin(), assignments.end()};
  }
};

/// Sequential constrained mapping: each group is offered the bed types that
/// still have stock, the choice is consumed, exhausted types drop out.
/// Errors: InventoryExhausted, PredictorViolation, RemoteFailure.
BedAssignment map_spaces(std::span<const BedGroup> groups, BedInventory inventory,
                         PredictorBackend& predictor);

}  // namespace roomgroup
