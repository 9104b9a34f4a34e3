#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roomgroup/catalog.hpp"

namespace roomgroup {

using LabelVector = std::vector<int>;

struct Contingency {
  std::vector<int> truth_labels;  // distinct, ascending
  std::vector<int> pred_labels;   // distinct, ascending
  std::vector<std::vector<long long>> counts;  // [truth][pred]
  std::vector<long long> truth_totals;  // a_i
  std::vector<long long> pred_totals;   // b_j
  long long n = 0;
};

/// Errors: LengthMismatch, TooFewItems (empty input).
Contingency contingency(const LabelVector& truth, const LabelVector& pred);

/// Errors: LengthMismatch, TooFewItems (n < 2).
double adjusted_rand_index(const LabelVector& truth, const LabelVector& pred);

/// (ARI + 1) / 2.
double normalized_ari(const LabelVector& truth, const LabelVector& pred);

struct VMeasure {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v = 0.0;
};

VMeasure v_measure(const LabelVector& truth, const LabelVector& pred);

// ---------------------------------------------------------------------------
// Property-level evaluation

struct RoomTypeScores {
  std::size_t images = 0;  // retained images scored
  std::optional<double> ari;
  std::optional<double> ari_normalized;
  std::optional<VMeasure> vm;
  bool partition_correct = true;
};

struct PropertyEvaluation {
  std::string property_id;
  std::size_t bedrooms = 0;
  std::map<std::string, RoomTypeScores> room_types;
  bool partition_correct = true;
  bool beds_correct = true;
  bool correct() const { return partition_correct && beds_correct; }
};

/// Bed type of the room contributing most of `image_ids`. Errors: MissingTruth.
std::optional<std::string> majority_bed_type(const std::vector<std::string>& image_ids,
                                             const GroundTruth& truth);

/// Scores one property. Unassigned images are excluded from the partition
/// comparison; a bedroom group's true bed type is that of the room most of
/// its images come from.
PropertyEvaluation evaluate_property(const GroupingOutput& prediction, const GroundTruth& truth);

/// Fraction of predictions that are fully correct. Errors: MissingTruth.
double property_accuracy(std::span<const GroupingOutput> predictions,
                         std::span<const GroundTruth> truths);

struct BucketSummary {
  std::string bucket;  // "1", "2", "3", "4", ">4"
  std::size_t properties = 0;
  double ari = 0.0;
  double ari_normalized = 0.0;
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v_measure = 0.0;
  double accuracy = 0.0;
};

struct MetricReport {
  std::vector<PropertyEvaluation> properties;
  std::vector<BucketSummary> buckets;  // by bedroom count
  BucketSummary overall;
};

std::string bedroom_bucket(std::size_t bedrooms);

/// Per-property bedroom ARI / V-measure averaged by bedroom-count bucket.
MetricReport evaluate(std::span<const GroupingOutput> predictions,
                      std::span<const GroundTruth> truths);

std::string serialize_report(const MetricReport& report);

}  // namespace roomgroup
