#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roomgroup/bedmap.hpp"
#include "roomgroup/catalog.hpp"
#include "roomgroup/clustering.hpp"
#include "roomgroup/diagnostics.hpp"
#include "roomgroup/overlap.hpp"
#include "roomgroup/room_typing.hpp"

namespace roomgroup {

struct PipelineOptions {
  RuleTable rules = RuleTable::defaults();
  double tau = 0.5;
  std::uint64_t seed = 0;
  SpectralParams spectral;  // k is taken from metadata per room type
  std::size_t score_threads = 1;
};

/// Room types that will be clustered: present in room_counts and holding at
/// least one image. Images of other room types end up unassigned.
struct RoomTypeBuckets {
  std::map<std::string, std::vector<std::string>> clustered;
  std::vector<std::string> unclustered;  // catalog order
};

RoomTypeBuckets bucket_images(const PropertyCatalog& catalog, const RuleTable& rules,
                              Diagnostics* diagnostics = nullptr);

/// One overlap matrix per clustered room type.
std::map<std::string, OverlapBuild> score_property(const PropertyCatalog& catalog,
                                                   ScorerBackend& backend,
                                                   const PipelineOptions& options,
                                                   Diagnostics* diagnostics = nullptr);

struct RoomTypeClusters {
  Grouping clustered;  // before noise removal
  Grouping cleaned;
};

/// Spectral clustering + noise removal for every clustered room type, using
/// the supplied matrices. No bed types are set.
GroupingOutput cluster_property(const PropertyCatalog& catalog,
                                const std::map<std::string, OverlapMatrix>& matrices,
                                const PipelineOptions& options,
                                Diagnostics* diagnostics = nullptr,
                                std::map<std::string, RoomTypeClusters>* details = nullptr);

/// Bedroom groups with at least one image, in group index order.
std::vector<BedGroup> bedroom_groups(const GroupingOutput& grouping,
                                     const PropertyCatalog& catalog);

/// Runs the sequential bed mapping over bedroom groups and writes the chosen
/// bed types into `grouping`. Returns std::nullopt (and changes nothing) when
/// there are no non-empty bedroom groups.
std::optional<BedAssignment> map_bedrooms(GroupingOutput& grouping,
                                          const PropertyCatalog& catalog,
                                          PredictorBackend& predictor,
                                          Diagnostics* diagnostics = nullptr);

struct PipelineResult {
  GroupingOutput output;
  std::map<std::string, OverlapBuild> matrices;
  std::map<std::string, RoomTypeClusters> clusters;
  std::optional<BedAssignment> beds;
  Diagnostics diagnostics;
};

/// room typing -> overlap matrices -> spectral clustering -> noise removal ->
/// bed mapping (skipped when `predictor` is null).
PipelineResult run_pipeline(const PropertyCatalog& catalog, ScorerBackend& backend,
                            PredictorBackend* predictor, const PipelineOptions& options);

/// For each bedroom group with images, the bed type of the room that
/// contributes most of its images (ties go to the lower room index).
std::map<std::string, std::string> bed_truth_for_groups(const GroupingOutput& grouping,
                                                        const GroundTruth& truth);

}  // namespace roomgroup
