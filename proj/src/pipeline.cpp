#include "roomgroup/pipeline.hpp"

#include <algorithm>
#include <unordered_map>

#include "roomgroup/errors.hpp"
#include "roomgroup/metrics.hpp"

namespace roomgroup {

RoomTypeBuckets bucket_images(const PropertyCatalog& catalog, const RuleTable& rules,
                              Diagnostics* diagnostics) {
  RoomTypeBuckets out;
  for (const auto& [type, ids] : partition_by_room_type(catalog, rules)) {
    const std::string name(room_type_name(type));
    const bool counted = catalog.metadata.room_counts.count(name) != 0;
    if (ids.empty()) {
      if (counted && diagnostics != nullptr)
        diagnostics->warn("NoImages", "metadata lists " + name + " rooms but no image was typed " + name);
      continue;
    }
    if (counted) {
      out.clustered[name] = ids;
    } else {
      if (diagnostics != nullptr && type != RoomType::Other)
        diagnostics->warn("NoRoomCount", std::to_string(ids.size()) + " " + name +
                                             " image(s) left unassigned: no room count in metadata");
      out.unclustered.insert(out.unclustered.end(), ids.begin(), ids.end());
    }
  }
  return out;
}

std::map<std::string, OverlapBuild> score_property(const PropertyCatalog& catalog,
                                                   ScorerBackend& backend,
                                                   const PipelineOptions& options,
                                                   Diagnostics* diagnostics) {
  const RoomTypeBuckets buckets = bucket_images(catalog, options.rules, diagnostics);
  std::map<std::string, OverlapBuild> out;
  for (const auto& [name, ids] : buckets.clustered) {
    std::vector<ImageRef> refs;
    refs.reserve(ids.size());
    for (const auto& id : ids) refs.push_back({id, catalog.find(id)->uri});
    out.emplace(name, build_overlap_matrix(std::span<const ImageRef>(refs), backend,
                                           {options.score_threads}));
  }
  return out;
}

GroupingOutput cluster_property(const PropertyCatalog& catalog,
                                const std::map<std::string, OverlapMatrix>& matrices,
                                const PipelineOptions& options, Diagnostics* diagnostics,
                                std::map<std::string, RoomTypeClusters>* details) {
  Diagnostics local;
  Diagnostics& diag = diagnostics != nullptr ? *diagnostics : local;
  const RoomTypeBuckets buckets = bucket_images(catalog, options.rules, &diag);

  GroupingOutput out;
  out.property_id = catalog.property_id;
  std::vector<std::string> unassigned = buckets.unclustered;

  for (const auto& [name, ids] : buckets.clustered) {
    auto it = matrices.find(name);
    if (it == matrices.end())
      fail(ErrorKind::MissingScore, "no overlap scores for room type '" + name + "'");
    const OverlapMatrix w = it->second.ids() == ids ? it->second : it->second.permuted(ids);

    SpectralParams params = options.spectral;
    params.k = static_cast<std::size_t>(catalog.metadata.room_counts.at(name));
    params.seed = options.seed;

    Diagnostics room_diag;
    Grouping clustered = spectral_cluster(w, params, &room_diag);
    Grouping cleaned = remove_noise(clustered, w, options.tau);
    for (const auto& d : room_diag.records())
      diag.warn(d.code, name + ": " + d.message);
    for (std::size_t g = 0; g < cleaned.groups.size(); ++g) {
      if (cleaned.groups[g].empty() && !clustered.groups[g].empty())
        diag.warn("EmptyGroup", name + ": noise removal emptied group " + std::to_string(g + 1));
    }

    auto& groups = out.room_types[name];
    for (std::size_t g = 0; g < cleaned.groups.size(); ++g) {
      OutputGroup group;
      group.group_id = make_group_id(name, g + 1);
      group.image_ids = cleaned.groups[g];
      group.mean_internal_score = mean_internal_score(group.image_ids, w);
      groups.push_back(std::move(group));
    }
    unassigned.insert(unassigned.end(), cleaned.unassigned.begin(), cleaned.unassigned.end());
    if (details != nullptr) (*details)[name] = {std::move(clustered), std::move(cleaned)};
  }

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < catalog.images.size(); ++i) position[catalog.images[i].image_id] = i;
  std::sort(unassigned.begin(), unassigned.end(), [&](const auto& a, const auto& b) {
    return position.at(a) < position.at(b);
  });
  out.unassigned = std::move(unassigned);
  validate_coverage(out, catalog);
  return out;
}

std::vector<BedGroup> bedroom_groups(const GroupingOutput& grouping,
                                     const PropertyCatalog& catalog) {
  std::vector<BedGroup> out;
  auto it = grouping.room_types.find("bedroom");
  if (it == grouping.room_types.end()) return out;
  for (const auto& group : it->second) {
    if (group.image_ids.empty()) continue;
    BedGroup bed{group.group_id, group.image_ids, {}};
    for (const auto& id : group.image_ids) {
      const ImageRecord* record = catalog.find(id);
      bed.image_uris.push_back(record != nullptr ? record->uri : std::string());
    }
    out.push_back(std::move(bed));
  }
  return out;
}

std::optional<BedAssignment> map_bedrooms(GroupingOutput& grouping,
                                          const PropertyCatalog& catalog,
                                          PredictorBackend& predictor,
                                          Diagnostics* diagnostics) {
  const std::vector<BedGroup> groups = bedroom_groups(grouping, catalog);
  if (groups.empty()) return std::nullopt;
  BedAssignment assignment =
      map_spaces(groups, BedInventory::from_list(catalog.metadata.bed_types), predictor);

  const auto chosen = assignment.as_map();
  for (auto& group : grouping.room_types["bedroom"]) {
    auto found = chosen.find(group.group_id);
    group.bed_type = found != chosen.end() ? std::optional(found->second) : std::nullopt;
  }
  if (diagnostics != nullptr && !assignment.leftover.empty()) {
    std::string left;
    for (const auto& [bed, count] : assignment.leftover)
      left += (left.empty() ? "" : ", ") + std::to_string(count) + " x " + bed;
    diagnostics->warn("LeftoverInventory", "bed types not assigned to any group: " + left);
  }
  return assignment;
}

PipelineResult run_pipeline(const PropertyCatalog& catalog, ScorerBackend& backend,
                            PredictorBackend* predictor, const PipelineOptions& options) {
  PipelineResult result;
  result.matrices = score_property(catalog, backend, options);
  std::map<std::string, OverlapMatrix> matrices;
  for (const auto& [name, build] : result.matrices) matrices.emplace(name, build.matrix);
  result.output =
      cluster_property(catalog, matrices, options, &result.diagnostics, &result.clusters);
  if (predictor != nullptr)
    result.beds = map_bedrooms(result.output, catalog, *predictor, &result.diagnostics);
  return result;
}

std::map<std::string, std::string> bed_truth_for_groups(const GroupingOutput& grouping,
                                                        const GroundTruth& truth) {
  std::map<std::string, std::string> out;
  auto it = grouping.room_types.find("bedroom");
  if (it == grouping.room_types.end()) return out;
  for (const auto& group : it->second) {
    if (group.image_ids.empty()) continue;
    if (auto bed = majority_bed_type(group.image_ids, truth)) out[group.group_id] = *bed;
  }
  return out;
}

}  // namespace roomgroup
