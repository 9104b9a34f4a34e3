#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomgroup/diagnostics.hpp"

namespace roomgroup {

/// Trim, lowercase (ASCII), and collapse internal whitespace runs to one space.
std::string canonical_label(std::string_view label);

/// Trim and collapse whitespace, preserving case. Used for bed-type strings,
/// which are reported back verbatim.
std::string canonical_text(std::string_view text);

struct TagSet {
  std::vector<std::string> scenes;
  std::vector<std::string> concepts;
  std::vector<std::string> objects;

  bool operator==(const TagSet&) const = default;
};

/// Returns a copy with every label passed through canonical_label.
TagSet canonicalize(const TagSet& tags);

struct ImageRecord {
  std::string image_id;
  std::string uri;
  TagSet tags;

  bool operator==(const ImageRecord&) const = default;
};

struct PropertyMetadata {
  std::map<std::string, int> room_counts;  // canonical room-type name -> k
  std::vector<std::string> bed_types;      // duplicates allowed

  bool operator==(const PropertyMetadata&) const = default;
};

struct PropertyCatalog {
  std::string property_id;
  std::vector<ImageRecord> images;
  PropertyMetadata metadata;

  bool operator==(const PropertyCatalog&) const = default;

  const ImageRecord* find(std::string_view image_id) const;
};

/// Throws Error{SchemaViolation} on the first broken invariant.
void validate(const PropertyCatalog& catalog);

/// Parses and validates a catalog document. Unknown keys are reported to
/// `diagnostics` (when given) and otherwise ignored.
PropertyCatalog parse_catalog(std::string_view text, Diagnostics* diagnostics = nullptr);
PropertyCatalog load_catalog(const std::filesystem::path& path,
                             Diagnostics* diagnostics = nullptr);
std::string serialize_catalog(const PropertyCatalog& catalog);
void write_catalog(const PropertyCatalog& catalog, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Grouping output

struct OutputGroup {
  std::string group_id;
  std::vector<std::string> image_ids;
  double mean_internal_score = 0.0;
  std::optional<std::string> bed_type;

  bool operator==(const OutputGroup&) const = default;
};

struct GroupingOutput {
  std::string property_id;
  std::map<std::string, std::vector<OutputGroup>> room_types;
  std::vector<std::string> unassigned;

  bool operator==(const GroupingOutput&) const = default;
};

/// `<room_type>-<1-based index>`; spaces in the room type become underscores
/// so ids stay single tokens ("living_room-2").
std::string make_group_id(std::string_view room_type, std::size_t index);

/// Checks that no image id appears twice across groups and unassigned, that
/// scores lie in [0,1], and that bed types appear only on bedroom groups.
void validate(const GroupingOutput& grouping);

/// Additionally checks that the grouping covers exactly the catalog's images.
void validate_coverage(const GroupingOutput& grouping, const PropertyCatalog& catalog);

std::string serialize_grouping(const GroupingOutput& grouping);
GroupingOutput parse_grouping(std::string_view text);
void write_grouping(const GroupingOutput& grouping, const std::filesystem::path& path);
GroupingOutput load_grouping(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Ground truth (produced by the synthetic generator, consumed by evaluation)

struct CameraPose {
  std::size_t room_index = 0;  // index among rooms of the same type
  double x = 0.0;              // meters
  double y = 0.0;
  double heading = 0.0;        // radians in [0, 2*pi)
  std::size_t capture_index = 0;  // unique per image within a property

  bool operator==(const CameraPose&) const = default;
};

struct TruthImage {
  std::string image_id;
  std::string room_type;
  CameraPose pose;

  bool operator==(const TruthImage&) const = default;
};

struct TruthRoom {
  std::string room_type;
  std::size_t room_index = 0;
  double width = 0.0;
  double depth = 0.0;
  std::optional<std::string> bed_type;  // bedrooms only

  bool operator==(const TruthRoom&) const = default;
};

struct GroundTruth {
  std::string property_id;
  std::vector<TruthRoom> rooms;
  std::vector<TruthImage> images;

  bool operator==(const GroundTruth&) const = default;

  const TruthImage* find(std::string_view image_id) const;
  const TruthRoom* room(std::string_view room_type, std::size_t room_index) const;
  std::size_t room_count(std::string_view room_type) const;

  /// Per room type, lists of image ids per room (in image order).
  std::map<std::string, std::vector<std::vector<std::string>>> partition() const;
};

std::string serialize_truth(const GroundTruth& truth);
GroundTruth parse_truth(std::string_view text);
void write_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_truth(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace roomgroup
