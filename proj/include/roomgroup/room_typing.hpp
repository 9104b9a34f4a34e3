#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roomgroup/catalog.hpp"

namespace roomgroup {

enum class RoomType { Bedroom, LivingRoom, Bathroom, Other };

inline constexpr RoomType kAllRoomTypes[] = {RoomType::Bedroom, RoomType::LivingRoom,
                                             RoomType::Bathroom, RoomType::Other};

/// Canonical names as used in metadata room_counts: "bedroom", "living room",
/// "bathroom", "other".
std::string_view room_type_name(RoomType type);
std::optional<RoomType> parse_room_type(std::string_view name);

struct Rule {
  RoomType target = RoomType::Other;
  std::vector<std::string> scenes;            // any-of; empty = unconstrained
  std::vector<std::string> concepts;          // all-of
  std::vector<std::string> objects;           // all-of
  std::vector<std::string> exclude_concepts;  // none-of
  std::vector<std::string> exclude_objects;   // none-of

  bool operator==(const Rule&) const = default;
};

/// Ordered rule list, first match wins; images matching nothing are Other.
struct RuleTable {
  std::vector<Rule> rules;

  /// Bathroom, Bedroom, Living Room rules from the room-type tag table.
  static RuleTable defaults();

  bool operator==(const RuleTable&) const = default;
};

bool rule_matches(const Rule& rule, const TagSet& tags);

/// `tags` must already be canonicalized.
RoomType classify_room_type(const TagSet& tags, const RuleTable& rules);

/// Every image lands in exactly one bucket; buckets keep catalog order. All
/// four room types are present as keys, possibly with empty lists.
std::map<RoomType, std::vector<std::string>> partition_by_room_type(
    const PropertyCatalog& catalog, const RuleTable& rules);

/// Rules document: {"rules":[{"room_type":"bathroom","scenes":[..],
/// "concepts":[..],"objects":[..],"exclude_concepts":[..],"exclude_objects":[..]}]}
RuleTable parse_rules(std::string_view text);
RuleTable load_rules(const std::filesystem::path& path);
std::string serialize_rules(const RuleTable& rules);

}  // namespace roomgroup
