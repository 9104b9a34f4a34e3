#include "roomgroup/room_typing.hpp"

#include <algorithm>

#include "json.hpp"
#include "roomgroup/errors.hpp"

namespace roomgroup {

using nlohmann::json;

std::string_view room_type_name(RoomType type) {
  switch (type) {
    case RoomType::Bedroom: return "bedroom";
    case RoomType::LivingRoom: return "living room";
    case RoomType::Bathroom: return "bathroom";
    case RoomType::Other: return "other";
  }
  return "other";
}

std::optional<RoomType> parse_room_type(std::string_view name) {
  const std::string canon = canonical_label(name);
  for (RoomType t : kAllRoomTypes)
    if (room_type_name(t) == canon) return t;
  if (canon == "living_room" || canon == "livingroom") return RoomType::LivingRoom;
  return std::nullopt;
}

RuleTable RuleTable::defaults() {
  const std::vector<std::string> interior_scenes{"guestroom", "property interior", "undetermined"};
  RuleTable table;
  table.rules.push_back({RoomType::Bathroom, {"bathroom"}, {}, {}, {}, {}});
  table.rules.push_back({RoomType::Bedroom, interior_scenes, {"indoor"}, {"bed"}, {"closeup"}, {}});
  table.rules.push_back(
      {RoomType::LivingRoom, interior_scenes, {"indoor"}, {"couch"}, {"closeup"}, {"bed"}});
  return table;
}

namespace {

bool contains(const std::vector<std::string>& haystack, const std::string& needle) {
  return std::find(haystack.begin(), haystack.end(), needle) != haystack.end();
}

bool any_of_in(const std::vector<std::string>& wanted, const std::vector<std::string>& have) {
  return std::any_of(wanted.begin(), wanted.end(),
                     [&](const std::string& w) { return contains(have, w); });
}

bool all_of_in(const std::vector<std::string>& wanted, const std::vector<std::string>& have) {
  return std::all_of(wanted.begin(), wanted.end(),
                     [&](const std::string& w) { return contains(have, w); });
}

}  // namespace

bool rule_matches(const Rule& rule, const TagSet& tags) {
  if (!rule.scenes.empty() && !any_of_in(rule.scenes, tags.scenes)) return false;
  if (!all_of_in(rule.concepts, tags.concepts)) return false;
  if (!all_of_in(rule.objects, tags.objects)) return false;
  if (any_of_in(rule.exclude_concepts, tags.concepts)) return false;
  if (any_of_in(rule.exclude_objects, tags.objects)) return false;
  return true;
}

RoomType classify_room_type(const TagSet& tags, const RuleTable& rules) {
  for (const auto& rule : rules.rules)
    if (rule_matches(rule, tags)) return rule.target;
  return RoomType::Other;
}

std::map<RoomType, std::vector<std::string>> partition_by_room_type(
    const PropertyCatalog& catalog, const RuleTable& rules) {
  std::map<RoomType, std::vector<std::string>> buckets;
  for (RoomType t : kAllRoomTypes) buckets[t];
  for (const auto& image : catalog.images)
    buckets[classify_room_type(image.tags, rules)].push_back(image.image_id);
  return buckets;
}

RuleTable parse_rules(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::MalformedDocument, std::string("rules: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array())
    fail(ErrorKind::SchemaViolation, "rules: expected {\"rules\": [...]}");

  auto labels = [](const json& rule, const char* key, const std::string& path) {
    std::vector<std::string> out;
    auto it = rule.find(key);
    if (it == rule.end()) return out;
    if (!it->is_array()) fail(ErrorKind::SchemaViolation, path + "." + key + ": expected a list");
    for (const auto& v : *it) {
      if (!v.is_string())
        fail(ErrorKind::SchemaViolation, path + "." + key + ": expected strings");
      out.push_back(canonical_label(v.get<std::string>()));
    }
    return out;
  };

  RuleTable table;
  const json& rules = doc["rules"];
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::string path = "rules[" + std::to_string(i) + "]";
    const json& r = rules[i];
    if (!r.is_object() || !r.contains("room_type") || !r["room_type"].is_string())
      fail(ErrorKind::SchemaViolation, path + ".room_type: missing field");
    const auto target = parse_room_type(r["room_type"].get<std::string>());
    if (!target)
      fail(ErrorKind::SchemaViolation,
           path + ".room_type: unknown room type '" + r["room_type"].get<std::string>() + "'");
    table.rules.push_back({*target, labels(r, "scenes", path), labels(r, "concepts", path),
                           labels(r, "objects", path), labels(r, "exclude_concepts", path),
                           labels(r, "exclude_objects", path)});
  }
  return table;
}

RuleTable load_rules(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_rules(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_rules(const RuleTable& rules) {
  json list = json::array();
  for (const auto& rule : rules.rules) {
    list.push_back({{"room_type", room_type_name(rule.target)},
                    {"scenes", rule.scenes},
                    {"concepts", rule.concepts},
                    {"objects", rule.objects},
                    {"exclude_concepts", rule.exclude_concepts},
                    {"exclude_objects", rule.exclude_objects}});
  }
  return json{{"rules", list}}.dump(2) + "\n";
}

}  // namespace roomgroup
