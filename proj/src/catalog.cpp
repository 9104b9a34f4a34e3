#include "roomgroup/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "roomgroup/errors.hpp"

namespace roomgroup {

using nlohmann::json;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string collapse(std::string_view text, bool lower) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c);
  }
  return out;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::SchemaViolation, path + ": " + what);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::MalformedDocument, std::string(what) + ": " + e.what());
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) schema_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema_error(path + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

void note_unknown_keys(const json& obj, std::initializer_list<std::string_view> known,
                       const std::string& path, Diagnostics* diagnostics) {
  if (diagnostics == nullptr || !obj.is_object()) return;
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      diagnostics->warn("UnknownField", path + "." + item.key() + " ignored");
  }
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) schema_error(path, "expected an object");
}

}  // namespace

std::string canonical_label(std::string_view label) { return collapse(label, true); }

std::string canonical_text(std::string_view text) { return collapse(text, false); }

TagSet canonicalize(const TagSet& tags) {
  auto canon = [](const std::vector<std::string>& in) {
    std::vector<std::string> out;
    out.reserve(in.size());
    for (const auto& s : in) out.push_back(canonical_label(s));
    return out;
  };
  return {canon(tags.scenes), canon(tags.concepts), canon(tags.objects)};
}

const ImageRecord* PropertyCatalog::find(std::string_view image_id) const {
  for (const auto& image : images)
    if (image.image_id == image_id) return &image;
  return nullptr;
}

void validate(const PropertyCatalog& catalog) {
  if (catalog.property_id.empty()) schema_error("property_id", "must be non-empty");
  if (catalog.images.empty()) schema_error("images", "at least one image is required");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < catalog.images.size(); ++i) {
    const auto& id = catalog.images[i].image_id;
    const std::string path = "images[" + std::to_string(i) + "].image_id";
    if (id.empty()) schema_error(path, "must be non-empty");
    if (!seen.insert(id).second) schema_error(path, "duplicate image_id '" + id + "'");
  }
  for (const auto& [room, count] : catalog.metadata.room_counts) {
    if (count < 1)
      schema_error("metadata.room_counts." + room,
                   "room count must be positive, got " + std::to_string(count));
  }
}

PropertyCatalog parse_catalog(std::string_view text, Diagnostics* diagnostics) {
  const json doc = parse_json(text, "catalog");
  require_object(doc, "$");
  note_unknown_keys(doc, {"property_id", "images", "metadata"}, "$", diagnostics);

  PropertyCatalog catalog;
  catalog.property_id = require_string(doc, "property_id", "$");

  const json& images = require(doc, "images", "$");
  if (!images.is_array()) schema_error("$.images", "expected a list");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = "$.images[" + std::to_string(i) + "]";
    const json& item = images[i];
    require_object(item, path);
    note_unknown_keys(item, {"image_id", "uri", "tags"}, path, diagnostics);
    ImageRecord record;
    record.image_id = require_string(item, "image_id", path);
    record.uri = require_string(item, "uri", path);
    const json& tags = require(item, "tags", path);
    require_object(tags, path + ".tags");
    note_unknown_keys(tags, {"scenes", "concepts", "objects"}, path + ".tags", diagnostics);
    record.tags.scenes = string_list(require(tags, "scenes", path + ".tags"), path + ".tags.scenes");
    record.tags.concepts =
        string_list(require(tags, "concepts", path + ".tags"), path + ".tags.concepts");
    record.tags.objects =
        string_list(require(tags, "objects", path + ".tags"), path + ".tags.objects");
    record.tags = canonicalize(record.tags);
    catalog.images.push_back(std::move(record));
  }

  const json& meta = require(doc, "metadata", "$");
  require_object(meta, "$.metadata");
  note_unknown_keys(meta, {"room_counts", "bed_types"}, "$.metadata", diagnostics);
  const json& counts = require(meta, "room_counts", "$.metadata");
  require_object(counts, "$.metadata.room_counts");
  for (const auto& item : counts.items()) {
    const std::string path = "$.metadata.room_counts." + item.key();
    if (!item.value().is_number_integer()) schema_error(path, "expected an integer");
    const auto value = item.value().get<long long>();
    if (value < 1) schema_error(path, "room count must be positive, got " + std::to_string(value));
    const std::string key = canonical_label(item.key());
    if (catalog.metadata.room_counts.count(key) != 0)
      schema_error(path, "duplicate room type after normalization ('" + key + "')");
    catalog.metadata.room_counts[key] = static_cast<int>(value);
  }
  if (auto it = meta.find("bed_types"); it != meta.end()) {
    for (auto& s : string_list(*it, "$.metadata.bed_types"))
      catalog.metadata.bed_types.push_back(canonical_text(s));
  }

  try {
    validate(catalog);
  } catch (const Error& e) {
    fail(e.kind(), std::string("$.") + e.what());
  }
  return catalog;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorKind::IoFailure, "read error on '" + path.string() + "'");
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "write error on '" + path.string() + "'");
}

PropertyCatalog load_catalog(const std::filesystem::path& path, Diagnostics* diagnostics) {
  const std::string text = read_text_file(path);
  try {
    return parse_catalog(text, diagnostics);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_catalog(const PropertyCatalog& catalog) {
  json images = json::array();
  for (const auto& image : catalog.images) {
    images.push_back({{"image_id", image.image_id},
                      {"uri", image.uri},
                      {"tags",
                       {{"scenes", image.tags.scenes},
                        {"concepts", image.tags.concepts},
                        {"objects", image.tags.objects}}}});
  }
  json doc{{"property_id", catalog.property_id},
           {"images", images},
           {"metadata",
            {{"room_counts", catalog.metadata.room_counts},
             {"bed_types", catalog.metadata.bed_types}}}};
  return doc.dump(2) + "\n";
}

void write_catalog(const PropertyCatalog& catalog, const std::filesystem::path& path) {
  write_text_file(path, serialize_catalog(catalog));
}

// ---------------------------------------------------------------------------

std::string make_group_id(std::string_view room_type, std::size_t index) {
  std::string id(room_type);
  std::replace(id.begin(), id.end(), ' ', '_');
  return id + "-" + std::to_string(index);
}

void validate(const GroupingOutput& grouping) {
  if (grouping.property_id.empty()) schema_error("property_id", "must be non-empty");
  std::set<std::string> seen;
  auto claim = [&](const std::string& id, const std::string& where) {
    if (id.empty()) schema_error(where, "empty image id");
    if (!seen.insert(id).second) schema_error(where, "image '" + id + "' appears more than once");
  };
  std::set<std::string> group_ids;
  for (const auto& [room, groups] : grouping.room_types) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& group = groups[g];
      const std::string path = "room_types." + room + "[" + std::to_string(g) + "]";
      if (!group_ids.insert(group.group_id).second)
        schema_error(path, "duplicate group_id '" + group.group_id + "'");
      if (!(group.mean_internal_score >= 0.0 && group.mean_internal_score <= 1.0))
        schema_error(path + ".mean_internal_score", "must lie in [0,1]");
      if (group.bed_type && room != "bedroom")
        schema_error(path + ".bed_type", "bed types are only valid on bedroom groups");
      for (const auto& id : group.image_ids) claim(id, path + ".image_ids");
    }
  }
  for (const auto& id : grouping.unassigned) claim(id, "unassigned");
}

void validate_coverage(const GroupingOutput& grouping, const PropertyCatalog& catalog) {
  validate(grouping);
  std::set<std::string> expected;
  for (const auto& image : catalog.images) expected.insert(image.image_id);
  std::set<std::string> got(grouping.unassigned.begin(), grouping.unassigned.end());
  for (const auto& [room, groups] : grouping.room_types)
    for (const auto& group : groups) got.insert(group.image_ids.begin(), group.image_ids.end());
  for (const auto& id : expected)
    if (got.count(id) == 0) schema_error("grouping", "image '" + id + "' is not covered");
  for (const auto& id : got)
    if (expected.count(id) == 0) schema_error("grouping", "unknown image '" + id + "'");
}

std::string serialize_grouping(const GroupingOutput& grouping) {
  json rooms = json::object();
  for (const auto& [room, groups] : grouping.room_types) {
    json list = json::array();
    for (const auto& group : groups) {
      list.push_back({{"group_id", group.group_id},
                      {"image_ids", group.image_ids},
                      {"mean_internal_score", group.mean_internal_score},
                      {"bed_type", group.bed_type ? json(*group.bed_type) : json(nullptr)}});
    }
    rooms[room] = std::move(list);
  }
  json doc{{"property_id", grouping.property_id},
           {"room_types", std::move(rooms)},
           {"unassigned", grouping.unassigned}};
  return doc.dump(2) + "\n";
}

GroupingOutput parse_grouping(std::string_view text) {
  const json doc = parse_json(text, "grouping");
  require_object(doc, "$");
  GroupingOutput out;
  out.property_id = require_string(doc, "property_id", "$");
  const json& rooms = require(doc, "room_types", "$");
  require_object(rooms, "$.room_types");
  for (const auto& item : rooms.items()) {
    const std::string path = "$.room_types." + item.key();
    if (!item.value().is_array()) schema_error(path, "expected a list of groups");
    auto& groups = out.room_types[item.key()];
    for (std::size_t g = 0; g < item.value().size(); ++g) {
      const json& entry = item.value()[g];
      const std::string gpath = path + "[" + std::to_string(g) + "]";
      require_object(entry, gpath);
      OutputGroup group;
      group.group_id = require_string(entry, "group_id", gpath);
      group.image_ids = string_list(require(entry, "image_ids", gpath), gpath + ".image_ids");
      const json& score = require(entry, "mean_internal_score", gpath);
      if (!score.is_number()) schema_error(gpath + ".mean_internal_score", "expected a number");
      group.mean_internal_score = score.get<double>();
      if (auto it = entry.find("bed_type"); it != entry.end() && !it->is_null()) {
        if (!it->is_string()) schema_error(gpath + ".bed_type", "expected a string or null");
        group.bed_type = it->get<std::string>();
      }
      groups.push_back(std::move(group));
    }
  }
  out.unassigned = string_list(require(doc, "unassigned", "$"), "$.unassigned");
  validate(out);
  return out;
}

void write_grouping(const GroupingOutput& grouping, const std::filesystem::path& path) {
  validate(grouping);
  write_text_file(path, serialize_grouping(grouping));
}

GroupingOutput load_grouping(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_grouping(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

const TruthImage* GroundTruth::find(std::string_view image_id) const {
  for (const auto& image : images)
    if (image.image_id == image_id) return &image;
  return nullptr;
}

const TruthRoom* GroundTruth::room(std::string_view room_type, std::size_t room_index) const {
  for (const auto& r : rooms)
    if (r.room_type == room_type && r.room_index == room_index) return &r;
  return nullptr;
}

std::size_t GroundTruth::room_count(std::string_view room_type) const {
  return static_cast<std::size_t>(
      std::count_if(rooms.begin(), rooms.end(),
                    [&](const TruthRoom& r) { return r.room_type == room_type; }));
}

std::map<std::string, std::vector<std::vector<std::string>>> GroundTruth::partition() const {
  std::map<std::string, std::vector<std::vector<std::string>>> out;
  for (const auto& r : rooms) {
    auto& lists = out[r.room_type];
    if (lists.size() <= r.room_index) lists.resize(r.room_index + 1);
  }
  for (const auto& image : images) {
    auto& lists = out[image.room_type];
    if (lists.size() <= image.pose.room_index) lists.resize(image.pose.room_index + 1);
    lists[image.pose.room_index].push_back(image.image_id);
  }
  return out;
}

std::string serialize_truth(const GroundTruth& truth) {
  json rooms = json::array();
  for (const auto& r : truth.rooms) {
    rooms.push_back({{"room_type", r.room_type},
                     {"room_index", r.room_index},
                     {"width", r.width},
                     {"depth", r.depth},
                     {"bed_type", r.bed_type ? json(*r.bed_type) : json(nullptr)}});
  }
  json images = json::array();
  for (const auto& image : truth.images) {
    images.push_back({{"image_id", image.image_id},
                      {"room_type", image.room_type},
                      {"room_index", image.pose.room_index},
                      {"capture_index", image.pose.capture_index},
                      {"x", image.pose.x},
                      {"y", image.pose.y},
                      {"heading", image.pose.heading}});
  }
  json doc{{"property_id", truth.property_id}, {"rooms", rooms}, {"images", images}};
  return doc.dump(2) + "\n";
}

GroundTruth parse_truth(std::string_view text) {
  const json doc = parse_json(text, "truth");
  require_object(doc, "$");
  GroundTruth truth;
  truth.property_id = require_string(doc, "property_id", "$");
  auto number = [](const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) schema_error(path + "." + key, "expected a number");
    return v.get<double>();
  };
  auto index = [](const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_unsigned()) schema_error(path + "." + key, "expected a non-negative integer");
    return v.get<std::size_t>();
  };
  const json& rooms = require(doc, "rooms", "$");
  if (!rooms.is_array()) schema_error("$.rooms", "expected a list");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string path = "$.rooms[" + std::to_string(i) + "]";
    const json& r = rooms[i];
    require_object(r, path);
    TruthRoom room;
    room.room_type = canonical_label(require_string(r, "room_type", path));
    room.room_index = index(r, "room_index", path);
    room.width = number(r, "width", path);
    room.depth = number(r, "depth", path);
    if (auto it = r.find("bed_type"); it != r.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(path + ".bed_type", "expected a string or null");
      room.bed_type = canonical_text(it->get<std::string>());
    }
    truth.rooms.push_back(std::move(room));
  }
  const json& images = require(doc, "images", "$");
  if (!images.is_array()) schema_error("$.images", "expected a list");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = "$.images[" + std::to_string(i) + "]";
    const json& item = images[i];
    require_object(item, path);
    TruthImage image;
    image.image_id = require_string(item, "image_id", path);
    if (!seen.insert(image.image_id).second)
      schema_error(path + ".image_id", "duplicate image_id '" + image.image_id + "'");
    image.room_type = canonical_label(require_string(item, "room_type", path));
    image.pose.room_index = index(item, "room_index", path);
    image.pose.capture_index = index(item, "capture_index", path);
    image.pose.x = number(item, "x", path);
    image.pose.y = number(item, "y", path);
    image.pose.heading = number(item, "heading", path);
    if (truth.room(image.room_type, image.pose.room_index) == nullptr)
      schema_error(path, "refers to unknown room " + image.room_type + "#" +
                             std::to_string(image.pose.room_index));
    truth.images.push_back(std::move(image));
  }
  return truth;
}

void write_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  write_text_file(path, serialize_truth(truth));
}

GroundTruth load_truth(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_truth(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace roomgroup
