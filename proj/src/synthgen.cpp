#include "roomgroup/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "roomgroup/errors.hpp"
#include "roomgroup/rng.hpp"
#include "roomgroup/room_typing.hpp"

namespace roomgroup {

using nlohmann::json;

void SynthConfig::validate() const {
  if (rooms_per_type.empty()) fail(ErrorKind::ConfigError, "synth: no rooms requested");
  for (const auto& [type, count] : rooms_per_type) {
    if (!parse_room_type(type))
      fail(ErrorKind::ConfigError, "synth: unknown room type '" + type + "'");
    if (count < 1) fail(ErrorKind::ConfigError, "synth: room count for '" + type + "' must be >= 1");
  }
  if (images_min < 1 || images_min > images_max)
    fail(ErrorKind::ConfigError, "synth: images-per-room range must satisfy 1 <= low <= high");
  if (!(score_noise_sigma >= 0.0)) fail(ErrorKind::ConfigError, "synth: noise must be >= 0");
  if (!(overlap_heading_max > 0.0))
    fail(ErrorKind::ConfigError, "synth: overlap_heading_max must be positive");
  if (!(heading_step_min >= 0.0 && heading_step_min <= heading_step_max))
    fail(ErrorKind::ConfigError, "synth: heading step range is invalid");
  if (!(max_sweep > 0.0)) fail(ErrorKind::ConfigError, "synth: max_sweep must be positive");
  if (rooms_per_type.count("bedroom") != 0 && bed_vocab.empty())
    fail(ErrorKind::ConfigError, "synth: bedrooms requested but bed vocabulary is empty");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.below(items.size())];
}

TagSet tags_for(RoomType type, Rng& rng) {
  static const std::vector<std::string> interior{"guestroom", "property interior", "undetermined"};
  TagSet tags;
  switch (type) {
    case RoomType::Bedroom:
      tags.scenes = {pick(interior, rng)};
      tags.concepts = {"indoor"};
      tags.objects = {"bed"};
      if (rng.uniform() < 0.5) tags.objects.push_back("lamp");
      break;
    case RoomType::LivingRoom:
      tags.scenes = {pick(interior, rng)};
      tags.concepts = {"indoor"};
      tags.objects = {"couch"};
      if (rng.uniform() < 0.5) tags.objects.push_back("table");
      break;
    case RoomType::Bathroom:
      tags.scenes = {"bathroom"};
      tags.concepts = {"indoor"};
      tags.objects = {"sink"};
      break;
    case RoomType::Other:
      tags.scenes = {"pool"};
      tags.concepts = {"outdoor"};
      break;
  }
  return tags;
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

}  // namespace

SyntheticProperty generate_property(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SyntheticProperty out;
  const std::string pid =
      cfg.property_id.empty() ? "S" + std::to_string(cfg.seed) : cfg.property_id;
  out.catalog.property_id = pid;
  out.truth.property_id = pid;

  struct Pending {
    std::string room_type;
    CameraPose pose;
  };
  std::vector<Pending> pending;

  for (const auto& [raw_type, count] : cfg.rooms_per_type) {
    const RoomType type = *parse_room_type(raw_type);
    const std::string type_name(room_type_name(type));
    out.catalog.metadata.room_counts[type_name] = count;
    for (int r = 0; r < count; ++r) {
      TruthRoom room;
      room.room_type = type_name;
      room.room_index = static_cast<std::size_t>(r);
      room.width = rng.uniform(3.0, 6.0);
      room.depth = rng.uniform(3.0, 6.0);
      if (type == RoomType::Bedroom) {
        room.bed_type = canonical_text(pick(cfg.bed_vocab, rng));
        out.catalog.metadata.bed_types.push_back(*room.bed_type);
      }

      const auto images = static_cast<std::size_t>(rng.between(cfg.images_min, cfg.images_max));
      std::vector<double> steps(images > 0 ? images - 1 : 0);
      for (auto& s : steps)
        s = rng.uniform(cfg.heading_step_min, cfg.heading_step_max) * cfg.overlap_heading_max;
      const double sweep = std::accumulate(steps.begin(), steps.end(), 0.0);
      if (sweep > cfg.max_sweep)
        for (auto& s : steps) s *= cfg.max_sweep / sweep;

      double heading = rng.uniform(0.0, kTwoPi);
      for (std::size_t i = 0; i < images; ++i) {
        if (i > 0) heading += steps[i - 1];
        CameraPose pose;
        pose.room_index = room.room_index;
        pose.x = rng.uniform(0.0, room.width);
        pose.y = rng.uniform(0.0, room.depth);
        pose.heading = wrap_angle(heading);
        pending.push_back({type_name, pose});
      }
      out.truth.rooms.push_back(std::move(room));
    }
  }

  // Fisher-Yates: the catalog order must not reveal the room layout.
  for (std::size_t i = pending.size(); i > 1; --i) std::swap(pending[i - 1], pending[rng.below(i)]);

  const int width = pending.size() < 1000 ? 3 : 6;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, i + 1);
    const std::string id = pid + "-img-" + buf;
    ImageRecord record;
    record.image_id = id;
    record.uri = "synthetic://" + pid + "/" + id + ".jpg";
    record.tags = tags_for(*parse_room_type(pending[i].room_type), rng);
    out.catalog.images.push_back(std::move(record));

    TruthImage image;
    image.image_id = id;
    image.room_type = pending[i].room_type;
    image.pose = pending[i].pose;
    image.pose.capture_index = i;
    out.truth.images.push_back(std::move(image));
  }
  validate(out.catalog);
  return out;
}

double heading_difference(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

double synth_overlap_score(const CameraPose& p, const CameraPose& q, bool same_room,
                           const SynthConfig& cfg) {
  double score = kCrossRoomScore;
  if (same_room) {
    const double dh = heading_difference(p.heading, q.heading);
    score = std::max(kSameRoomFloor, 1.0 - dh / cfg.overlap_heading_max);
  }
  if (cfg.score_noise_sigma > 0.0) {
    const auto lo = std::min(p.capture_index, q.capture_index);
    const auto hi = std::max(p.capture_index, q.capture_index);
    Rng noise(mix_seed(mix_seed(cfg.seed ^ 0x6F7665726C6170ULL, lo), hi));
    score += cfg.score_noise_sigma * noise.normal();
  }
  return std::clamp(score, 0.0, 1.0);
}

double synth_overlap_score(const TruthImage& p, const TruthImage& q, const SynthConfig& cfg) {
  const bool same = p.room_type == q.room_type && p.pose.room_index == q.pose.room_index;
  return synth_overlap_score(p.pose, q.pose, same, cfg);
}

SyntheticOracle::SyntheticOracle(const GroundTruth& truth, SynthConfig cfg) : cfg_(std::move(cfg)) {
  for (const auto& image : truth.images) images_.emplace(image.image_id, image);
}

double SyntheticOracle::pair_score(const ImageRef& a, const ImageRef& b) {
  auto ia = images_.find(a.image_id);
  auto ib = images_.find(b.image_id);
  if (ia == images_.end() || ib == images_.end())
    fail(ErrorKind::BackendFailure, "synthetic oracle has no pose for pair (" + a.image_id + "," +
                                        b.image_id + ")");
  return synth_overlap_score(ia->second, ib->second, cfg_);
}

SynthEncoding synth_embeddings_and_weights(const SyntheticProperty& property) {
  const auto& truth = property.truth;
  const std::size_t slots = truth.rooms.size();
  auto slot_of = [&](const TruthImage& image) {
    for (std::size_t s = 0; s < slots; ++s)
      if (truth.rooms[s].room_type == image.room_type &&
          truth.rooms[s].room_index == image.pose.room_index)
        return s;
    fail(ErrorKind::SchemaViolation, "image '" + image.image_id + "' refers to an unknown room");
  };

  SynthEncoding out;
  for (const auto& record : property.catalog.images) {
    const TruthImage* image = truth.find(record.image_id);
    if (image == nullptr)
      fail(ErrorKind::MissingTruth, "no truth for image '" + record.image_id + "'");
    Embedding e{record.image_id, std::vector<float>(3 * slots, 0.0f)};
    const std::size_t s = slot_of(*image);
    e.vector[3 * s] = 1.0f;
    e.vector[3 * s + 1] = static_cast<float>(std::cos(image->pose.heading));
    e.vector[3 * s + 2] = static_cast<float>(std::sin(image->pose.heading));
    out.embeddings.push_back(std::move(e));
  }

  // Same room: logit = a + b*cos(dh) + c, spanning logit(0.1)..logit(0.97).
  // Different rooms: the product vanishes and only the bias c = logit(0.05)
  // remains.
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  const double c = logit(kCrossRoomScore);
  const double hi = logit(0.97);
  const double lo = logit(kSameRoomFloor);
  const double b = 0.5 * (hi - lo);
  const double a = 0.5 * (hi + lo) - c;

  DenseLayer layer;
  layer.weight.assign(1, std::vector<double>(3 * slots, 0.0));
  for (std::size_t s = 0; s < slots; ++s) {
    layer.weight[0][3 * s] = a;
    layer.weight[0][3 * s + 1] = b;
    layer.weight[0][3 * s + 2] = b;
  }
  layer.bias = {c};
  layer.activation = Activation::Sigmoid;
  out.weights.layers.push_back(std::move(layer));
  return out;
}

// ---------------------------------------------------------------------------

PairManifest generate_pair_manifest(const PropertyCatalog& catalog, const GroundTruth& truth,
                                    const PairCounts& counts, std::uint64_t seed) {
  PairManifest manifest;
  manifest.property_id = catalog.property_id;
  if (catalog.images.empty()) fail(ErrorKind::InsufficientRooms, "property has no images");

  // room type -> room index -> image ids (catalog order)
  std::map<std::string, std::map<std::size_t, std::vector<std::string>>> rooms;
  for (const auto& record : catalog.images) {
    const TruthImage* image = truth.find(record.image_id);
    if (image == nullptr)
      fail(ErrorKind::MissingTruth, "no truth for image '" + record.image_id + "'");
    rooms[image->room_type][image->pose.room_index].push_back(record.image_id);
  }
  std::vector<std::string> negative_types;
  for (const auto& [type, by_index] : rooms)
    if (by_index.size() >= 2) negative_types.push_back(type);

  const std::size_t negatives_needed = counts.negatives + counts.manual_slots;
  if (negatives_needed > 0 && negative_types.empty())
    fail(ErrorKind::InsufficientRooms,
         "property '" + catalog.property_id +
             "' has no room type with two photographed rooms; cannot draw negative pairs");

  Rng rng(seed);
  auto self_positive = [&](const std::string& split) {
    ManifestRow row;
    row.split = split;
    row.kind = PairKind::SelfSupervised;
    row.image_a = catalog.images[rng.below(catalog.images.size())].image_id;
    row.transform.crop_w = rng.uniform(0.6, 1.0);
    row.transform.crop_h = rng.uniform(0.6, 1.0);
    row.transform.crop_x = rng.uniform(0.0, 1.0 - row.transform.crop_w);
    row.transform.crop_y = rng.uniform(0.0, 1.0 - row.transform.crop_h);
    row.transform.flip = rng.uniform() < 0.5;
    row.transform.brightness_delta = rng.uniform(-0.2, 0.2);
    row.label = 1;
    return row;
  };
  auto negative = [&](const std::string& split) {
    const auto& by_index = rooms[negative_types[rng.below(negative_types.size())]];
    std::vector<std::size_t> keys;
    for (const auto& [idx, ids] : by_index) keys.push_back(idx);
    const std::size_t first = rng.below(keys.size());
    std::size_t second = rng.below(keys.size() - 1);
    if (second >= first) ++second;
    const auto& ra = by_index.at(keys[first]);
    const auto& rb = by_index.at(keys[second]);
    ManifestRow row;
    row.split = split;
    row.kind = PairKind::Negative;
    row.image_a = ra[rng.below(ra.size())];
    row.image_b = rb[rng.below(rb.size())];
    row.label = 0;
    return row;
  };

  for (std::size_t i = 0; i < counts.self_supervised_pos; ++i)
    manifest.rows.push_back(self_positive("pretrain"));
  for (std::size_t i = 0; i < counts.negatives; ++i) manifest.rows.push_back(negative("pretrain"));
  for (std::size_t i = 0; i < counts.manual_slots; ++i) {
    ManifestRow slot;
    slot.split = "finetune";
    slot.kind = PairKind::Manual;
    slot.label = 1;
    manifest.rows.push_back(slot);
  }
  for (std::size_t i = 0; i < counts.manual_slots; ++i)
    manifest.rows.push_back(self_positive("finetune"));
  for (std::size_t i = 0; i < counts.manual_slots; ++i) manifest.rows.push_back(negative("finetune"));
  return manifest;
}

PairManifest generate_pair_manifest(const SyntheticProperty& property, const PairCounts& counts,
                                    std::uint64_t seed) {
  return generate_pair_manifest(property.catalog, property.truth, counts, seed);
}

std::string serialize_manifest(const PairManifest& manifest) {
  json rows = json::array();
  for (const auto& row : manifest.rows) {
    json r{{"split", row.split}, {"label", row.label}};
    switch (row.kind) {
      case PairKind::SelfSupervised: r["kind"] = "self_supervised"; break;
      case PairKind::Negative: r["kind"] = "negative"; break;
      case PairKind::Manual: r["kind"] = "manual"; break;
    }
    r["image_a"] = row.image_a.empty() ? json(nullptr) : json(row.image_a);
    r["image_b"] = row.image_b.empty() ? json(nullptr) : json(row.image_b);
    if (row.kind == PairKind::SelfSupervised) {
      r["transform"] = {{"crop", {row.transform.crop_x, row.transform.crop_y, row.transform.crop_w,
                                  row.transform.crop_h}},
                        {"flip", row.transform.flip},
                        {"brightness_delta", row.transform.brightness_delta}};
    } else {
      r["transform"] = nullptr;
    }
    rows.push_back(std::move(r));
  }
  return json{{"property_id", manifest.property_id}, {"rows", rows}}.dump(2) + "\n";
}

}  // namespace roomgroup
