#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "roomgroup/catalog.hpp"
#include "roomgroup/overlap.hpp"

namespace roomgroup {

struct SynthConfig {
  std::map<std::string, int> rooms_per_type{{"bedroom", 2}};
  int images_min = 2;
  int images_max = 5;
  double score_noise_sigma = 0.0;
  double overlap_heading_max = std::numbers::pi / 2;
  std::uint64_t seed = 0;
  std::vector<std::string> bed_vocab{"1 King Bed", "1 Queen Bed", "2 Twin Beds",
                                     "1 Double Bed"};
  // Within a room, consecutive captures turn by U(step_min, step_max) times
  // overlap_heading_max; the whole sweep is scaled down to at most max_sweep.
  double heading_step_min = 0.1;
  double heading_step_max = 0.5;
  double max_sweep = std::numbers::pi;
  std::string property_id;  // empty: "S<seed>"

  /// Throws Error{ConfigError}.
  void validate() const;
};

struct SyntheticProperty {
  PropertyCatalog catalog;
  GroundTruth truth;
};

/// Deterministic in cfg.seed. Image order in the catalog is shuffled.
SyntheticProperty generate_property(const SynthConfig& cfg);

inline constexpr double kCrossRoomScore = 0.05;
inline constexpr double kSameRoomFloor = 0.1;

/// Wrapped |a - b| in [0, pi].
double heading_difference(double a, double b);

/// Overlap surrogate: 0.05 across rooms, max(0.1, 1 - dheading / heading_max)
/// within a room, plus pair-seeded Gaussian noise, clamped to [0,1].
/// `same_room` compares room type as well as index, which CameraPose alone
/// does not carry.
double synth_overlap_score(const CameraPose& p, const CameraPose& q, bool same_room,
                           const SynthConfig& cfg);
double synth_overlap_score(const TruthImage& p, const TruthImage& q, const SynthConfig& cfg);

/// Scores pairs straight from the planted poses.
class SyntheticOracle final : public ScorerBackend {
 public:
  SyntheticOracle(const GroundTruth& truth, SynthConfig cfg);

  bool has_encoder() const override { return false; }
  double pair_score(const ImageRef& a, const ImageRef& b) override;

 private:
  std::unordered_map<std::string, TruthImage> images_;
  SynthConfig cfg_;
};

struct SynthEncoding {
  std::vector<Embedding> embeddings;  // catalog order
  HeadWeights weights;
};

/// Embeddings plus a one-layer sigmoid head whose scores are a monotone
/// surrogate of the noise-free oracle: each room owns a (1, cos h, sin h)
/// slot, so the element-wise product is nonzero only for same-room pairs and
/// then carries cos(dheading).
SynthEncoding synth_embeddings_and_weights(const SyntheticProperty& property);

// ---------------------------------------------------------------------------
// Pair-training manifest

struct PairCounts {
  std::size_t self_supervised_pos = 0;
  std::size_t negatives = 0;
  std::size_t manual_slots = 0;
};

struct AugmentParams {
  double crop_x = 0.0;  // normalized crop rectangle
  double crop_y = 0.0;
  double crop_w = 1.0;
  double crop_h = 1.0;
  bool flip = false;
  double brightness_delta = 0.0;

  bool operator==(const AugmentParams&) const = default;
};

enum class PairKind { SelfSupervised, Negative, Manual };

struct ManifestRow {
  std::string split;  // "pretrain" | "finetune"
  PairKind kind = PairKind::SelfSupervised;
  std::string image_a;
  std::string image_b;       // empty for self-supervised and manual slots
  AugmentParams transform;   // self-supervised rows only
  int label = 1;

  bool operator==(const ManifestRow&) const = default;
};

struct PairManifest {
  std::string property_id;
  std::vector<ManifestRow> rows;
};

/// Pretrain rows: `self_supervised_pos` augmented positives and `negatives`
/// cross-room pairs. Finetune rows: `manual_slots` placeholders for annotated
/// positives plus the same number of fresh self-supervised positives and
/// negatives. Errors: InsufficientRooms when negatives are needed but no room
/// type has two rooms with images.
PairManifest generate_pair_manifest(const SyntheticProperty& property, const PairCounts& counts,
                                    std::uint64_t seed);
PairManifest generate_pair_manifest(const PropertyCatalog& catalog, const GroundTruth& truth,
                                    const PairCounts& counts, std::uint64_t seed);

std::string serialize_manifest(const PairManifest& manifest);

}  // namespace roomgroup
