#include "roomgroup/pipeline.hpp"

#include <set>

#include "roomgroup/metrics.hpp"
#include "roomgroup/synthgen.hpp"
#include "support.hpp"

using namespace roomgroup;

namespace {

SynthConfig config(std::map<std::string, int> rooms, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.rooms_per_type = std::move(rooms);
  cfg.images_min = 2;
  cfg.images_max = 6;
  cfg.seed = seed;
  return cfg;
}

ImageRecord image(const std::string& id, std::vector<std::string> scenes,
                  std::vector<std::string> concepts, std::vector<std::string> objects) {
  return {id, "file:///" + id + ".jpg", {std::move(scenes), std::move(concepts), std::move(objects)}};
}

ImageRecord bathroom(const std::string& id) { return image(id, {"bathroom"}, {}, {}); }
ImageRecord bedroom(const std::string& id) {
  return image(id, {"guestroom"}, {"indoor"}, {"bed"});
}

// Scores every pair 0.9 when the ids share a prefix before '_', else 0.05.
class PrefixBackend final : public ScorerBackend {
 public:
  bool has_encoder() const override { return false; }
  double pair_score(const ImageRef& a, const ImageRef& b) override {
    return a.image_id.substr(0, a.image_id.find('_')) == b.image_id.substr(0, b.image_id.find('_'))
               ? 0.9
               : 0.05;
  }
};

}  // namespace

TEST_CASE("noise-free oracle pipeline reproduces the planted rooms and beds") {
  std::vector<GroupingOutput> preds;
  std::vector<GroundTruth> truths;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto cfg = config({{"bedroom", 1 + static_cast<int>(seed % 5)},
                             {"bathroom", 1 + static_cast<int>(seed % 2)},
                             {"living room", 1}},
                            seed);
    const auto p = generate_property(cfg);
    SyntheticOracle oracle(p.truth, cfg);
    PipelineOptions options;
    options.seed = seed;
    auto scored = run_pipeline(p.catalog, oracle, nullptr, options);
    OracleFromTruth predictor(bed_truth_for_groups(scored.output, p.truth));
    auto result = run_pipeline(p.catalog, oracle, &predictor, options);
    validate_coverage(result.output, p.catalog);
    const auto eval = evaluate_property(result.output, p.truth);
    CHECK(eval.partition_correct);
    CHECK(eval.beds_correct);
    REQUIRE(result.beds.has_value());
    CHECK(result.beds->leftover.empty());
    for (const auto& [type, build] : result.matrices) {
      CHECK(build.calls.head_calls == 0);
      CHECK(build.calls.encoder_calls == 0);
    }
    // before noise removal the clusters are exactly the planted rooms
    const auto planted = p.truth.partition();
    for (const auto& [type, detail] : result.clusters) {
      std::set<std::set<std::string>> got, want;
      for (const auto& g : detail.clustered.groups) got.insert({g.begin(), g.end()});
      for (const auto& room : planted.at(type)) want.insert({room.begin(), room.end()});
      CHECK(got == want);
    }
    preds.push_back(result.output);
    truths.push_back(p.truth);
  }
  CHECK(property_accuracy(preds, truths) == 1.0);
}

TEST_CASE("head backend path counts encoder and head calls") {
  const auto p = generate_property(config({{"bedroom", 3}, {"bathroom", 2}}, 4));
  const SynthEncoding enc = synth_embeddings_and_weights(p);
  LinearHead head(enc.embeddings, enc.weights);
  PipelineOptions options;
  options.score_threads = 3;
  const auto result = run_pipeline(p.catalog, head, nullptr, options);
  for (const auto& [type, build] : result.matrices) {
    const std::size_t n = build.matrix.size();
    CHECK(build.calls.encoder_calls == n);
    CHECK(build.calls.head_calls == pair_count(n));
  }
  CHECK(evaluate_property(result.output, p.truth).partition_correct);
}

TEST_CASE("scoring then clustering equals the single pass") {
  const auto cfg = config({{"bedroom", 4}, {"bathroom", 2}}, 11);
  const auto p = generate_property(cfg);
  SyntheticOracle oracle(p.truth, cfg);
  PipelineOptions options;
  options.seed = 3;
  const auto whole = run_pipeline(p.catalog, oracle, nullptr, options);

  PairScores scores;
  for (const auto& [type, build] : score_property(p.catalog, oracle, options))
    add_pair_scores(scores, build.matrix);
  const auto reparsed = parse_pair_scores(serialize_pair_scores(scores));
  const auto buckets = bucket_images(p.catalog, options.rules);
  std::map<std::string, OverlapMatrix> matrices;
  for (const auto& [type, ids] : buckets.clustered)
    matrices.emplace(type, matrix_from_pair_scores(reparsed, ids));
  CHECK(cluster_property(p.catalog, matrices, options) == whole.output);
}

TEST_CASE("bathroom-only property skips bed mapping") {
  PropertyCatalog c{"P1", {bathroom("a_1"), bathroom("a_2"), bathroom("b_1")}, {{{"bathroom", 2}}, {}}};
  PrefixBackend backend;
  FirstOption predictor;
  const auto result = run_pipeline(c, backend, &predictor, {});
  CHECK_FALSE(result.beds.has_value());
  REQUIRE(result.output.room_types.at("bathroom").size() == 2);
  CHECK(result.output.room_types.at("bathroom")[0].image_ids == std::vector<std::string>{"a_1", "a_2"});
  CHECK(result.output.room_types.at("bathroom")[1].image_ids == std::vector<std::string>{"b_1"});
  CHECK(result.output.room_types.at("bathroom")[0].group_id == "bathroom-1");
}

TEST_CASE("types without a room count are left unassigned with a warning") {
  PropertyCatalog c{"P2",
                    {bedroom("a_1"), bathroom("x_1"), bedroom("a_2"), image("o_1", {"kitchen"}, {}, {})},
                    {{{"bedroom", 1}}, {"1 King Bed"}}};
  PrefixBackend backend;
  FirstOption predictor;
  const auto result = run_pipeline(c, backend, &predictor, {});
  CHECK(result.output.unassigned == std::vector<std::string>{"x_1", "o_1"});
  bool warned = false;
  for (const auto& d : result.diagnostics.records()) warned |= d.code == "NoRoomCount";
  CHECK(warned);
  CHECK(result.output.room_types.at("bedroom")[0].bed_type == "1 King Bed");
  CHECK(result.output.room_types.count("bathroom") == 0);
}

TEST_CASE("counted room type without images warns") {
  PropertyCatalog c{"P3", {bathroom("x_1")}, {{{"bathroom", 1}, {"bedroom", 2}}, {"1 King Bed"}}};
  Diagnostics diag;
  const auto buckets = bucket_images(c, RuleTable::defaults(), &diag);
  CHECK(buckets.clustered.size() == 1);
  REQUIRE(diag.records().size() == 1);
  CHECK(diag.records()[0].code == "NoImages");
}

TEST_CASE("pipeline error paths") {
  PropertyCatalog c{"P4", {bedroom("a_1"), bedroom("b_1")}, {{{"bedroom", 2}}, {}}};
  PrefixBackend backend;
  FirstOption predictor;
  CHECK_ERROR_KIND(run_pipeline(c, backend, &predictor, {}), ErrorKind::EmptyInventory);
  CHECK_NOTHROW(run_pipeline(c, backend, nullptr, {}));
  CHECK_ERROR_KIND(cluster_property(c, {}, {}), ErrorKind::MissingScore);

  PropertyCatalog three{"P5", {bedroom("a_1"), bedroom("b_1")}, {{{"bedroom", 3}}, {"x"}}};
  const auto degenerate = run_pipeline(three, backend, nullptr, {});
  REQUIRE(degenerate.output.room_types.at("bedroom").size() == 3);
  CHECK(degenerate.output.room_types.at("bedroom")[2].image_ids.empty());
  bool warned = false;
  for (const auto& d : degenerate.diagnostics.records())
    warned |= d.code == "DegenerateInput" && d.message.rfind("bedroom: ", 0) == 0;
  CHECK(warned);
}

TEST_CASE("noise removal sends weak members to unassigned") {
  // group a has a stranger "a_9" that scores low with everything
  class Backend final : public ScorerBackend {
   public:
    bool has_encoder() const override { return false; }
    double pair_score(const ImageRef& a, const ImageRef& b) override {
      if (a.image_id == "a_9" || b.image_id == "a_9") return 0.3;
      return a.image_id[0] == b.image_id[0] ? 0.95 : 0.02;
    }
  } backend;
  PropertyCatalog c{"P6",
                    {bedroom("a_1"), bedroom("a_2"), bedroom("a_3"), bedroom("a_9"), bedroom("b_1"),
                     bedroom("b_2")},
                    {{{"bedroom", 2}}, {"1 King Bed", "2 Twin Beds"}}};
  const auto result = run_pipeline(c, backend, nullptr, {});
  CHECK(result.output.unassigned == std::vector<std::string>{"a_9"});
  const auto& details = result.clusters.at("bedroom");
  std::size_t before = 0, after = 0;
  for (const auto& g : details.clustered.groups) before += g.size();
  for (const auto& g : details.cleaned.groups) after += g.size();
  CHECK(before == 6);
  CHECK(after == 5);
}

TEST_CASE("majority truth per bedroom group") {
  GroundTruth truth;
  truth.rooms = {{"bedroom", 0, 3, 3, "1 King Bed"}, {"bedroom", 1, 3, 3, "2 Twin Beds"}};
  truth.images = {{"a", "bedroom", {0, 0, 0, 0, 0}},
                  {"b", "bedroom", {0, 0, 0, 0, 1}},
                  {"c", "bedroom", {1, 0, 0, 0, 2}}};
  GroupingOutput g;
  g.room_types["bedroom"] = {{"bedroom-1", {"a", "c", "b"}, 0.5, std::nullopt},
                             {"bedroom-2", {}, 0.0, std::nullopt}};
  const auto table = bed_truth_for_groups(g, truth);
  CHECK(table == std::map<std::string, std::string>{{"bedroom-1", "1 King Bed"}});
}
