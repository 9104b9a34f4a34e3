#include "roomgroup/metrics.hpp"

#include <cmath>
#include <map>

#include "json.hpp"
#include "support.hpp"

using namespace roomgroup;

namespace {

// Adjusted Rand index from explicit agreement over all item pairs.
double pair_counting_ari(const LabelVector& x, const LabelVector& y) {
  const std::size_t n = x.size();
  double both = 0, only_x = 0, only_y = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sx = x[i] == x[j], sy = y[i] == y[j];
      both += sx && sy;
      only_x += sx;
      only_y += sy;
      ++pairs;
    }
  const double expected = only_x * only_y / pairs;
  const double max = 0.5 * (only_x + only_y);
  if (max == expected) return 1.0;
  return (both - expected) / (max - expected);
}

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [k, c] : counts)
    if (c > 0) h -= c / n * std::log(c / n);
  return h;
}

VMeasure hand_v_measure(const LabelVector& t, const LabelVector& p) {
  const double n = static_cast<double>(t.size());
  std::map<int, double> ct, cp;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++ct[t[i]];
    ++cp[p[i]];
    ++joint[{t[i], p[i]}];
  }
  double h_c_given_k = 0.0, h_k_given_c = 0.0;
  for (const auto& [key, c] : joint) {
    h_c_given_k -= c / n * std::log(c / cp[key.second]);
    h_k_given_c -= c / n * std::log(c / ct[key.first]);
  }
  const double hc = entropy(ct, n), hk = entropy(cp, n);
  VMeasure v;
  v.homogeneity = hc == 0 ? 1.0 : 1.0 - h_c_given_k / hc;
  v.completeness = hk == 0 ? 1.0 : 1.0 - h_k_given_c / hk;
  v.v = v.homogeneity + v.completeness == 0
            ? 0.0
            : 2 * v.homogeneity * v.completeness / (v.homogeneity + v.completeness);
  return v;
}

// All label vectors of length n over {0..labels-1}.
std::vector<LabelVector> all_vectors(std::size_t n, int labels) {
  std::vector<LabelVector> out;
  LabelVector v(n, 0);
  while (true) {
    out.push_back(v);
    std::size_t i = 0;
    while (i < n && ++v[i] == labels) v[i++] = 0;
    if (i == n) break;
  }
  return out;
}

GroundTruth two_bedroom_truth() {
  GroundTruth t;
  t.property_id = "P";
  t.rooms = {{"bedroom", 0, 3, 3, std::string("1 King Bed")}, {"bedroom", 1, 3, 3, std::string("2 Twin Beds")},
             {"bathroom", 0, 2, 2, std::nullopt}};
  t.images = {{"a", "bedroom", {0, 0, 0, 0, 0}}, {"b", "bedroom", {0, 0, 0, 0.1, 1}},
              {"c", "bedroom", {1, 0, 0, 0, 2}}, {"d", "bedroom", {1, 0, 0, 0.2, 3}},
              {"e", "bathroom", {0, 0, 0, 0, 4}}};
  return t;
}

GroupingOutput perfect_prediction() {
  GroupingOutput g;
  g.property_id = "P";
  g.room_types["bedroom"] = {{"bedroom-1", {"a", "b"}, 0.9, std::string("1 King Bed")},
                             {"bedroom-2", {"c", "d"}, 0.9, std::string("2 Twin Beds")}};
  g.room_types["bathroom"] = {{"bathroom-1", {"e"}, 1.0, std::nullopt}};
  return g;
}

}  // namespace

TEST_CASE("contingency worked example") {
  const Contingency c = contingency({0, 0, 1, 1}, {0, 0, 1, 0});
  CHECK(c.counts == std::vector<std::vector<long long>>{{2, 0}, {1, 1}});
  CHECK(c.truth_totals == std::vector<long long>{2, 2});
  CHECK(c.pred_totals == std::vector<long long>{3, 1});
  CHECK(c.n == 4);
  CHECK(contingency({3}, {7}).counts == std::vector<std::vector<long long>>{{1}});
  const Contingency d = contingency({0, 1, 2}, {5, 6, 7});
  CHECK(d.counts == std::vector<std::vector<long long>>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK_ERROR_KIND(contingency({0, 1}, {0}), ErrorKind::LengthMismatch);
}

TEST_CASE("ARI worked examples") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 0}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(adjusted_rand_index({0, 0, 0}, {1, 1, 1}) == 1.0);
  CHECK_ERROR_KIND(adjusted_rand_index({0}, {0}), ErrorKind::TooFewItems);
  CHECK_ERROR_KIND(adjusted_rand_index({0, 1}, {0}), ErrorKind::LengthMismatch);
}

TEST_CASE("normalized ARI is the affine map") {
  CHECK(normalized_ari({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
  CHECK(normalized_ari({0, 0, 1, 1}, {0, 0, 1, 0}) == doctest::Approx(0.5));
  // ARI = -0.5 for this pair
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5));
  CHECK(normalized_ari({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.25));
}

TEST_CASE("ARI matches the pair-counting oracle exhaustively") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const auto vectors = all_vectors(n, 3);
    for (const auto& x : vectors)
      for (const auto& y : vectors) {
        const double a = adjusted_rand_index(x, y);
        CHECK(std::abs(a - pair_counting_ari(x, y)) <= 1e-12);
      }
  }
}

TEST_CASE("ARI symmetry, relabeling invariance and bounds") {
  Rng rng(40);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    LabelVector x(n), y(n);
    for (auto& v : x) v = static_cast<int>(rng.below(4));
    for (auto& v : y) v = static_cast<int>(rng.below(5));
    const double a = adjusted_rand_index(x, y);
    CHECK(a == doctest::Approx(adjusted_rand_index(y, x)).epsilon(1e-12));
    CHECK(a >= -1.0);
    CHECK(a <= 1.0);
    LabelVector relabeled = y;
    for (auto& v : relabeled) v = 10 - v;
    CHECK(a == doctest::Approx(adjusted_rand_index(x, relabeled)).epsilon(1e-12));
    const VMeasure v1 = v_measure(x, y), v2 = v_measure(x, relabeled);
    CHECK(v1.v == doctest::Approx(v2.v).epsilon(1e-12));
    for (double m : {v1.homogeneity, v1.completeness, v1.v, normalized_ari(x, y)}) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
    }
  }
}

TEST_CASE("ARI is near zero for independent labelings") {
  Rng rng(41);
  double sum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    LabelVector x(200), y(200);
    for (auto& v : x) v = static_cast<int>(rng.below(4));
    for (auto& v : y) v = static_cast<int>(rng.below(4));
    sum += adjusted_rand_index(x, y);
  }
  CHECK(std::abs(sum / 100) < 0.05);
}

TEST_CASE("V-measure worked example and oracle") {
  const VMeasure v = v_measure({0, 0, 1, 1}, {0, 0, 1, 0});
  CHECK(v.homogeneity == doctest::Approx(0.3113).epsilon(1e-3));
  CHECK(v.completeness == doctest::Approx(0.3836).epsilon(1e-3));
  CHECK(v.v == doctest::Approx(0.3437).epsilon(1e-3));
  const VMeasure same = v_measure({0, 1, 1}, {2, 0, 0});
  CHECK(same.homogeneity == 1.0);
  CHECK(same.completeness == 1.0);
  CHECK(same.v == 1.0);
  const VMeasure singles = v_measure({0, 0, 1, 1}, {0, 1, 2, 3});
  CHECK(singles.homogeneity == doctest::Approx(1.0));
  CHECK(singles.completeness < 1.0);
  for (std::size_t n = 1; n <= 5; ++n)
    for (const auto& x : all_vectors(n, 3))
      for (const auto& y : all_vectors(n, 3)) {
        const VMeasure got = v_measure(x, y), want = hand_v_measure(x, y);
        CHECK(got.homogeneity == doctest::Approx(want.homogeneity).epsilon(1e-12));
        CHECK(got.completeness == doctest::Approx(want.completeness).epsilon(1e-12));
        CHECK(got.v == doctest::Approx(want.v).epsilon(1e-12));
      }
}

TEST_CASE("perfect property evaluates correct") {
  const auto e = evaluate_property(perfect_prediction(), two_bedroom_truth());
  CHECK(e.correct());
  CHECK(e.bedrooms == 2);
  CHECK(e.room_types.at("bedroom").ari == 1.0);
  CHECK(e.room_types.at("bedroom").vm->v == 1.0);
  CHECK_FALSE(e.room_types.at("bathroom").ari.has_value());  // single image
}

TEST_CASE("swapped bed label breaks correctness but not clustering") {
  GroupingOutput g = perfect_prediction();
  std::swap(g.room_types["bedroom"][0].bed_type, g.room_types["bedroom"][1].bed_type);
  const auto e = evaluate_property(g, two_bedroom_truth());
  CHECK(e.partition_correct);
  CHECK_FALSE(e.beds_correct);
  CHECK(e.room_types.at("bedroom").ari == 1.0);
}

TEST_CASE("unassigned images are excluded from the partition comparison") {
  GroupingOutput g = perfect_prediction();
  g.room_types["bedroom"][0].image_ids = {"a"};
  g.unassigned = {"b"};
  const auto e = evaluate_property(g, two_bedroom_truth());
  CHECK(e.correct());
  CHECK(e.room_types.at("bedroom").images == 3);

  GroupingOutput merged = perfect_prediction();
  merged.room_types["bedroom"][0].image_ids = {"a", "b", "c"};
  merged.room_types["bedroom"][1].image_ids = {"d"};
  CHECK_FALSE(evaluate_property(merged, two_bedroom_truth()).partition_correct);
}

TEST_CASE("bed truth follows the majority room of a group") {
  const GroundTruth t = two_bedroom_truth();
  CHECK(majority_bed_type({"a", "b", "c"}, t) == std::optional<std::string>("1 King Bed"));
  CHECK(majority_bed_type({"c", "d", "a"}, t) == std::optional<std::string>("2 Twin Beds"));
  CHECK(majority_bed_type({"a", "c"}, t) == std::optional<std::string>("1 King Bed"));  // tie: lower index
  CHECK_ERROR_KIND(majority_bed_type({"zz"}, t), ErrorKind::MissingTruth);
}

TEST_CASE("property accuracy counts fully correct properties") {
  std::vector<GroupingOutput> preds;
  std::vector<GroundTruth> truths;
  for (int i = 0; i < 10; ++i) {
    GroupingOutput g = perfect_prediction();
    GroundTruth t = two_bedroom_truth();
    g.property_id = t.property_id = "P" + std::to_string(i);
    if (i == 3) std::swap(g.room_types["bedroom"][0].bed_type, g.room_types["bedroom"][1].bed_type);
    preds.push_back(g);
    truths.push_back(t);
  }
  CHECK(property_accuracy(preds, truths) == doctest::Approx(0.9));
  truths[5].property_id = "other";
  CHECK_ERROR_KIND(property_accuracy(preds, truths), ErrorKind::MissingTruth);
}

TEST_CASE("report buckets by bedroom count") {
  CHECK(bedroom_bucket(2) == "2");
  CHECK(bedroom_bucket(4) == "4");
  CHECK(bedroom_bucket(5) == ">4");
  CHECK(bedroom_bucket(9) == ">4");
  std::vector<GroupingOutput> preds{perfect_prediction()};
  std::vector<GroundTruth> truths{two_bedroom_truth()};
  const MetricReport r = evaluate(preds, truths);
  REQUIRE(r.buckets.size() == 1);
  CHECK(r.buckets[0].bucket == "2");
  CHECK(r.buckets[0].ari == 1.0);
  CHECK(r.overall.accuracy == 1.0);
  const auto doc = nlohmann::json::parse(serialize_report(r));
  CHECK(doc.at("properties").size() == 1);
  CHECK(doc.at("overall").at("v_measure") == 1.0);
}
