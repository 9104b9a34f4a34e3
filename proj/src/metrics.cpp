#include "roomgroup/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "roomgroup/errors.hpp"

namespace roomgroup {

using nlohmann::json;

namespace {

double choose2(long long x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

}  // namespace

Contingency contingency(const LabelVector& truth, const LabelVector& pred) {
  if (truth.size() != pred.size())
    fail(ErrorKind::LengthMismatch, "label vectors differ in length (" +
                                        std::to_string(truth.size()) + " vs " +
                                        std::to_string(pred.size()) + ")");
  if (truth.empty()) fail(ErrorKind::TooFewItems, "label vectors are empty");

  Contingency table;
  table.truth_labels = truth;
  table.pred_labels = pred;
  for (auto* labels : {&table.truth_labels, &table.pred_labels}) {
    std::sort(labels->begin(), labels->end());
    labels->erase(std::unique(labels->begin(), labels->end()), labels->end());
  }
  auto index = [](const std::vector<int>& labels, int l) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) -
                                    labels.begin());
  };
  table.counts.assign(table.truth_labels.size(),
                      std::vector<long long>(table.pred_labels.size(), 0));
  table.truth_totals.assign(table.truth_labels.size(), 0);
  table.pred_totals.assign(table.pred_labels.size(), 0);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto i = index(table.truth_labels, truth[k]);
    const auto j = index(table.pred_labels, pred[k]);
    ++table.counts[i][j];
    ++table.truth_totals[i];
    ++table.pred_totals[j];
  }
  table.n = static_cast<long long>(truth.size());
  return table;
}

double adjusted_rand_index(const LabelVector& truth, const LabelVector& pred) {
  if (truth.size() != pred.size())
    fail(ErrorKind::LengthMismatch, "label vectors differ in length");
  if (truth.size() < 2) fail(ErrorKind::TooFewItems, "ARI needs at least two items");
  const Contingency t = contingency(truth, pred);

  double index = 0.0;
  for (const auto& row : t.counts)
    for (long long c : row) index += choose2(c);
  double sum_a = 0.0;
  for (long long a : t.truth_totals) sum_a += choose2(a);
  double sum_b = 0.0;
  for (long long b : t.pred_totals) sum_b += choose2(b);

  const double expected = sum_a * sum_b / choose2(t.n);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double normalized_ari(const LabelVector& truth, const LabelVector& pred) {
  return (adjusted_rand_index(truth, pred) + 1.0) / 2.0;
}

VMeasure v_measure(const LabelVector& truth, const LabelVector& pred) {
  const Contingency t = contingency(truth, pred);
  const double n = static_cast<double>(t.n);

  auto entropy = [n](const std::vector<long long>& totals) {
    double h = 0.0;
    for (long long c : totals)
      if (c > 0) h -= (static_cast<double>(c) / n) * std::log(static_cast<double>(c) / n);
    return h;
  };
  const double h_c = entropy(t.truth_totals);
  const double h_k = entropy(t.pred_totals);

  double h_c_given_k = 0.0;
  double h_k_given_c = 0.0;
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
      const double nij = static_cast<double>(t.counts[i][j]);
      if (nij == 0.0) continue;
      h_c_given_k -= (nij / n) * std::log(nij / static_cast<double>(t.pred_totals[j]));
      h_k_given_c -= (nij / n) * std::log(nij / static_cast<double>(t.truth_totals[i]));
    }
  }

  VMeasure out;
  out.homogeneity = h_c == 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
  out.completeness = h_k == 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
  // Clamp rounding residue.
  out.homogeneity = std::clamp(out.homogeneity, 0.0, 1.0);
  out.completeness = std::clamp(out.completeness, 0.0, 1.0);
  const double sum = out.homogeneity + out.completeness;
  out.v = sum == 0.0 ? 0.0 : 2.0 * out.homogeneity * out.completeness / sum;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Dense integer ids for string keys, in first-seen order.
class LabelIndex {
 public:
  int operator()(const std::string& key) {
    auto [it, inserted] = ids_.emplace(key, static_cast<int>(ids_.size()));
    return it->second;
  }

 private:
  std::map<std::string, int> ids_;
};

std::string room_key(const TruthImage& image) {
  return image.room_type + "#" + std::to_string(image.pose.room_index);
}

bool same_partition(const LabelVector& a, const LabelVector& b) {
  std::map<int, int> forward;
  std::map<int, int> backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fnew] = forward.emplace(a[i], b[i]);
    auto [r, rnew] = backward.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

}  // namespace

std::optional<std::string> majority_bed_type(const std::vector<std::string>& image_ids,
                                             const GroundTruth& truth) {
  std::map<std::pair<std::string, std::size_t>, std::size_t> votes;
  for (const auto& id : image_ids) {
    const TruthImage* image = truth.find(id);
    if (image == nullptr) fail(ErrorKind::MissingTruth, "no ground truth for image '" + id + "'");
    ++votes[{image->room_type, image->pose.room_index}];
  }
  // std::map order makes ties go to the lower (room type, room index).
  const std::pair<std::string, std::size_t>* best = nullptr;
  std::size_t best_votes = 0;
  for (const auto& [key, count] : votes) {
    if (count > best_votes) {
      best = &key;
      best_votes = count;
    }
  }
  if (best == nullptr) return std::nullopt;
  const TruthRoom* room = truth.room(best->first, best->second);
  return room ? room->bed_type : std::nullopt;
}

PropertyEvaluation evaluate_property(const GroupingOutput& prediction, const GroundTruth& truth) {
  if (prediction.property_id != truth.property_id)
    fail(ErrorKind::MissingTruth, "truth is for property '" + truth.property_id +
                                      "', prediction is for '" + prediction.property_id + "'");
  PropertyEvaluation eval;
  eval.property_id = prediction.property_id;
  eval.bedrooms = truth.room_count("bedroom");

  LabelIndex truth_ids;
  LabelIndex pred_ids;
  LabelVector all_truth;
  LabelVector all_pred;

  for (const auto& [room_type, groups] : prediction.room_types) {
    LabelVector t;
    LabelVector p;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& group = groups[g];
      for (const auto& id : group.image_ids) {
        const TruthImage* image = truth.find(id);
        if (image == nullptr)
          fail(ErrorKind::MissingTruth, "no ground truth for image '" + id + "' of property '" +
                                            prediction.property_id + "'");
        const std::string key = room_key(*image);
        t.push_back(truth_ids(key));
        p.push_back(static_cast<int>(g));
        all_truth.push_back(t.back());
        all_pred.push_back(pred_ids(room_type + "#" + std::to_string(g)));
      }

      if (room_type == "bedroom" && !group.image_ids.empty()) {
        if (group.bed_type != majority_bed_type(group.image_ids, truth)) eval.beds_correct = false;
      }
    }

    RoomTypeScores scores;
    scores.images = t.size();
    scores.partition_correct = same_partition(t, p);
    if (t.size() >= 2) {
      scores.ari = adjusted_rand_index(t, p);
      scores.ari_normalized = (*scores.ari + 1.0) / 2.0;
      scores.vm = v_measure(t, p);
    }
    eval.room_types[room_type] = scores;
  }
  eval.partition_correct = same_partition(all_truth, all_pred);
  return eval;
}

double property_accuracy(std::span<const GroupingOutput> predictions,
                         std::span<const GroundTruth> truths) {
  if (predictions.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& prediction : predictions) {
    auto it = std::find_if(truths.begin(), truths.end(), [&](const GroundTruth& t) {
      return t.property_id == prediction.property_id;
    });
    if (it == truths.end())
      fail(ErrorKind::MissingTruth, "no ground truth for property '" + prediction.property_id + "'");
    if (evaluate_property(prediction, *it).correct()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::string bedroom_bucket(std::size_t bedrooms) {
  if (bedrooms > 4) return ">4";
  return std::to_string(bedrooms);
}

MetricReport evaluate(std::span<const GroupingOutput> predictions,
                      std::span<const GroundTruth> truths) {
  MetricReport report;
  for (const auto& prediction : predictions) {
    auto it = std::find_if(truths.begin(), truths.end(), [&](const GroundTruth& t) {
      return t.property_id == prediction.property_id;
    });
    if (it == truths.end())
      fail(ErrorKind::MissingTruth, "no ground truth for property '" + prediction.property_id + "'");
    report.properties.push_back(evaluate_property(prediction, *it));
  }

  struct Acc {
    std::size_t properties = 0;
    std::size_t scored = 0;
    std::size_t correct = 0;
    double ari = 0, ari_n = 0, h = 0, c = 0, v = 0;
  };
  auto add = [](Acc& acc, const PropertyEvaluation& e) {
    ++acc.properties;
    if (e.correct()) ++acc.correct;
    auto it = e.room_types.find("bedroom");
    if (it == e.room_types.end() || !it->second.ari) return;
    ++acc.scored;
    acc.ari += *it->second.ari;
    acc.ari_n += *it->second.ari_normalized;
    acc.h += it->second.vm->homogeneity;
    acc.c += it->second.vm->completeness;
    acc.v += it->second.vm->v;
  };
  auto finish = [](const std::string& name, const Acc& acc) {
    BucketSummary s;
    s.bucket = name;
    s.properties = acc.properties;
    if (acc.scored > 0) {
      const double d = static_cast<double>(acc.scored);
      s.ari = acc.ari / d;
      s.ari_normalized = acc.ari_n / d;
      s.homogeneity = acc.h / d;
      s.completeness = acc.c / d;
      s.v_measure = acc.v / d;
    }
    if (acc.properties > 0)
      s.accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.properties);
    return s;
  };

  std::map<std::size_t, Acc> by_bucket;  // ">4" stored under 5
  Acc overall;
  for (const auto& e : report.properties) {
    add(by_bucket[std::min<std::size_t>(e.bedrooms, 5)], e);
    add(overall, e);
  }
  for (const auto& [b, acc] : by_bucket) report.buckets.push_back(finish(bedroom_bucket(b), acc));
  report.overall = finish("all", overall);
  return report;
}

std::string serialize_report(const MetricReport& report) {
  auto summary = [](const BucketSummary& s) {
    return json{{"bucket", s.bucket},
                {"properties", s.properties},
                {"ari", s.ari},
                {"ari_normalized", s.ari_normalized},
                {"homogeneity", s.homogeneity},
                {"completeness", s.completeness},
                {"v_measure", s.v_measure},
                {"accuracy", s.accuracy}};
  };
  json rows = json::array();
  for (const auto& e : report.properties) {
    json rooms = json::object();
    for (const auto& [room, s] : e.room_types) {
      json r{{"images", s.images}, {"partition_correct", s.partition_correct}};
      r["ari"] = s.ari ? json(*s.ari) : json(nullptr);
      r["ari_normalized"] = s.ari_normalized ? json(*s.ari_normalized) : json(nullptr);
      r["homogeneity"] = s.vm ? json(s.vm->homogeneity) : json(nullptr);
      r["completeness"] = s.vm ? json(s.vm->completeness) : json(nullptr);
      r["v_measure"] = s.vm ? json(s.vm->v) : json(nullptr);
      rooms[room] = std::move(r);
    }
    rows.push_back({{"property_id", e.property_id},
                    {"bedrooms", e.bedrooms},
                    {"partition_correct", e.partition_correct},
                    {"beds_correct", e.beds_correct},
                    {"correct", e.correct()},
                    {"room_types", std::move(rooms)}});
  }
  json buckets = json::array();
  for (const auto& b : report.buckets) buckets.push_back(summary(b));
  json doc{{"properties", rows}, {"by_bedrooms", buckets}, {"overall", summary(report.overall)}};
  return doc.dump(2) + "\n";
}

}  // namespace roomgroup
