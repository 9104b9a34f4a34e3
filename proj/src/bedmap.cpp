#include "roomgroup/bedmap.hpp"

#include <algorithm>

#include "roomgroup/catalog.hpp"
#include "roomgroup/errors.hpp"
#include "roomgroup/rng.hpp"

namespace roomgroup {

BedInventory BedInventory::from_list(const std::vector<std::string>& bed_types) {
  if (bed_types.empty()) fail(ErrorKind::EmptyInventory, "bed type list is empty");
  BedInventory inv;
  for (const auto& raw : bed_types) {
    const std::string key = canonical_text(raw);
    if (key.empty()) fail(ErrorKind::EmptyInventory, "bed type list contains an empty entry");
    auto it = std::find_if(inv.entries_.begin(), inv.entries_.end(),
                           [&](const auto& e) { return e.first == key; });
    if (it == inv.entries_.end())
      inv.entries_.emplace_back(key, 1);
    else
      ++it->second;
  }
  return inv;
}

std::vector<std::string> BedInventory::options() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [key, count] : entries_) out.push_back(key);
  return out;
}

int BedInventory::count(const std::string& bed_type) const {
  for (const auto& [key, count] : entries_)
    if (key == bed_type) return count;
  return 0;
}

int BedInventory::total() const {
  int sum = 0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

void BedInventory::take(const std::string& bed_type) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == bed_type; });
  if (it == entries_.end())
    fail(ErrorKind::PredictorViolation, "bed type '" + bed_type + "' is not in the inventory");
  if (--it->second == 0) entries_.erase(it);
}

OracleFromTruth::OracleFromTruth(std::map<std::string, std::string> truth) {
  for (auto& [group, bed] : truth) truth_.emplace(group, canonical_text(bed));
}

std::string OracleFromTruth::predict(const PredictionRequest& request) {
  auto it = truth_.find(request.group_id);
  if (it != truth_.end() &&
      std::find(request.options.begin(), request.options.end(), it->second) != request.options.end())
    return it->second;
  return request.options.front();
}

std::string FirstOption::predict(const PredictionRequest& request) {
  return request.options.front();
}

ErrorInjectingPredictor::ErrorInjectingPredictor(PredictorBackend& inner, double error_rate,
                                                 std::uint64_t seed)
    : inner_(inner), error_rate_(error_rate), seed_(seed) {}

std::string ErrorInjectingPredictor::predict(const PredictionRequest& request) {
  std::string answer = inner_.predict(request);
  if (request.options.size() < 2) return answer;
  // Seeded per group so the injected error does not depend on call order.
  std::uint64_t h = seed_;
  for (char c : request.group_id) h = mix_seed(h, static_cast<unsigned char>(c));
  Rng rng(h);
  if (rng.uniform() >= error_rate_) return answer;
  std::vector<std::string> others;
  for (const auto& o : request.options)
    if (o != answer) others.push_back(o);
  if (others.empty()) return answer;
  return others[rng.below(others.size())];
}

BedAssignment map_spaces(std::span<const BedGroup> groups, BedInventory inventory,
                         PredictorBackend& predictor) {
  BedAssignment out;
  for (const auto& group : groups) {
    if (group.image_ids.empty())
      fail(ErrorKind::SchemaViolation, "group '" + group.group_id + "' has no images");
    if (inventory.empty())
      fail(ErrorKind::InventoryExhausted,
           "no bed types left for group '" + group.group_id + "' (more bedroom groups than beds)");

    MappingStep step;
    step.group_id = group.group_id;
    step.options = inventory.options();
    if (step.options.size() == 1) {
      step.choice = step.options.front();
      step.forced = true;
    } else {
      PredictionRequest request{group.group_id, group.image_ids, group.image_uris, step.options};
      step.choice = canonical_text(predictor.predict(request));
      if (std::find(step.options.begin(), step.options.end(), step.choice) == step.options.end())
        fail(ErrorKind::PredictorViolation, "predictor answered '" + step.choice + "' for group '" +
                                                group.group_id + "', which is not an offered option");
    }
    inventory.take(step.choice);
    out.assignments.emplace_back(group.group_id, step.choice);
    out.trace.push_back(std::move(step));
  }
  out.leftover = inventory.entries();
  return out;
}

}  // namespace roomgroup
