#pragma once

#include <string>
#include <vector>

namespace roomgroup {

struct Diagnostic {
  std::string level;  // "warning" or "error"
  std::string code;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// Collects warnings produced while processing one property. Not thread-safe;
/// each worker owns its own instance.
class Diagnostics {
 public:
  void warn(std::string code, std::string message) {
    records_.push_back({"warning", std::move(code), std::move(message)});
  }
  void error(std::string code, std::string message) {
    records_.push_back({"error", std::move(code), std::move(message)});
  }
  void append(const Diagnostics& other) {
    records_.insert(records_.end(), other.records_.begin(), other.records_.end());
  }

  const std::vector<Diagnostic>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<Diagnostic> records_;
};

/// One JSON object per line: {"code":..,"level":..,"message":..}
std::string to_json_line(const Diagnostic& d);

}  // namespace roomgroup
