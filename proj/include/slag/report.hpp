#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace slag {

using Json = nlohmann::ordered_json;

/// Outcome of one property check: what was sampled, what was fitted, and which
/// named gates passed. Serialises deterministically (insertion-ordered keys).
struct VerificationReport {
  std::string property;
  Json samples = Json::object();
  Json fitted = Json::object();
  Json margins = Json::object();
  Json checks = Json::array();

  VerificationReport() = default;
  explicit VerificationReport(std::string id) : property(std::move(id)) {}

  /// Records a gate; `value` and `threshold` are informational.
  void check(const std::string& name, bool ok, Json value = nullptr, Json threshold = nullptr);
  bool pass() const;
  std::vector<std::string> failed_checks() const;
  /// Folds another report's gates in under a name prefix.
  void absorb(const VerificationReport& other, const std::string& prefix);

  Json to_json() const;
  static VerificationReport from_json(const Json& doc);
};

}  // namespace slag
