#include "slag/report.hpp"

#include "slag/errors.hpp"

namespace slag {

void VerificationReport::check(const std::string& name, bool ok, Json value, Json threshold) {
  Json entry = {{"name", name}, {"pass", ok}};
  if (!value.is_null()) entry["value"] = std::move(value);
  if (!threshold.is_null()) entry["threshold"] = std::move(threshold);
  checks.push_back(std::move(entry));
}

bool VerificationReport::pass() const {
  for (const auto& c : checks)
    if (!c.at("pass").get<bool>()) return false;
  return true;
}

std::vector<std::string> VerificationReport::failed_checks() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.at("pass").get<bool>()) out.push_back(c.at("name").get<std::string>());
  return out;
}

void VerificationReport::absorb(const VerificationReport& other, const std::string& prefix) {
  for (auto c : other.checks) {
    c["name"] = prefix + "." + c["name"].get<std::string>();
    checks.push_back(std::move(c));
  }
  if (!other.fitted.empty()) fitted[prefix] = other.fitted;
  if (!other.margins.empty()) margins[prefix] = other.margins;
}

Json VerificationReport::to_json() const {
  return {{"property", property}, {"pass", pass()}, {"samples", samples},
          {"fitted", fitted},     {"margins", margins}, {"checks", checks}};
}

VerificationReport VerificationReport::from_json(const Json& doc) {
  try {
    VerificationReport r(doc.at("property").get<std::string>());
    r.samples = doc.value("samples", Json::object());
    r.fitted = doc.value("fitted", Json::object());
    r.margins = doc.value("margins", Json::object());
    r.checks = doc.value("checks", Json::array());
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw ParameterError(std::string("malformed report: ") + ex.what());
  }
}

}  // namespace slag
