#include "smlab/cli/summary.hpp"

#include <cmath>
#include <fstream>
#include <system_error>

namespace smlab::cli {

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::le: return "<=";
    case Relation::lt: return "<";
    case Relation::ge: return ">=";
    case Relation::gt: return ">";
  }
  return "?";
}

namespace {

Relation parse_relation(const std::string& s) {
  if (s == "<=") return Relation::le;
  if (s == "<") return Relation::lt;
  if (s == ">=") return Relation::ge;
  if (s == ">") return Relation::gt;
  throw ConfigError("unknown relation '" + s + "'");
}

// JSON has no NaN or infinity; such values are written as null.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  if (j.is_null()) return std::nan("");
  if (!j.is_number()) throw ConfigError("expected a number");
  return j.get<double>();
}

}  // namespace

Check make_check(std::string name, double value, Relation relation, double tolerance) {
  bool ok = false;
  if (std::isfinite(value) || std::isinf(value)) {
    switch (relation) {
      case Relation::le: ok = value <= tolerance; break;
      case Relation::lt: ok = value < tolerance; break;
      case Relation::ge: ok = value >= tolerance; break;
      case Relation::gt: ok = value > tolerance; break;
    }
  }
  return {std::move(name), ok, value, tolerance, relation};
}

bool RunSummary::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Json to_json(const RunSummary& s) {
  Json j;
  j["experiment"] = s.experiment;
  j["seed"] = s.seed;
  j["wall_time_s"] = s.wall_time_s;
  Json metrics = Json::object();
  for (const auto& [k, v] : s.metrics) metrics[k] = number_or_null(v);
  j["metrics"] = metrics;
  Json checks = Json::array();
  for (const auto& c : s.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", number_or_null(c.value)},
                      {"tolerance", number_or_null(c.tolerance)},
                      {"relation", std::string(to_string(c.relation))}});
  j["checks"] = checks;
  j["residuals"] = s.residuals;
  j["born"] = s.born;
  j["all_passed"] = s.all_passed();
  return j;
}

RunSummary summary_from_json(const Json& j) {
  try {
    RunSummary s;
    s.experiment = j.at("experiment").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.wall_time_s = number_from(j.at("wall_time_s"));
    for (const auto& [k, v] : j.at("metrics").items()) s.metrics[k] = number_from(v);
    if (!j.at("checks").is_array()) throw ConfigError("checks must be an array");
    for (const auto& c : j.at("checks")) {
      Check ch;
      ch.name = c.at("name").get<std::string>();
      ch.passed = c.at("passed").get<bool>();
      ch.value = number_from(c.at("value"));
      ch.tolerance = number_from(c.at("tolerance"));
      ch.relation = parse_relation(c.at("relation").get<std::string>());
      s.checks.push_back(std::move(ch));
    }
    s.residuals = j.value("residuals", Json::object());
    s.born = j.value("born", Json::object());
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed summary: ") + e.what());
  }
}

void write_summary(const RunSummary& s, const std::filesystem::path& dir) {
  const auto final_path = dir / "summary.json";
  const auto tmp = dir / "summary.json.tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << to_json(s).dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
}

}  // namespace smlab::cli
