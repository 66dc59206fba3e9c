#include "smlab/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace smlab::cli {

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");
  for (const auto& [key, value] : doc.items())
    if (key != "experiment" && key != "seed" && key != "params" && key != "out_dir")
      throw ConfigError(source + ": unknown key '" + key + "'");

  ExperimentConfig cfg;
  if (!doc.contains("experiment")) throw ConfigError(source + ": missing key 'experiment'");
  if (!doc["experiment"].is_string()) throw ConfigError(source + ": key 'experiment' must be a string");
  cfg.experiment = doc["experiment"].get<std::string>();

  if (!doc.contains("seed")) throw ConfigError(source + ": missing key 'seed'");
  const Json& seed = doc["seed"];
  if (seed.is_number_unsigned())
    cfg.seed = seed.get<std::uint64_t>();
  else if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0)
    cfg.seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
  else
    throw ConfigError(source + ": key 'seed' must be a non-negative integer");

  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ConfigError(source + ": key 'params' must be an object");
    cfg.params = doc["params"];
  }
  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string()) throw ConfigError(source + ": key 'out_dir' must be a string");
    cfg.out_dir = doc["out_dir"].get<std::string>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

Params::Params(Json params, std::string experiment) : params_(std::move(params)), experiment_(std::move(experiment)) {
  if (!params_.is_object()) throw ConfigError("params must be an object");
}

const Json* Params::lookup(const std::string& key) {
  seen_.insert(key);
  const auto it = params_.find(key);
  return it == params_.end() ? nullptr : &*it;
}

void Params::bad(const std::string& key, const std::string& what) const {
  throw ConfigError("params." + key + " (" + experiment_ + "): " + what);
}

double Params::number(const std::string& key, double fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_number()) bad(key, "expected a number");
  return v->get<double>();
}

std::uint64_t Params::count(const std::string& key, std::uint64_t fallback, std::uint64_t min, std::uint64_t max) {
  const Json* v = lookup(key);
  std::uint64_t out = fallback;
  if (v) {
    if (v->is_number_unsigned()) {
      out = v->get<std::uint64_t>();
    } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
      out = static_cast<std::uint64_t>(v->get<std::int64_t>());
    } else if (v->is_number_float() && v->get<double>() >= 0 && v->get<double>() == std::floor(v->get<double>()) &&
               v->get<double>() < 1.8e19) {
      out = static_cast<std::uint64_t>(v->get<double>());  // accepts 1e5
    } else {
      bad(key, "expected a non-negative integer");
    }
  }
  if (out < min || out > max)
    bad(key, "must be in [" + std::to_string(min) + ", " + std::to_string(max) + "], got " + std::to_string(out));
  return out;
}

bool Params::flag(const std::string& key, bool fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad(key, "expected true or false");
  return v->get<bool>();
}

std::string Params::text(const std::string& key, const std::string& fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_string()) bad(key, "expected a string");
  return v->get<std::string>();
}

std::vector<double> Params::numbers(const std::string& key, const std::vector<double>& fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) bad(key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> Params::texts(const std::string& key, const std::vector<std::string>& fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_array()) bad(key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : *v) {
    if (!x.is_string()) bad(key, "expected an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

void Params::finish() const {
  for (const auto& [key, value] : params_.items())
    if (!seen_.contains(key)) throw ConfigError("params." + key + ": unknown key for experiment " + experiment_);
}

}  // namespace smlab::cli
