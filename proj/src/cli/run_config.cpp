#include "fingat/cli/run_config.hpp"

#include <cmath>
#include <fstream>

#include "fingat/errors.hpp"

namespace fingat::cli {

using nlohmann::json;

data::InstanceOptions RunConfig::instance_options() const {
  data::InstanceOptions o;
  o.weeks = model.weeks;
  o.days_per_week = model.days_per_week;
  o.features = features;
  o.calendar_coverage = calendar_coverage;
  return o;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (ks.empty()) throw ConfigError("ks must not be empty");
  for (auto k : ks)
    if (k == 0) throw ConfigError("every K must be at least 1");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (!(calendar_coverage > 0.0 && calendar_coverage <= 1.0)) throw ConfigError("calendar_coverage must lie in (0, 1]");
  double sum = 0.0;
  for (double r : split) {
    if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (model.feature_dim != data::feature_dim(features.set)) {
    throw ConfigError("model.feature_dim " + std::to_string(model.feature_dim) + " does not match feature set " +
                      data::to_string(features.set));
  }
}

json to_json(const RunConfig& c) {
  return json{{"paths",
               {{"prices", c.prices.string()},
                {"sectors", c.sectors.string()},
                {"cache", c.cache.string()},
                {"runs", c.runs.string()}}},
              {"run_id", c.run_id},
              {"data",
               {{"features", data::to_string(c.features.set)},
                {"ma_literal", c.features.ma_literal},
                {"calendar_coverage", c.calendar_coverage},
                {"split", c.split}}},
              {"model", c.model},
              {"train", c.train},
              {"ks", c.ks},
              {"seeds", c.seeds}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      c.prices = p.value("prices", c.prices.string());
      c.sectors = p.value("sectors", c.sectors.string());
      c.cache = p.value("cache", c.cache.string());
      c.runs = p.value("runs", c.runs.string());
    }
    c.run_id = j.value("run_id", c.run_id);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("features")) c.features.set = data::feature_set_from_string(d.at("features").get<std::string>());
      c.features.ma_literal = d.value("ma_literal", c.features.ma_literal);
      c.calendar_coverage = d.value("calendar_coverage", c.calendar_coverage);
      c.split = d.value("split", c.split);
    }
    c.model.feature_dim = data::feature_dim(c.features.set);
    if (j.contains("model")) j.at("model").get_to(c.model);
    if (j.contains("train")) j.at("train").get_to(c.train);
    c.ks = j.value("ks", c.ks);
    c.seeds = j.value("seeds", c.seeds);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config " + path.string() + " is not a JSON object");
  return j;
}

RunConfig resolve_paths(RunConfig c, const std::filesystem::path& base) {
  auto fix = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  fix(c.prices);
  fix(c.sectors);
  fix(c.cache);
  fix(c.runs);
  return c;
}

}  // namespace fingat::cli
