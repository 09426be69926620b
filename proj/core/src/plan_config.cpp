#include "welfare/plan_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace welfare {

namespace {

using nlohmann::json;

const std::set<std::string> kTopKeys = {"name", "algorithm", "environment", "horizons", "replications",
                                        "seed", "checkpoints_per_decade", "output"};
const std::set<std::string> kAlgorithmKeys = {"id", "K", "gamma", "eta", "lambda", "wage_grid", "omega", "wage"};
const std::set<std::string> kWageKeys = {"kind", "w", "values"};
const std::set<std::string> kEnvironmentKeys = {"kind",   "epsilon", "epsilon_exponent", "lambda",
                                                "support", "values", "path",             "freeze"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  if (!obj.is_object()) throw ConfigError("field '" + prefix + "': expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown field '" + (prefix.empty() ? key : prefix + "." + key) + "'");
    }
  }
}

template <class T>
T field(const json& obj, const std::string& key, const std::string& path, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + path + "': wrong type (" + obj.at(key).dump() + ")");
  }
}

template <class T>
T required(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError("missing required field '" + path + "'");
  return field<T>(obj, key, path, T{});
}

json parse_value(const std::string& key, const std::string& text) {
  if ((key == "horizons" || key == "T") && !text.empty() && text.front() != '[') {
    return json::parse("[" + text + "]", nullptr, false);
  }
  auto v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = parse_value(key, text);
  if (value.is_discarded()) throw ConfigError("override '" + assignment + "': cannot parse value");
  if (key == "T") key = "horizons";

  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override '" + key + "': '" + path[i] + "' is not an object");
    node = &(*node)[path[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + key + "': parent is not an object");
  (*node)[path.back()] = std::move(value);
}

ExperimentPlan from_json(const json& doc) {
  reject_unknown(doc, kTopKeys, "");
  ExperimentPlan plan;
  plan.name = field<std::string>(doc, "name", "name", plan.name);
  plan.replications = field<std::uint64_t>(doc, "replications", "replications", plan.replications);
  plan.seed = field<std::uint64_t>(doc, "seed", "seed", plan.seed);
  plan.checkpoints_per_decade =
      field<std::size_t>(doc, "checkpoints_per_decade", "checkpoints_per_decade", plan.checkpoints_per_decade);
  plan.output = field<std::string>(doc, "output", "output", plan.output);
  plan.horizons = required<std::vector<std::uint64_t>>(doc, "horizons", "horizons");

  if (!doc.contains("algorithm")) throw ConfigError("missing required field 'algorithm'");
  const json& a = doc.at("algorithm");
  reject_unknown(a, kAlgorithmKeys, "algorithm");
  auto& alg = plan.algorithm;
  try {
    alg.id = algorithm_from_string(required<std::string>(a, "id", "algorithm.id"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field 'algorithm.id': ") + e.what());
  }
  alg.lambda = required<double>(a, "lambda", "algorithm.lambda");
  alg.K = field<std::size_t>(a, "K", "algorithm.K", alg.K);
  alg.gamma = field<double>(a, "gamma", "algorithm.gamma", alg.gamma);
  alg.eta = field<double>(a, "eta", "algorithm.eta", alg.eta);
  alg.wage_grid = field<std::vector<double>>(a, "wage_grid", "algorithm.wage_grid", alg.wage_grid);
  alg.omega = field<std::vector<double>>(a, "omega", "algorithm.omega", std::vector<double>(alg.wage_grid.size(), alg.lambda));
  if (a.contains("wage")) {
    const json& w = a.at("wage");
    reject_unknown(w, kWageKeys, "algorithm.wage");
    alg.wage.kind = field<std::string>(w, "kind", "algorithm.wage.kind", alg.wage.kind);
    alg.wage.w = field<double>(w, "w", "algorithm.wage.w", alg.wage.w);
    alg.wage.values = field<std::vector<double>>(w, "values", "algorithm.wage.values", {});
  }

  if (!doc.contains("environment")) throw ConfigError("missing required field 'environment'");
  const json& e = doc.at("environment");
  reject_unknown(e, kEnvironmentKeys, "environment");
  auto& env = plan.environment;
  env.kind = required<std::string>(e, "kind", "environment.kind");
  env.epsilon = field<double>(e, "epsilon", "environment.epsilon", env.epsilon);
  env.epsilon_exponent = field<double>(e, "epsilon_exponent", "environment.epsilon_exponent", env.epsilon_exponent);
  if (e.contains("lambda")) env.lambda = field<double>(e, "lambda", "environment.lambda", 0.0);
  env.values = field<std::vector<double>>(e, "values", "environment.values", {});
  env.path = field<std::string>(e, "path", "environment.path", "");
  env.freeze = field<bool>(e, "freeze", "environment.freeze", false);
  if (e.contains("support")) {
    const auto pairs = field<std::vector<std::vector<double>>>(e, "support", "environment.support", {});
    for (const auto& p : pairs) {
      if (p.size() != 2) throw ConfigError("field 'environment.support': entries must be [value, mass] pairs");
      env.support.push_back({p[0], p[1]});
    }
  }

  try {
    plan.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }
  return plan;
}

ExperimentPlan build(json doc, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) apply_override(doc, o);
  return from_json(doc);
}

}  // namespace

ExperimentPlan parse_plan(const std::string& json_text, const std::vector<std::string>& overrides,
                          const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  try {
    return build(std::move(doc), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

ExperimentPlan load_plan(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str(), overrides, path);
}

ExperimentPlan plan_from_overrides(const std::vector<std::string>& overrides) {
  try {
    return build(json::object(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("<overrides>: ") + e.what());
  }
}

}  // namespace welfare
