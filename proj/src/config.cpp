#include "dampwave/config.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

namespace dampwave {

using nlohmann::json;

json default_config_json() {
  return json{
      {"seed", nullptr},
      {"basis", {{"length", std::numbers::pi}, {"modes", 8}, {"grid", 64}}},
      {"damped", {{"c", 0.5}, {"k", 1}, {"lambda", nullptr}, {"alpha", 0.5}}},
      {"nonlinearity",
       {{"family", "ARCTAN"},
        {"a", 1.0},
        {"b", 1.0},
        {"e", 0.1},
        {"period", 1.0},
        {"y0", json::array()},
        {"table_s", json::array()},
        {"table_f", json::array()}}},
      {"integrator",
       {{"scheme", "EXP_MIDPOINT"}, {"h", 1.0 / 256.0}, {"tol", 1e-8}, {"max_halvings", 6}, {"error_control", true}}},
      {"checks",
       {{"ll_samples", 200}, {"sr_samples", 2000}, {"g_samples", 2000}, {"R_ladder", default_R_ladder()}}},
      {"degree", {{"N_ladder", {4, 8, 16}}, {"newton_starts", 64}, {"g_samples", 400}}},
      {"simulate", {{"t_end", 1.0}, {"initial_a", json::array()}, {"initial_b", json::array()}}},
      {"averaging",
       {{"field", "ALL"},
        {"period", 1.0},
        {"box_half_width", 2.0},
        {"mu_ladder", default_mu_ladder()},
        {"rk4_steps", 400}}},
      {"nonexistence", {{"periods", 10}, {"search_radius", 1000.0}}},
      {"output", {{"dir", "out"}}},
  };
}

namespace {

void reject_unknown(const json& doc, const json& schema, const std::string& prefix) {
  if (!doc.is_object()) throw ConfigError("config section '" + (prefix.empty() ? "<root>" : prefix) + "' must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    if (schema.at(it.key()).is_object()) reject_unknown(it.value(), schema.at(it.key()), path);
  }
}

void apply_override(json& doc, const json& schema, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + spec + "' is not key=value");
  const std::string key = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  const json* sch = &schema;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!sch->is_object() || !sch->contains(parts[i])) throw ConfigError("unknown override key '" + key + "'");
    sch = &sch->at(parts[i]);
    if (i + 1 == parts.size()) {
      (*node)[parts[i]] = value;
    } else {
      if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
  }
}

template <class T>
T get(const json& doc, const std::string& section, const std::string& key) {
  const json& v = doc.at(section).at(key);
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

ScenarioConfig parse_config(const json& user, const std::vector<std::string>& overrides) {
  const json schema = default_config_json();
  reject_unknown(user, schema, "");
  json doc = user;
  for (const std::string& o : overrides) apply_override(doc, schema, o);
  reject_unknown(doc, schema, "");
  if (!doc.contains("seed") || doc.at("seed").is_null()) throw ConfigError("config key 'seed' is mandatory");
  json merged = schema;
  merged.merge_patch(doc);
  // merge_patch drops keys set to null; restore the nullable ones.
  for (const char* key : {"k", "lambda"}) {
    if (!merged["damped"].contains(key)) merged["damped"][key] = nullptr;
  }
  if (doc.contains("damped") && doc["damped"].contains("lambda") && !doc["damped"]["lambda"].is_null() &&
      !(doc["damped"].contains("k"))) {
    merged["damped"]["k"] = nullptr;  // giving lambda alone selects the non-resonant case
  }

  ScenarioConfig cfg;
  const json& seed = merged.at("seed");
  require(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<long long>() >= 0),
          "config key 'seed' must be a non-negative integer");
  cfg.seed = seed.get<std::uint64_t>();

  cfg.basis.length = get<double>(merged, "basis", "length");
  cfg.basis.modes = get<int>(merged, "basis", "modes");
  cfg.basis.grid = get<int>(merged, "basis", "grid");
  require(cfg.basis.length > 0.0, "basis.length must be positive");
  require(cfg.basis.modes >= 1, "basis.modes must be at least 1");
  require(cfg.basis.grid >= 4 * cfg.basis.modes, "basis.grid must be at least 4 * basis.modes");

  cfg.damped.c = get<double>(merged, "damped", "c");
  cfg.damped.alpha = get<double>(merged, "damped", "alpha");
  const json& k = merged["damped"]["k"];
  const json& lam = merged["damped"]["lambda"];
  require(k.is_null() != lam.is_null(), "set exactly one of damped.k and damped.lambda");
  if (!k.is_null()) {
    cfg.damped.k = get<int>(merged, "damped", "k");
    cfg.damped.lambda.reset();
    require(*cfg.damped.k >= 1 && *cfg.damped.k <= cfg.basis.modes, "damped.k must lie in 1..basis.modes");
  } else {
    cfg.damped.k.reset();
    cfg.damped.lambda = get<double>(merged, "damped", "lambda");
  }
  require(cfg.damped.c > 0.0, "damped.c must be positive");
  require(cfg.damped.alpha > 0.0 && cfg.damped.alpha < 1.0, "damped.alpha must lie in (0,1)");

  NonlinearitySpec& f = cfg.nonlinearity;
  f.family = family_from_string(get<std::string>(merged, "nonlinearity", "family"));
  f.a = get<double>(merged, "nonlinearity", "a");
  f.b = get<double>(merged, "nonlinearity", "b");
  f.e = get<double>(merged, "nonlinearity", "e");
  f.period = get<double>(merged, "nonlinearity", "period");
  const auto y0 = get<std::vector<double>>(merged, "nonlinearity", "y0");
  f.table_s = get<std::vector<double>>(merged, "nonlinearity", "table_s");
  f.table_f = get<std::vector<double>>(merged, "nonlinearity", "table_f");
  if (f.family == Family::KernelConst) {
    f.length = cfg.basis.length;
    if (y0.empty()) {
      require(cfg.damped.k.has_value(), "KERNEL_CONST without y0 needs damped.k");
      f.y0 = CoeffVec::Zero(*cfg.damped.k);
      f.y0(*cfg.damped.k - 1) = 1.0;
    } else {
      f.y0 = Eigen::Map<const CoeffVec>(y0.data(), static_cast<Eigen::Index>(y0.size()));
    }
  }
  f.validate();

  IntegratorSettings& s = cfg.integrator;
  s.scheme = scheme_from_string(get<std::string>(merged, "integrator", "scheme"));
  s.h = get<double>(merged, "integrator", "h");
  s.tol = get<double>(merged, "integrator", "tol");
  s.max_halvings = get<int>(merged, "integrator", "max_halvings");
  s.error_control = get<bool>(merged, "integrator", "error_control");
  s.validate(f.period);

  cfg.checks.ll_samples = get<int>(merged, "checks", "ll_samples");
  cfg.checks.sr_samples = get<int>(merged, "checks", "sr_samples");
  cfg.checks.g_samples = get<int>(merged, "checks", "g_samples");
  cfg.checks.R_ladder = get<std::vector<double>>(merged, "checks", "R_ladder");
  require(cfg.checks.ll_samples >= 2 && cfg.checks.sr_samples >= 1 && cfg.checks.g_samples >= 1,
          "checks sample counts must be positive");
  require(!cfg.checks.R_ladder.empty(), "checks.R_ladder must not be empty");
  for (std::size_t i = 0; i < cfg.checks.R_ladder.size(); ++i) {
    require(cfg.checks.R_ladder[i] > 0.0 && (i == 0 || cfg.checks.R_ladder[i] > cfg.checks.R_ladder[i - 1]),
            "checks.R_ladder must be positive and increasing");
  }

  cfg.degree.N_ladder = get<std::vector<int>>(merged, "degree", "N_ladder");
  cfg.degree.newton_starts = get<int>(merged, "degree", "newton_starts");
  cfg.degree.g_samples = get<int>(merged, "degree", "g_samples");
  require(!cfg.degree.N_ladder.empty(), "degree.N_ladder must not be empty");
  for (std::size_t i = 0; i < cfg.degree.N_ladder.size(); ++i) {
    require(cfg.degree.N_ladder[i] >= 1 && (i == 0 || cfg.degree.N_ladder[i] > cfg.degree.N_ladder[i - 1]),
            "degree.N_ladder must be positive and increasing");
    if (cfg.damped.k) require(*cfg.damped.k <= cfg.degree.N_ladder[i], "degree.N_ladder entries must be >= damped.k");
  }
  require(cfg.degree.newton_starts >= 0 && cfg.degree.g_samples >= 1, "degree counts must be positive");

  cfg.simulate.t_end = get<double>(merged, "simulate", "t_end");
  cfg.simulate.initial_a = get<std::vector<double>>(merged, "simulate", "initial_a");
  cfg.simulate.initial_b = get<std::vector<double>>(merged, "simulate", "initial_b");
  require(cfg.simulate.t_end > 0.0, "simulate.t_end must be positive");
  require(static_cast<int>(cfg.simulate.initial_a.size()) <= cfg.basis.modes &&
              static_cast<int>(cfg.simulate.initial_b.size()) <= cfg.basis.modes,
          "simulate initial vectors longer than basis.modes");

  cfg.averaging.field = get<std::string>(merged, "averaging", "field");
  cfg.averaging.period = get<double>(merged, "averaging", "period");
  cfg.averaging.box_half_width = get<double>(merged, "averaging", "box_half_width");
  cfg.averaging.mu_ladder = get<std::vector<double>>(merged, "averaging", "mu_ladder");
  cfg.averaging.rk4_steps = get<int>(merged, "averaging", "rk4_steps");
  const std::string& fld = cfg.averaging.field;
  require(fld == "ALL" || fld == "LINEAR_SINK" || fld == "ROTATION_SINK" || fld == "SQUARE",
          "averaging.field must be LINEAR_SINK, ROTATION_SINK, SQUARE or ALL");
  require(cfg.averaging.period > 0.0 && cfg.averaging.box_half_width > 0.0 && cfg.averaging.rk4_steps >= 1,
          "averaging period, box and steps must be positive");
  require(!cfg.averaging.mu_ladder.empty(), "averaging.mu_ladder must not be empty");
  for (double mu : cfg.averaging.mu_ladder) require(mu > 0.0 && mu <= 1.0, "averaging.mu_ladder entries lie in (0,1]");

  cfg.nonexistence.periods = get<int>(merged, "nonexistence", "periods");
  cfg.nonexistence.search_radius = get<double>(merged, "nonexistence", "search_radius");
  require(cfg.nonexistence.periods >= 1 && cfg.nonexistence.search_radius > 0.0,
          "nonexistence periods and radius must be positive");

  cfg.output_dir = get<std::string>(merged, "output", "dir");
  return cfg;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, overrides);
}

BasisPtr ScenarioConfig::make_basis() const { return build_dirichlet_laplacian(basis.length, basis.modes, basis.grid); }

DampedConfig ScenarioConfig::make_damped(BasisPtr b) const {
  if (damped.k) return DampedConfig::resonant(std::move(b), damped.c, *damped.k, damped.alpha);
  return DampedConfig::nonresonant(std::move(b), damped.c, *damped.lambda, damped.alpha);
}

DegreeSetup ScenarioConfig::make_degree_setup() const {
  DegreeSetup s;
  s.length = basis.length;
  s.grid = basis.grid;
  s.c = damped.c;
  s.k = damped.k;
  s.lambda = damped.lambda.value_or(0.0);
  s.alpha = damped.alpha;
  s.f = nonlinearity;
  s.integrator = integrator;
  s.newton.starts = degree.newton_starts;
  s.g_samples = degree.g_samples;
  s.seed = seed;
  s.R_ladder = checks.R_ladder;
  return s;
}

}  // namespace dampwave
