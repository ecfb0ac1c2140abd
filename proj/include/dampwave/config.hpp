#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dampwave/degree.hpp"

namespace dampwave {

/// Schema violation in a scenario file or override.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;

  struct {
    double length = 3.141592653589793;
    int modes = 8;
    int grid = 64;
  } basis;

  struct {
    double c = 0.5;
    std::optional<int> k = 1;
    std::optional<double> lambda;
    double alpha = 0.5;
  } damped;

  NonlinearitySpec nonlinearity;
  IntegratorSettings integrator;

  struct {
    int ll_samples = 200;
    int sr_samples = 2000;
    int g_samples = 2000;
    std::vector<double> R_ladder = default_R_ladder();
  } checks;

  struct {
    std::vector<int> N_ladder{4, 8, 16};
    int newton_starts = 64;
    int g_samples = 400;
  } degree;

  struct {
    double t_end = 1.0;
    std::vector<double> initial_a;  // padded with zeros to the mode count
    std::vector<double> initial_b;
  } simulate;

  struct {
    std::string field = "ALL";  // LINEAR_SINK, ROTATION_SINK, SQUARE or ALL
    double period = 1.0;
    double box_half_width = 2.0;
    std::vector<double> mu_ladder = default_mu_ladder();
    int rk4_steps = 400;
  } averaging;

  struct {
    int periods = 10;
    double search_radius = 1000.0;
  } nonexistence;

  std::string output_dir = "out";

  BasisPtr make_basis() const;
  DampedConfig make_damped(BasisPtr basis) const;
  DegreeSetup make_degree_setup() const;
};

/// Built-in defaults as a JSON document; every accepted key appears here.
nlohmann::json default_config_json();

/// Merges `doc` over the defaults after rejecting unknown keys, applies `key=value`
/// overrides (dot paths, value parsed as JSON or taken as a string) and validates.
/// `seed` must be present in `doc` or an override.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace dampwave
