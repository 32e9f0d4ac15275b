#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmera/optimizer.hpp"

namespace tmera::config {

struct ConfigError : InputError {
  using InputError::InputError;
};

struct RunConfig {
  struct Model {
    std::string name = "tfim";
    double parameter = 1.25;
    double penalty = 10.0;  // BLBQ only
  } model;
  struct Network {
    std::string kind = "mod-binary";
    int T = 3, q = 1, t = 1;
    std::string form = "FREE";
  } network;
  struct Init {
    std::string mode = "identity";  // identity | product | random | state
    std::uint64_t seed = 0;
    std::string state_file;         // mode == state
    std::string product = "fig2";   // fig2 | alternative
    double scale = 0.0;             // random: 0 Haar, > 0 identity perturbation
    bool ttn_warmstart = false;
    int ttn_max_iter = 200;
  } init;
  struct Optimizer {
    std::string mode = "auto";  // auto | riemannian | euclidean
    int memory = 9;
    double c1 = 0.1, c2 = 0.9;
    double eps = 1e-12;
    int max_iter = 1000;
    int max_trials = 25;
    int reproject_every = 1;
  } optimizer;
  struct Sampling {
    long long shots = 0;
    std::uint64_t seed = 0;
  } sampling;
  struct Scan {
    double start = 1.25, stop = 0.75, step = 0.05;
    bool backward = true;
    bool warm_start = true;
  } scan;
  struct Output {
    std::string directory = "tmera-out";
    std::vector<std::string> tags;
  } output;

  optimizer::LbfgsConfig lbfgs() const;
};

// Strict parse: unknown keys and wrong types throw ConfigError naming the field.
RunConfig parse(const nlohmann::json& j);
RunConfig parse_text(const std::string& text);
RunConfig load(const std::string& path);
nlohmann::json to_json(const RunConfig& c);
// Fully-defaulted echo; parse(echo(c)) == c.
std::string echo(const RunConfig& c);
// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
// Hash of the compact echo.
std::string config_hash(const RunConfig& c);
void validate(const RunConfig& c);

}  // namespace tmera::config
