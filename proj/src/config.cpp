#include "tmera/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tmera/models.hpp"
#include "tmera/network.hpp"

namespace tmera::config {

using nlohmann::json;

namespace {

// Reads the fields of one object and rejects anything it did not consume.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(path_ + "." + k + ": unknown key");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

optimizer::LbfgsConfig RunConfig::lbfgs() const {
  optimizer::LbfgsConfig c;
  c.memory = optimizer.memory;
  c.c1 = optimizer.c1;
  c.c2 = optimizer.c2;
  c.eps = optimizer.eps;
  c.max_iter = optimizer.max_iter;
  c.max_trials = optimizer.max_trials;
  c.reproject_every = optimizer.reproject_every;
  return c;
}

RunConfig parse(const json& j) {
  RunConfig c;
  Section root(j, "config");
  if (const json* m = root.sub("model")) {
    Section s(*m, "model");
    s.get("name", c.model.name);
    s.get("parameter", c.model.parameter);
    s.get("penalty", c.model.penalty);
  }
  if (const json* m = root.sub("network")) {
    Section s(*m, "network");
    s.get("kind", c.network.kind);
    s.get("T", c.network.T);
    s.get("q", c.network.q);
    s.get("t", c.network.t);
    s.get("form", c.network.form);
  }
  if (const json* m = root.sub("init")) {
    Section s(*m, "init");
    s.get("mode", c.init.mode);
    s.get("seed", c.init.seed);
    s.get("state_file", c.init.state_file);
    s.get("product", c.init.product);
    s.get("scale", c.init.scale);
    s.get("ttn_warmstart", c.init.ttn_warmstart);
    s.get("ttn_max_iter", c.init.ttn_max_iter);
  }
  if (const json* m = root.sub("optimizer")) {
    Section s(*m, "optimizer");
    s.get("mode", c.optimizer.mode);
    s.get("memory", c.optimizer.memory);
    s.get("c1", c.optimizer.c1);
    s.get("c2", c.optimizer.c2);
    s.get("eps", c.optimizer.eps);
    s.get("max_iter", c.optimizer.max_iter);
    s.get("max_trials", c.optimizer.max_trials);
    s.get("reproject_every", c.optimizer.reproject_every);
  }
  if (const json* m = root.sub("sampling")) {
    Section s(*m, "sampling");
    s.get("shots", c.sampling.shots);
    s.get("seed", c.sampling.seed);
  }
  if (const json* m = root.sub("scan")) {
    Section s(*m, "scan");
    s.get("start", c.scan.start);
    s.get("stop", c.scan.stop);
    s.get("step", c.scan.step);
    s.get("backward", c.scan.backward);
    s.get("warm_start", c.scan.warm_start);
  }
  if (const json* m = root.sub("output")) {
    Section s(*m, "output");
    s.get("directory", c.output.directory);
    if (const json* tags = s.sub("tags")) {
      if (!tags->is_array()) throw ConfigError("output.tags: expected an array of strings");
      for (const auto& t : *tags) {
        if (!t.is_string()) throw ConfigError("output.tags: expected an array of strings");
        c.output.tags.push_back(t.get<std::string>());
      }
    }
  }
  validate(c);
  return c;
}

RunConfig parse_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse(j);
}

RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

json to_json(const RunConfig& c) {
  return json{
      {"model", {{"name", c.model.name}, {"parameter", c.model.parameter}, {"penalty", c.model.penalty}}},
      {"network",
       {{"kind", c.network.kind}, {"T", c.network.T}, {"q", c.network.q}, {"t", c.network.t}, {"form", c.network.form}}},
      {"init",
       {{"mode", c.init.mode},
        {"seed", c.init.seed},
        {"state_file", c.init.state_file},
        {"product", c.init.product},
        {"scale", c.init.scale},
        {"ttn_warmstart", c.init.ttn_warmstart},
        {"ttn_max_iter", c.init.ttn_max_iter}}},
      {"optimizer",
       {{"mode", c.optimizer.mode},
        {"memory", c.optimizer.memory},
        {"c1", c.optimizer.c1},
        {"c2", c.optimizer.c2},
        {"eps", c.optimizer.eps},
        {"max_iter", c.optimizer.max_iter},
        {"max_trials", c.optimizer.max_trials},
        {"reproject_every", c.optimizer.reproject_every}}},
      {"sampling", {{"shots", c.sampling.shots}, {"seed", c.sampling.seed}}},
      {"scan",
       {{"start", c.scan.start},
        {"stop", c.scan.stop},
        {"step", c.scan.step},
        {"backward", c.scan.backward},
        {"warm_start", c.scan.warm_start}}},
      {"output", {{"directory", c.output.directory}, {"tags", c.output.tags}}},
  };
}

std::string echo(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

std::string config_hash(const RunConfig& c) { return fnv1a_hex(to_json(c).dump()); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const RunConfig& c) {
  if (c.model.name != "tfim" && c.model.name != "blbq") throw ConfigError("model.name: expected tfim or blbq");
  if (c.model.name == "tfim" && !(c.model.parameter >= 0)) throw ConfigError("model.parameter: g must be >= 0");
  if (!(c.model.penalty > 0)) throw ConfigError("model.penalty: must be > 0");
  network::NetworkKind kind;
  try {
    kind = network::kind_from_string(c.network.kind);
    network::network_form_from_string(c.network.form);
  } catch (const InputError& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
  if (!network::info(kind).simulable) throw ConfigError("network.kind: " + c.network.kind + " cannot be simulated");
  if (c.network.T < 1 || c.network.q < 1 || c.network.t < 1) throw ConfigError("network: T, q, t must be >= 1");
  if (c.model.name == "blbq" && c.network.q < 2) throw ConfigError("network.q: blbq needs q >= 2");
  static const std::set<std::string> modes{"identity", "product", "random", "state"};
  if (!modes.count(c.init.mode)) throw ConfigError("init.mode: expected identity, product, random or state");
  if (c.init.mode == "state" && c.init.state_file.empty()) throw ConfigError("init.state_file: required for mode state");
  if (c.init.product != "fig2" && c.init.product != "alternative")
    throw ConfigError("init.product: expected fig2 or alternative");
  if (c.init.scale < 0) throw ConfigError("init.scale: must be >= 0");
  if (c.init.ttn_max_iter < 0) throw ConfigError("init.ttn_max_iter: must be >= 0");
  if (c.optimizer.mode != "auto" && c.optimizer.mode != "riemannian" && c.optimizer.mode != "euclidean")
    throw ConfigError("optimizer.mode: expected auto, riemannian or euclidean");
  const bool free = c.network.form == "FREE";
  if ((c.optimizer.mode == "riemannian" && !free) || (c.optimizer.mode == "euclidean" && free))
    throw ConfigError("optimizer.mode: " + c.optimizer.mode + " does not fit form " + c.network.form);
  try {
    c.lbfgs().validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
  if (c.sampling.shots < 0) throw ConfigError("sampling.shots: must be >= 0");
  if (!(c.scan.step > 0)) throw ConfigError("scan.step: must be > 0");
  if (c.model.name == "tfim" && (c.scan.start < 0 || c.scan.stop < 0)) throw ConfigError("scan: g must be >= 0");
  if (c.output.directory.empty()) throw ConfigError("output.directory: must not be empty");
}

}  // namespace tmera::config
