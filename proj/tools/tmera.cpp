// tmera: command-line driver for TMERA experiments.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <omp.h>

#include "tmera/resources.hpp"
#include "tmera/validate.hpp"
#include "tmera/workflows.hpp"

namespace {

using namespace tmera;

enum Exit { Ok = 0, Invalid = 1, Numerical = 2 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << s;
}

int cmd_optimize(const config::RunConfig& c) {
  const auto out = workflows::optimize_run(c);
  workflows::write_run(c.output.directory, out);
  std::cout.precision(12);
  std::cout << "energy " << out.record.final_energy << "  iterations " << out.record.iterations.size() - 1;
  if (out.rel_error) std::cout << "  reference " << out.reference->value << "  rel_error " << *out.rel_error;
  std::cout << "\nwrote " << c.output.directory << "\n";
  return Ok;
}

int cmd_scan(const config::RunConfig& c) {
  const auto r = workflows::scan_run(c);
  workflows::write_scan(c.output.directory, r, c);
  std::cout << workflows::scan_table(r);
  for (const auto& p : r.points)
    if (!p.error.empty()) return Numerical;
  return Ok;
}

int cmd_sample(const config::RunConfig& c) {
  if (c.sampling.shots <= 0) throw config::ConfigError("sampling.shots: must be > 0 for sample");
  const auto s = workflows::initial_state(c);
  const auto est = simulator::sample_energy(s, workflows::model_of(c), c.sampling.shots, c.sampling.seed);
  const nlohmann::json j{{"config_hash", config::config_hash(c)},
                         {"shots", est.shots},
                         {"mean", est.mean},
                         {"std_error", est.std_error},
                         {"exact", simulator::energy_density(s, workflows::model_of(c))}};
  write_text(std::filesystem::path(c.output.directory) / "sample.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return Ok;
}

int cmd_angles(const std::string& path, double width, const std::string& out) {
  const std::string text = read_file(path);
  const auto h = workflows::angle_histogram(network::deserialize(text), width);
  const std::string table = workflows::histogram_table(h, config::fnv1a_hex(text));
  if (out.empty())
    std::cout << table;
  else
    write_text(out, table);
  return Ok;
}

int cmd_validate(const std::string& suite) {
  const auto checks = validate::run_suite(suite);
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  deviation " << c.value << " (tol " << c.tolerance
              << ")\n";
    failed += !c.passed;
  }
  std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed ? Numerical : Ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TMERA ground-state optimization and resource estimation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (parallelism hint)")->check(CLI::NonNegativeNumber);

  std::string cfg_path;
  bool echo = false;
  auto config_cmd = [&](const char* name, const char* help) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("config", cfg_path, "config file (JSON)")->required();
    sc->add_flag("--echo-config", echo, "print the fully-defaulted config and exit");
    return sc;
  };
  auto* optimize = config_cmd("optimize", "optimize one network");
  auto* scan = config_cmd("scan", "scan the model parameter with warm starts");
  auto* sample = config_cmd("sample", "shot-based energy estimate of the initial state");

  auto* estimate = app.add_subcommand("estimate", "qubit counts and cost scalings");
  std::string kind;
  int q = 1, t = 1, layers = 1;
  long long sites = 0;
  double eps = 0;
  bool as_json = false;
  estimate->add_option("--kind", kind, "network kind")->required();
  estimate->add_option("--q", q)->required();
  estimate->add_option("--t", t)->required();
  estimate->add_option("--layers", layers)->required();
  estimate->add_option("--sites", sites, "system size for heterogeneous costs");
  estimate->add_option("--eps", eps, "target accuracy for the QAE cost");
  estimate->add_flag("--json", as_json);

  auto* angles = app.add_subcommand("angles", "histogram of canonical gate angles");
  std::string state_path, angles_out;
  double width = std::numbers::pi / 50;
  angles->add_option("state", state_path, "serialized state")->required();
  angles->add_option("--bin-width", width);
  angles->add_option("--out", angles_out, "write the table here instead of stdout");

  auto* val = app.add_subcommand("validate", "oracle-equivalence and invariant suites");
  std::string suite = "small";
  val->add_option("--suite", suite)->check(CLI::IsMember({"small", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : Invalid;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    for (auto* sc : {optimize, scan, sample})
      if (sc->parsed()) {
        const auto c = config::load(cfg_path);
        if (echo) {
          std::cout << config::echo(c);
          return Ok;
        }
        if (sc == optimize) return cmd_optimize(c);
        if (sc == scan) return cmd_scan(c);
        return cmd_sample(c);
      }
    if (estimate->parsed()) {
      std::optional<long long> N;
      std::optional<double> E;
      if (estimate->count("--sites")) N = sites;
      if (estimate->count("--eps")) E = eps;
      const auto r = resources::estimate_resources(network::kind_from_string(kind), q, t, layers, N, E);
      std::cout << (as_json ? resources::to_json(r).dump(2) + "\n" : resources::to_text(r));
      return Ok;
    }
    if (angles->parsed()) return cmd_angles(state_path, width, angles_out);
    if (val->parsed()) return cmd_validate(suite);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Invalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return Numerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return Invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Numerical;
  }
  return Invalid;
}
