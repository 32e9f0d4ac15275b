#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmera/config.hpp"
#include "tmera/models.hpp"
#include "tmera/optimizer.hpp"
#include "tmera/simulator.hpp"

namespace tmera::workflows {

using config::RunConfig;
using models::LocalModel;
using network::MeraState;
using optimizer::RunRecord;

enum class Mode { Riemannian, Euclidean };
// FREE networks optimize on the unitary group, angle forms in flat angle space.
Mode natural_mode(const MeraState& s);

// Runs L-BFGS over the unfrozen registry of s and writes the result back.
// Throws WrongParametrization when the mode does not fit the network form.
RunRecord optimize_state(MeraState& s, const LocalModel& model, const optimizer::LbfgsConfig& cfg, Mode mode,
                         const optimizer::Observer& observer = {},
                         const std::function<void(const optimizer::IterationRecord&)>& on_iter = {});

// Set every disentangler gate to the identity.
void reset_disentanglers(MeraState& s);

struct WarmStart {
  RunRecord phase1, phase2;
  Eigen::Index registry_phase1 = 0, registry_full = 0;
};
// Phase 1: disentanglers frozen at identity. Phase 2: everything free,
// disentanglers starting from identity.
WarmStart ttn_warmstart(MeraState& s, const LocalModel& model, const optimizer::LbfgsConfig& phase1,
                        const optimizer::LbfgsConfig& phase2);

LocalModel model_of(const RunConfig& c);
MeraState initial_state(const RunConfig& c);

struct RunOutcome {
  RunConfig config;
  std::string hash;
  MeraState state;
  std::optional<WarmStart> warm;
  RunRecord record;
  std::optional<models::ReferenceEnergy> reference;
  std::optional<double> rel_error;
};

RunOutcome optimize_run(const RunConfig& c);

// Data lines carry no wall time; the sidecar holds only wall times.
std::string record_jsonl(const RunRecord& r, const std::string& hash, const std::string& phase = "main");
std::string walltime_jsonl(const RunRecord& r, const std::string& hash, const std::string& phase = "main");
// config.json, run.jsonl, walltime.jsonl, state.json, summary.json
void write_run(const std::string& dir, const RunOutcome& out);

struct ScanPoint {
  std::string branch;  // forward | backward
  double parameter = 0;
  double energy = 0;
  std::optional<double> reference;
  std::optional<double> rel_error;
  int iterations = 0;
  bool converged = false;
  std::string init_from;  // previous | forward | config
  std::string error;      // non-empty when the point failed
  std::string state;      // serialized final state
};

struct ScanResult {
  std::string hash;
  std::vector<ScanPoint> points;
};

// Forward values start -> stop, then back to start without repeating stop.
std::vector<std::pair<std::string, double>> scan_values(const RunConfig::Scan& plan);
ScanResult scan_run(const RunConfig& base);
std::string scan_table(const ScanResult& r);
void write_scan(const std::string& dir, const ScanResult& r, const RunConfig& c);

double wrap_angle(double a);  // to (-pi, pi]

struct ExtractedAngles {
  std::map<std::string, std::vector<double>> by_class;  // XX YY ZZ Rz_a Ry_b Rz_c
  int gates = 0;
  int skipped = 0;
  std::vector<std::string> log;
};
ExtractedAngles extract_angles(const MeraState& s);

struct AngleHistogram {
  double bin_width = 0;
  // class -> bin index -> count; bin k is centred at k * bin_width
  std::map<std::string, std::map<long long, long long>> counts;
  int skipped = 0;
  long long total(const std::string& cls) const;
};
AngleHistogram angle_histogram(const MeraState& s, double bin_width = 0.0628318530717958647692);  // pi / 50
std::string histogram_table(const AngleHistogram& h, const std::string& hash);

struct LogLogFit {
  double slope = 0, intercept = 0, residual = 0;
  int points = 0;
};
// Least squares of log y on log x; nullopt with fewer than three usable points.
std::optional<LogLogFit> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ShotNoiseRow {
  long long shots = 0;
  double mean = 0;
  double std_dev = 0;  // across repetitions
};
struct ShotNoiseStudy {
  std::vector<ShotNoiseRow> rows;
  std::optional<LogLogFit> fit;
};
ShotNoiseStudy shot_noise_study(const MeraState& s, const LocalModel& model, const std::vector<long long>& shots,
                                int repetitions, std::uint64_t seed);

struct SweepRow {
  int q = 0, t = 0;
  long long cost_proxy = 0;
  double energy = 0, reference = 0, eps = 0;
  int iterations = 0;
  bool converged = false;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<LogLogFit> fit;  // eps against cost proxy
  std::string note;
};
SweepResult cost_accuracy_sweep(const RunConfig& base, const std::vector<int>& qs, const std::vector<int>& ts);
std::string sweep_table(const SweepResult& r, const std::string& hash);

// Deterministic sub-seed for stream k of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

}  // namespace tmera::workflows
