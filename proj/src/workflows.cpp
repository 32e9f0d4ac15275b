#include "tmera/workflows.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tmera/gradients.hpp"

namespace tmera::workflows {

using nlohmann::json;
using network::GateForm;

namespace {

constexpr double pi = std::numbers::pi;

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
}

std::optional<models::ReferenceEnergy> try_reference(const LocalModel& m) {
  try {
    return models::reference_energy(m);
  } catch (const models::NoReference&) {
    return std::nullopt;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Mode natural_mode(const MeraState& s) {
  return s.form == network::NetworkForm::Free ? Mode::Riemannian : Mode::Euclidean;
}

RunRecord optimize_state(MeraState& s, const LocalModel& model, const optimizer::LbfgsConfig& cfg, Mode mode,
                         const optimizer::Observer& observer,
                         const std::function<void(const optimizer::IterationRecord&)>& on_iter) {
  if (mode != natural_mode(s))
    throw gradients::WrongParametrization(mode == Mode::Riemannian ? "riemannian mode needs a FREE network"
                                                                   : "euclidean mode needs an angle-form network");
  const simulator::Evaluator ev(s, model);
  const auto reg = s.registry();
  const auto base = s.matrices();

  if (mode == Mode::Riemannian) {
    std::vector<CMatrix> u0;
    std::vector<int> ids;
    for (const auto& r : reg) {
      ids.push_back(r.gate);
      u0.push_back(s.gates[r.gate].gate.matrix);
    }
    std::vector<CMatrix> mats = base;
    std::vector<CMatrix> d;
    optimizer::UnitaryProblem pr(
        u0,
        [&](const std::vector<CMatrix>& u, Eigen::VectorXd& grad) {
          for (size_t k = 0; k < ids.size(); ++k) mats[ids[k]] = u[k];
          const double e = ev.energy_and_gradient(mats, d);
          Eigen::Index off = 0;
          for (size_t k = 0; k < ids.size(); ++k) {
            gradients::pack_block(gradients::riemannian_projection(u[k], d[ids[k]]), grad.data() + off);
            off += 2 * u[k].size();
          }
          return e;
        },
        cfg.reproject_every);
    RunRecord rec = optimizer::lbfgs_minimize(pr, cfg, observer, on_iter);
    for (size_t k = 0; k < ids.size(); ++k) s.set_gate(ids[k], gates::free_gate(pr.point()[k]));
    return rec;
  }

  Eigen::VectorXd x0(reg.size());
  for (size_t j = 0; j < reg.size(); ++j) x0(j) = s.gates[reg[j].gate].gate.angles[reg[j].slot];
  std::vector<std::vector<double>> angles;
  for (const auto& g : s.gates) angles.push_back(g.gate.angles);
  std::vector<CMatrix> mats = base;
  std::vector<CMatrix> d;
  auto load = [&](const Eigen::VectorXd& x) {
    for (size_t j = 0; j < reg.size(); ++j) angles[reg[j].gate][reg[j].slot] = x(j);
    for (size_t j = 0; j < reg.size(); ++j)
      if (j + 1 == reg.size() || reg[j + 1].gate != reg[j].gate)
        mats[reg[j].gate] = gates::gate_matrix(s.gates[reg[j].gate].gate.form, angles[reg[j].gate]);
  };
  optimizer::EuclideanProblem pr(x0, [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    load(x);
    const double e = ev.energy_and_gradient(mats, d);
    for (size_t j = 0; j < reg.size(); ++j) {
      const auto& g = s.gates[reg[j].gate].gate;
      const CMatrix dg = gates::gate_derivative(g.form, angles[reg[j].gate], reg[j].slot);
      grad(j) = (d[reg[j].gate].adjoint() * dg).trace().real();
    }
    return e;
  });
  RunRecord rec = optimizer::lbfgs_minimize(pr, cfg, observer, on_iter);
  load(pr.point());
  for (size_t j = 0; j < reg.size(); ++j)
    if (j + 1 == reg.size() || reg[j + 1].gate != reg[j].gate)
      s.set_gate(reg[j].gate, gates::make_gate(s.gates[reg[j].gate].gate.form, angles[reg[j].gate]));
  return rec;
}

void reset_disentanglers(MeraState& s) {
  for (auto& g : s.gates) {
    if (g.role != network::Role::Disentangler) continue;
    if (g.gate.form == GateForm::Free)
      g.gate = gates::free_gate(CMatrix::Identity(g.gate.matrix.rows(), g.gate.matrix.cols()));
    else
      g.gate = gates::make_gate(g.gate.form, std::vector<double>(g.gate.angles.size(), 0.0));
  }
}

WarmStart ttn_warmstart(MeraState& s, const LocalModel& model, const optimizer::LbfgsConfig& phase1,
                        const optimizer::LbfgsConfig& phase2) {
  WarmStart w;
  w.registry_full = gradients::registry_size(s);
  reset_disentanglers(s);
  network::set_disentanglers_frozen(s, true);
  w.registry_phase1 = gradients::registry_size(s);
  w.phase1 = optimize_state(s, model, phase1, natural_mode(s));
  network::set_disentanglers_frozen(s, false);
  w.phase2 = optimize_state(s, model, phase2, natural_mode(s));
  return w;
}

LocalModel model_of(const RunConfig& c) {
  return models::make_model(c.model.name, c.model.parameter, c.network.q, c.model.penalty);
}

MeraState initial_state(const RunConfig& c) {
  if (c.init.mode == "state") {
    std::ifstream in(c.init.state_file);
    if (!in) throw config::ConfigError("init.state_file: cannot open " + c.init.state_file);
    std::stringstream ss;
    ss << in.rdbuf();
    MeraState s = network::deserialize(ss.str());
    if (network::to_string(s.kind) != network::to_string(network::kind_from_string(c.network.kind)) ||
        s.T != c.network.T || s.q != c.network.q || s.t != c.network.t ||
        s.form != network::network_form_from_string(c.network.form))
      throw config::ConfigError("init.state_file: state does not match the network section");
    return s;
  }
  network::InitSpec spec;
  if (c.init.mode == "product") {
    spec = c.init.product == "fig2" ? network::product_init_fig2() : network::product_init_alternative();
  } else if (c.init.mode == "random") {
    spec.mode = network::InitMode::Random;
    spec.scale = c.init.scale;
  }
  spec.seed = c.init.seed;
  return network::build_network(network::kind_from_string(c.network.kind), c.network.T, c.network.q, c.network.t,
                                network::network_form_from_string(c.network.form), spec);
}

namespace {

Mode mode_of(const RunConfig& c, const MeraState& s) {
  if (c.optimizer.mode == "riemannian") return Mode::Riemannian;
  if (c.optimizer.mode == "euclidean") return Mode::Euclidean;
  return natural_mode(s);
}

void run_with_config(MeraState& s, const RunConfig& c, const LocalModel& model, std::optional<WarmStart>& warm,
                     RunRecord& rec) {
  const auto cfg = c.lbfgs();
  if (c.init.ttn_warmstart) {
    auto p1 = cfg;
    p1.max_iter = c.init.ttn_max_iter;
    warm = ttn_warmstart(s, model, p1, cfg);
    rec = warm->phase2;
  } else {
    rec = optimize_state(s, model, cfg, mode_of(c, s));
  }
}

}  // namespace

RunOutcome optimize_run(const RunConfig& c) {
  config::validate(c);
  RunOutcome out;
  out.config = c;
  out.hash = config::config_hash(c);
  const LocalModel model = model_of(c);
  out.state = initial_state(c);
  run_with_config(out.state, c, model, out.warm, out.record);
  out.reference = try_reference(model);
  if (out.reference)
    out.rel_error = std::abs(out.record.final_energy - out.reference->value) / std::abs(out.reference->value);
  return out;
}

std::string record_jsonl(const RunRecord& r, const std::string& hash, const std::string& phase) {
  std::string s;
  for (const auto& it : r.iterations)
    s += json{{"config_hash", hash},
              {"phase", phase},
              {"iter", it.iter},
              {"energy", it.energy},
              {"grad_norm", it.grad_norm},
              {"step", it.step},
              {"wolfe_trials", it.wolfe_trials}}
             .dump() +
         "\n";
  for (const auto& e : r.events) s += json{{"config_hash", hash}, {"phase", phase}, {"event", e}}.dump() + "\n";
  return s;
}

std::string walltime_jsonl(const RunRecord& r, const std::string& hash, const std::string& phase) {
  std::string s;
  for (const auto& it : r.iterations)
    s += json{{"config_hash", hash}, {"phase", phase}, {"iter", it.iter}, {"wall_ms", it.wall_ms}}.dump() + "\n";
  return s;
}

void write_run(const std::string& dir, const RunOutcome& out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_file(d / "config.json", config::echo(out.config));
  std::string data, wall;
  if (out.warm) {
    data += record_jsonl(out.warm->phase1, out.hash, "ttn");
    wall += walltime_jsonl(out.warm->phase1, out.hash, "ttn");
  }
  data += record_jsonl(out.record, out.hash);
  wall += walltime_jsonl(out.record, out.hash);
  write_file(d / "run.jsonl", data);
  write_file(d / "walltime.jsonl", wall);
  write_file(d / "state.json", network::serialize(out.state));
  json sum{{"config_hash", out.hash},
           {"final_energy", out.record.final_energy},
           {"iterations", static_cast<int>(out.record.iterations.size()) - 1},
           {"converged", out.record.converged},
           {"max_unitarity_defect", out.record.max_unitarity_defect},
           {"tags", out.config.output.tags}};
  if (out.reference) {
    sum["reference"] = {{"value", out.reference->value},
                        {"uncertainty", out.reference->uncertainty},
                        {"method", out.reference->method}};
    sum["rel_error"] = *out.rel_error;
  }
  write_file(d / "summary.json", sum.dump(2) + "\n");
}

std::vector<std::pair<std::string, double>> scan_values(const RunConfig::Scan& plan) {
  if (!(plan.step > 0)) throw InputError("scan: step must be > 0");
  const double span = plan.stop - plan.start;
  const long long n = std::llround(std::abs(span) / plan.step);
  const double dir = span >= 0 ? 1.0 : -1.0;
  std::vector<std::pair<std::string, double>> v;
  // integer steps so that the forward and backward grids coincide exactly
  for (long long k = 0; k <= n; ++k) v.emplace_back("forward", plan.start + dir * plan.step * double(k));
  if (plan.backward)
    for (long long k = n - 1; k >= 0; --k) v.emplace_back("backward", plan.start + dir * plan.step * double(k));
  return v;
}

ScanResult scan_run(const RunConfig& base) {
  config::validate(base);
  ScanResult res;
  res.hash = config::config_hash(base);
  const auto values = scan_values(base.scan);
  std::optional<MeraState> prev;
  std::map<long long, MeraState> forward_states;  // keyed by grid index
  const double span = base.scan.stop - base.scan.start;
  const long long n = std::llround(std::abs(span) / base.scan.step);
  for (size_t i = 0; i < values.size(); ++i) {
    const auto& [branch, value] = values[i];
    const long long grid = i <= static_cast<size_t>(n) ? static_cast<long long>(i) : 2 * n - static_cast<long long>(i);
    ScanPoint pt;
    pt.branch = branch;
    pt.parameter = value;
    RunConfig c = base;
    c.model.parameter = value;
    try {
      const LocalModel model = model_of(c);
      MeraState s;
      std::optional<WarmStart> warm;
      RunRecord rec;
      if (!prev || !base.scan.warm_start) {
        s = initial_state(c);
        pt.init_from = "config";
        run_with_config(s, c, model, warm, rec);
      } else {
        s = *prev;
        pt.init_from = "previous";
        // backward points also consider the forward solution at the same value
        if (branch == "backward" && forward_states.count(grid)) {
          const MeraState& f = forward_states.at(grid);
          if (simulator::energy_density(f, model) < simulator::energy_density(s, model)) {
            s = f;
            pt.init_from = "forward";
          }
        }
        rec = optimize_state(s, model, c.lbfgs(), mode_of(c, s));
      }
      pt.energy = rec.final_energy;
      pt.iterations = static_cast<int>(rec.iterations.size()) - 1;
      pt.converged = rec.converged;
      if (auto ref = try_reference(model)) {
        pt.reference = ref->value;
        pt.rel_error = std::abs(pt.energy - ref->value) / std::abs(ref->value);
      }
      pt.state = network::serialize(s);
      if (branch == "forward") forward_states[grid] = s;
      prev = std::move(s);
    } catch (const Error& e) {
      pt.error = e.what();
    }
    res.points.push_back(std::move(pt));
  }
  return res;
}

std::string scan_table(const ScanResult& r) {
  std::ostringstream o;
  o.precision(17);
  o << "# config_hash " << r.hash << "\n";
  o << "branch\tparameter\tenergy\treference\trel_error\titerations\tconverged\tinit_from\terror\n";
  for (const auto& p : r.points) {
    o << p.branch << "\t" << p.parameter << "\t" << p.energy << "\t";
    if (p.reference) o << *p.reference;
    o << "\t";
    if (p.rel_error) o << *p.rel_error;
    o << "\t" << p.iterations << "\t" << (p.converged ? 1 : 0) << "\t" << p.init_from << "\t" << p.error << "\n";
  }
  return o.str();
}

void write_scan(const std::string& dir, const ScanResult& r, const RunConfig& c) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "states");
  write_file(fs::path(dir) / "config.json", config::echo(c));
  write_file(fs::path(dir) / "scan.tsv", scan_table(r));
  for (size_t i = 0; i < r.points.size(); ++i)
    if (!r.points[i].state.empty())
      write_file(fs::path(dir) / "states" / ("point" + std::to_string(i) + ".json"), r.points[i].state);
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2 * pi;
  return w;
}

namespace {

// The local factors of a KAK split are only fixed up to gauge choices that
// depend on the input phase; rotating the largest entry onto the positive real
// axis makes the decomposition a function of the gate up to global phase.
CMatrix dephase(const CMatrix& u) {
  Eigen::Index i = 0, j = 0;
  u.cwiseAbs().maxCoeff(&i, &j);
  const cplx z = u(i, j);
  return u * (std::conj(z) / std::abs(z));
}

}  // namespace

ExtractedAngles extract_angles(const MeraState& s) {
  ExtractedAngles out;
  for (const char* c : {"XX", "YY", "ZZ", "Rz_a", "Ry_b", "Rz_c"}) out.by_class[c];
  auto euler = [&](const std::array<double, 3>& e) {
    out.by_class["Rz_a"].push_back(wrap_angle(e[0]));
    out.by_class["Ry_b"].push_back(wrap_angle(e[1]));
    out.by_class["Rz_c"].push_back(wrap_angle(e[2]));
  };
  auto ising = [&](double xx, double yy, double zz) {
    out.by_class["XX"].push_back(wrap_angle(xx));
    out.by_class["YY"].push_back(wrap_angle(yy));
    out.by_class["ZZ"].push_back(wrap_angle(zz));
  };
  for (const auto& slot : s.gates) {
    const auto& g = slot.gate;
    ++out.gates;
    try {
      if (g.form == GateForm::Can) {
        const auto& a = g.angles;
        euler({a[0], a[1], a[2]});
        euler({a[3], a[4], a[5]});
        ising(a[6], a[7], a[8]);
        euler({a[9], a[10], a[11]});
        euler({a[12], a[13], a[14]});
      } else if (g.form == GateForm::Xx) {
        out.by_class["XX"].push_back(wrap_angle(g.angles.at(0)));
      } else if (g.num_qubits() == 1) {
        euler(gates::euler_angles(dephase(g.matrix)));
      } else {
        const auto c = gates::kak_decompose(qcore::UnitaryMatrix(dephase(g.matrix)));
        for (const auto& m : c.pre) euler(gates::euler_angles(m));
        ising(c.ising[0], c.ising[1], c.ising[2]);
        for (const auto& m : c.post) euler(gates::euler_angles(m));
      }
    } catch (const gates::NumericalDegeneracy& e) {
      ++out.skipped;
      out.log.push_back("gate " + std::to_string(slot.id) + ": " + e.what());
    }
  }
  return out;
}

long long AngleHistogram::total(const std::string& cls) const {
  long long n = 0;
  if (auto it = counts.find(cls); it != counts.end())
    for (const auto& [bin, c] : it->second) n += c;
  return n;
}

AngleHistogram angle_histogram(const MeraState& s, double bin_width) {
  if (!(bin_width > 0 && bin_width <= 2 * pi)) throw InputError("angle_histogram: bin width must lie in (0, 2 pi]");
  const auto ex = extract_angles(s);
  AngleHistogram h;
  h.bin_width = bin_width;
  h.skipped = ex.skipped;
  // bins centred on multiples of the width keep exact zeros away from bin edges
  const long long half = std::llround(pi / bin_width);
  for (const auto& [cls, angles] : ex.by_class) {
    auto& bins = h.counts[cls];
    for (double a : angles) {
      long long k = std::llround(a / bin_width);
      if (k < -half + 1 && std::abs(2 * pi / bin_width - 2 * double(half)) < 1e-9) k += 2 * half;  // -pi is pi
      ++bins[k];
    }
  }
  return h;
}

std::string histogram_table(const AngleHistogram& h, const std::string& hash) {
  std::ostringstream o;
  o.precision(17);
  o << "# config_hash " << hash << "\n# bin_width " << h.bin_width << "\n# skipped " << h.skipped << "\n";
  o << "class\tbin_center\tcount\n";
  for (const auto& [cls, bins] : h.counts)
    for (const auto& [k, c] : bins) o << cls << "\t" << double(k) * h.bin_width << "\t" << c << "\n";
  return o.str();
}

std::optional<LogLogFit> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("loglog_fit: size mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const int n = static_cast<int>(lx.size());
  if (n < 3) return std::nullopt;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) A(i, 0) = lx[i], A(i, 1) = 1, b(i) = ly[i];
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  LogLogFit f;
  f.slope = c(0);
  f.intercept = c(1);
  f.residual = std::sqrt((A * c - b).squaredNorm() / n);
  f.points = n;
  return f;
}

ShotNoiseStudy shot_noise_study(const MeraState& s, const LocalModel& model, const std::vector<long long>& shots,
                                int repetitions, std::uint64_t seed) {
  if (repetitions < 2) throw InputError("shot_noise_study: need at least two repetitions");
  ShotNoiseStudy out;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < shots.size(); ++i) {
    std::vector<double> means;
    for (int r = 0; r < repetitions; ++r)
      means.push_back(simulator::sample_energy(s, model, shots[i], derive_seed(seed, i * 1000003ull + r)).mean);
    double m = 0;
    for (double v : means) m += v;
    m /= repetitions;
    double var = 0;
    for (double v : means) var += (v - m) * (v - m);
    var /= repetitions - 1;
    out.rows.push_back({shots[i], m, std::sqrt(var)});
    xs.push_back(double(shots[i]));
    ys.push_back(std::sqrt(var));
  }
  out.fit = loglog_fit(xs, ys);
  return out;
}

SweepResult cost_accuracy_sweep(const RunConfig& base, const std::vector<int>& qs, const std::vector<int>& ts) {
  SweepResult out;
  out.note = "TMERA side only; no classical fMERA baseline is computed, q-saturation floors stand in for it";
  std::vector<double> cost, eps;
  std::uint64_t cell = 0;
  for (int q : qs)
    for (int t : ts) {
      RunConfig c = base;
      c.network.q = q;
      c.network.t = t;
      c.init.seed = derive_seed(base.init.seed, cell++);
      const auto r = optimize_run(c);
      SweepRow row;
      row.q = q;
      row.t = t;
      const simulator::Evaluator ev(r.state, model_of(c));
      row.cost_proxy = gradients::gradient_cost_proxy(ev, r.state);
      row.energy = r.record.final_energy;
      row.reference = r.reference ? r.reference->value : std::nan("");
      row.eps = r.rel_error ? *r.rel_error : std::nan("");
      row.iterations = static_cast<int>(r.record.iterations.size()) - 1;
      row.converged = r.record.converged;
      out.rows.push_back(row);
      cost.push_back(double(row.cost_proxy));
      eps.push_back(row.eps);
    }
  out.fit = loglog_fit(cost, eps);
  return out;
}

std::string sweep_table(const SweepResult& r, const std::string& hash) {
  std::ostringstream o;
  o.precision(17);
  o << "# config_hash " << hash << "\n# " << r.note << "\n";
  if (r.fit)
    o << "# fit log(eps) = " << r.fit->slope << " log(cost) + " << r.fit->intercept << ", rms residual "
      << r.fit->residual << ", points " << r.fit->points << "\n";
  else
    o << "# fit: fewer than three usable points, no slope reported\n";
  o << "q\tt\tcost_proxy\tenergy\treference\teps\titerations\tconverged\n";
  for (const auto& w : r.rows)
    o << w.q << "\t" << w.t << "\t" << w.cost_proxy << "\t" << w.energy << "\t" << w.reference << "\t" << w.eps << "\t"
      << w.iterations << "\t" << (w.converged ? 1 : 0) << "\n";
  return o.str();
}

}  // namespace tmera::workflows
