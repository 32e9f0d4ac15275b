#include "tmera/gradients.hpp"

#include <cmath>
#include <numbers>

namespace tmera::gradients {

using gates::GateForm;
using simulator::GateOverride;
using simulator::Overrides;

namespace {
constexpr double half_pi = std::numbers::pi / 2;

Overrides single_override(const simulator::Occurrence& o, CMatrix m) {
  return {GateOverride{o.layer, o.map, o.occurrence, std::move(m)}};
}

const gates::TrotterGate& angle_gate(const MeraState& s, const network::ParamRef& r) {
  const auto& g = s.gates.at(r.gate).gate;
  if (g.form == GateForm::Free || r.slot < 0) throw WrongParametrization("shift rule needs an angle parameter");
  return g;
}

CMatrix shifted(const gates::TrotterGate& g, int slot, double delta) {
  auto a = g.angles;
  a[slot] += delta;
  return gates::gate_matrix(g.form, a);
}

}  // namespace

CMatrix riemannian_projection(const CMatrix& u, const CMatrix& d) { return 0.5 * (d - u * d.adjoint() * u); }

double tangent_defect(const CMatrix& u, const CMatrix& w) {
  return (u.adjoint() * w + w.adjoint() * u).cwiseAbs().maxCoeff();
}

void pack_block(const CMatrix& w, double* out) {
  const Eigen::Index n = w.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    out[2 * k] = w.data()[k].real();
    out[2 * k + 1] = w.data()[k].imag();
  }
}

CMatrix unpack_block(const double* in, Eigen::Index dim) {
  CMatrix w(dim, dim);
  for (Eigen::Index k = 0; k < dim * dim; ++k) w.data()[k] = cplx(in[2 * k], in[2 * k + 1]);
  return w;
}

Eigen::Index registry_size(const MeraState& s) {
  Eigen::Index n = 0;
  for (const auto& r : s.registry()) {
    const auto& g = s.gates[r.gate].gate;
    n += r.slot < 0 ? 2 * g.matrix.size() : 1;
  }
  return n;
}

Gradient full_gradient(const Evaluator& ev, const MeraState& s) {
  const auto mats = s.matrices();
  std::vector<CMatrix> d;
  Gradient out;
  out.energy = ev.energy_and_gradient(mats, d);
  out.flat.resize(registry_size(s));
  Eigen::Index k = 0;
  for (const auto& r : s.registry()) {
    const auto& g = s.gates[r.gate].gate;
    if (r.slot < 0) {
      pack_block(riemannian_projection(g.matrix, d[r.gate]), out.flat.data() + k);
      k += 2 * g.matrix.size();
    } else {
      const CMatrix dg = gates::gate_derivative(g.form, g.angles, r.slot);
      out.flat(k++) = (d[r.gate].adjoint() * dg).trace().real();
    }
  }
  return out;
}

double shift_gradient(const Evaluator& ev, const MeraState& s, int j) {
  const auto reg = s.registry();
  const auto& r = reg.at(j);
  const auto& g = angle_gate(s, r);
  const CMatrix plus = shifted(g, r.slot, half_pi), minus = shifted(g, r.slot, -half_pi);
  const auto mats = s.matrices();
  double sum = 0;
  for (const auto& o : ev.occurrences(r.gate)) {
    const Overrides op = single_override(o, plus), om = single_override(o, minus);
    sum += 0.5 * (ev.energy(mats, &op) - ev.energy(mats, &om));
  }
  return sum;
}

double simultaneous_shift_gradient(const Evaluator& ev, const MeraState& s, int j) {
  const auto reg = s.registry();
  const auto& r = reg.at(j);
  const auto& g = angle_gate(s, r);
  auto mp = s.matrices(), mm = s.matrices();
  mp[r.gate] = shifted(g, r.slot, half_pi);
  mm[r.gate] = shifted(g, r.slot, -half_pi);
  return 0.5 * (ev.energy(mp) - ev.energy(mm));
}

std::vector<double> pauli_alphas(const Evaluator& ev, const MeraState& s, int gate) {
  const CMatrix& u = s.gates.at(gate).gate.matrix;
  const int nq = qcore::log2_dim(u.rows());
  const int strings = 1 << (2 * nq);
  const auto mats = s.matrices();
  const auto occ = ev.occurrences(gate);
  std::vector<double> alpha(strings, 0.0);
  for (int k = 0; k < strings; ++k) {
    const CMatrix sigma = qcore::pauli_string(k, nq);
    const CMatrix um = u * qcore::rotation(sigma, -half_pi), up = u * qcore::rotation(sigma, half_pi);
    for (const auto& o : occ) {
      const Overrides a = single_override(o, um), b = single_override(o, up);
      alpha[k] += ev.energy(mats, &a) - ev.energy(mats, &b);
    }
  }
  return alpha;
}

CMatrix riemannian_gradient(const Evaluator& ev, const MeraState& s, int gate) {
  const CMatrix& u = s.gates.at(gate).gate.matrix;
  const int nq = qcore::log2_dim(u.rows());
  const auto alpha = pauli_alphas(ev, s, gate);
  CMatrix g = CMatrix::Zero(u.rows(), u.cols());
  for (int k = 0; k < static_cast<int>(alpha.size()); ++k) g += alpha[k] * (u * qcore::pauli_string(k, nq));
  return cplx(0, 1) * g / static_cast<double>(u.rows());
}

namespace {

// Registry entries flattened to independent tasks.
struct Task {
  int param;           // registry index
  Eigen::Index offset;  // into the flat vector
  bool block;
};

std::vector<Task> tasks_of(const MeraState& s) {
  std::vector<Task> t;
  Eigen::Index k = 0;
  const auto reg = s.registry();
  for (int j = 0; j < static_cast<int>(reg.size()); ++j) {
    const bool block = reg[j].slot < 0;
    t.push_back({j, k, block});
    k += block ? 2 * s.gates[reg[j].gate].gate.matrix.size() : 1;
  }
  return t;
}

void run_task(const Evaluator& ev, const MeraState& s, const std::vector<network::ParamRef>& reg, const Task& t,
              Eigen::VectorXd& flat) {
  if (t.block)
    pack_block(riemannian_gradient(ev, s, reg[t.param].gate), flat.data() + t.offset);
  else
    flat(t.offset) = shift_gradient(ev, s, t.param);
}

}  // namespace

Gradient measurement_gradient(const Evaluator& ev, const MeraState& s) {
  const auto tasks = tasks_of(s);
  const auto reg = s.registry();
  Gradient out;
  out.flat = Eigen::VectorXd::Zero(registry_size(s));
  out.energy = ev.energy(s.matrices());
  const int n = static_cast<int>(tasks.size());
  // each task writes a disjoint slice, so the result does not depend on scheduling
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) run_task(ev, s, reg, tasks[k], out.flat);
  return out;
}

Gradient measurement_gradient_serial(const Evaluator& ev, const MeraState& s) {
  const auto tasks = tasks_of(s);
  const auto reg = s.registry();
  Gradient out;
  out.flat = Eigen::VectorXd::Zero(registry_size(s));
  out.energy = ev.energy(s.matrices());
  for (const auto& t : tasks) run_task(ev, s, reg, t, out.flat);
  return out;
}

long long gradient_cost_proxy(const Evaluator& ev, const MeraState& s) {
  const auto& c = ev.compiled();
  long long per_eval = 0;
  auto count = [&](const simulator::Program& p) {
    for (const auto& in : p.code)
      if (in.op == simulator::Instr::Op::Gate && in.qubits.size() == 2) ++per_eval;
  };
  count(c.top);
  for (const auto& l : c.layers)
    for (const auto& p : l) count(p);
  long long evals = 0;
  for (const auto& r : s.registry()) {
    const auto occ = static_cast<long long>(ev.occurrences(r.gate).size());
    const auto dim = s.gates[r.gate].gate.matrix.rows();
    evals += r.slot < 0 ? 2 * dim * dim * occ : 2 * occ;
  }
  return evals * per_eval;
}

}  // namespace tmera::gradients
