#include "tmera/gates.hpp"

#include <cmath>
#include <numbers>

namespace tmera::gates {
namespace {

using qcore::kron;
using qcore::pauli;

struct Factor {
  CMatrix fixed;  // used when angle < 0
  CMatrix sigma;
  int angle = -1;
};

CMatrix on_qubit(const CMatrix& m, int qubit) {
  const CMatrix id = CMatrix::Identity(2, 2);
  return qubit == 0 ? kron(m, id) : kron(id, m);
}

void push_euler(std::vector<Factor>& fs, int first, int dim, int qubit) {
  // R_z(a0) R_y(a1) R_z(a2): time order is a2, a1, a0
  auto lift = [&](const CMatrix& s) { return dim == 2 ? s : on_qubit(s, qubit); };
  fs.push_back({{}, lift(pauli(3)), first + 2});
  fs.push_back({{}, lift(pauli(2)), first + 1});
  fs.push_back({{}, lift(pauli(3)), first});
}

CMatrix cnot(int control) {
  CMatrix m = CMatrix::Zero(4, 4);
  if (control == 0) {
    m(0, 0) = m(1, 1) = 1;
    m(2, 3) = m(3, 2) = 1;
  } else {
    m(0, 0) = m(2, 2) = 1;
    m(1, 3) = m(3, 1) = 1;
  }
  return m;
}

const std::vector<Factor>& factors(GateForm f) {
  static const std::vector<Factor> single = [] {
    std::vector<Factor> fs;
    push_euler(fs, 0, 2, 0);
    return fs;
  }();
  static const std::vector<Factor> can = [] {
    std::vector<Factor> fs;
    push_euler(fs, 0, 4, 0);
    push_euler(fs, 3, 4, 1);
    fs.push_back({{}, kron(pauli(1), pauli(1)), 6});
    fs.push_back({{}, kron(pauli(2), pauli(2)), 7});
    fs.push_back({{}, kron(pauli(3), pauli(3)), 8});
    push_euler(fs, 9, 4, 0);
    push_euler(fs, 12, 4, 1);
    return fs;
  }();
  static const std::vector<Factor> cnot_form = [] {
    std::vector<Factor> fs;
    push_euler(fs, 0, 4, 0);
    push_euler(fs, 3, 4, 1);
    fs.push_back({cnot(1), {}, -1});
    fs.push_back({{}, on_qubit(pauli(3), 0), 6});
    fs.push_back({{}, on_qubit(pauli(2), 1), 7});
    fs.push_back({cnot(0), {}, -1});
    fs.push_back({{}, on_qubit(pauli(2), 1), 8});
    fs.push_back({cnot(1), {}, -1});
    push_euler(fs, 9, 4, 0);
    push_euler(fs, 12, 4, 1);
    return fs;
  }();
  static const std::vector<Factor> xx = {{{}, kron(pauli(1), pauli(1)), 0}};
  switch (f) {
    case GateForm::SingleQubit: return single;
    case GateForm::Can: return can;
    case GateForm::Cnot: return cnot_form;
    case GateForm::Xx: return xx;
    case GateForm::Free: break;
  }
  throw InputError("free gates have no angle factors");
}

CMatrix evaluate(GateForm f, const std::vector<double>& angles, int deriv) {
  if (static_cast<int>(angles.size()) != num_angles(f)) throw ArityError("wrong number of gate angles");
  const auto& fs = factors(f);
  const Eigen::Index d = f == GateForm::SingleQubit ? 2 : 4;
  CMatrix m = CMatrix::Identity(d, d);
  bool hit = deriv < 0;
  for (const auto& fac : fs) {
    if (fac.angle < 0) {
      m = fac.fixed * m;
      continue;
    }
    CMatrix r = qcore::rotation(fac.sigma, angles[fac.angle]);
    if (fac.angle == deriv) {
      r = cplx(0, -0.5) * fac.sigma * r;
      hit = true;
    }
    m = r * m;
  }
  if (!hit) throw ArityError("derivative index out of range");
  return m;
}

}  // namespace

std::string to_string(GateForm f) {
  switch (f) {
    case GateForm::Free: return "FREE";
    case GateForm::Can: return "CAN";
    case GateForm::Cnot: return "CNOT";
    case GateForm::SingleQubit: return "SINGLE";
    case GateForm::Xx: return "XX";
  }
  return "?";
}

GateForm gate_form_from_string(const std::string& s) {
  if (s == "FREE") return GateForm::Free;
  if (s == "CAN") return GateForm::Can;
  if (s == "CNOT") return GateForm::Cnot;
  if (s == "SINGLE") return GateForm::SingleQubit;
  if (s == "XX") return GateForm::Xx;
  throw InputError("unknown gate form: " + s);
}

int num_angles(GateForm f) {
  switch (f) {
    case GateForm::Free: return -1;
    case GateForm::Can:
    case GateForm::Cnot: return 15;
    case GateForm::SingleQubit: return 3;
    case GateForm::Xx: return 1;
  }
  return -1;
}

int gate_qubits(GateForm f) { return f == GateForm::SingleQubit ? 1 : 2; }

CMatrix gate_matrix(GateForm f, const std::vector<double>& angles) { return evaluate(f, angles, -1); }

CMatrix gate_derivative(GateForm f, const std::vector<double>& angles, int j) {
  if (j < 0) throw ArityError("derivative index out of range");
  return evaluate(f, angles, j);
}

TrotterGate make_gate(GateForm f, std::vector<double> angles) {
  if (f == GateForm::Free) throw ArityError("free gates are built from a matrix");
  TrotterGate g;
  g.form = f;
  g.matrix = gate_matrix(f, angles);
  g.angles = std::move(angles);
  return g;
}

TrotterGate free_gate(CMatrix u) {
  if (u.rows() != 2 && u.rows() != 4) throw ArityError("free gate must be 2x2 or 4x4");
  if (!qcore::is_unitary(u)) throw InputError("free gate is not unitary");
  TrotterGate g;
  g.form = GateForm::Free;
  g.matrix = std::move(u);
  return g;
}

UnitaryMatrix single_qubit(const std::array<double, 3>& e) {
  return UnitaryMatrix::unchecked(qcore::rz(e[0]) * qcore::ry(e[1]) * qcore::rz(e[2]));
}

std::array<double, 3> euler_angles(const CMatrix& u, double* phase) {
  if (u.rows() != 2 || u.cols() != 2) throw ArityError("euler_angles needs a 2x2 matrix");
  const cplx det = u.determinant();
  const cplx s = std::sqrt(det);
  const CMatrix v = u / s;  // SU(2)
  // v = [[e^{-i(a+c)/2} cos, -e^{-i(a-c)/2} sin], [e^{i(a-c)/2} sin, e^{i(a+c)/2} cos]]
  const double b = 2 * std::atan2(std::abs(v(1, 0)), std::abs(v(0, 0)));
  double sum = 0, diff = 0;
  if (std::abs(v(0, 0)) > 1e-14) sum = 2 * std::arg(v(1, 1));
  if (std::abs(v(1, 0)) > 1e-14) diff = 2 * std::arg(v(1, 0));
  if (std::abs(v(0, 0)) <= 1e-14) sum = 0;
  if (std::abs(v(1, 0)) <= 1e-14) diff = 0;
  std::array<double, 3> e{(sum + diff) / 2, b, (sum - diff) / 2};
  // fix the residual sign (the two branches differ by -1)
  const CMatrix r = single_qubit(e).matrix();
  cplx ph = s;
  if ((r - v).cwiseAbs().maxCoeff() > (r + v).cwiseAbs().maxCoeff()) ph = -s;
  if (phase) *phase = std::arg(ph);
  return e;
}

CMatrix can_core(const std::array<double, 3>& t) {
  return qcore::rotation(kron(pauli(3), pauli(3)), t[2]) * qcore::rotation(kron(pauli(2), pauli(2)), t[1]) *
         qcore::rotation(kron(pauli(1), pauli(1)), t[0]);
}

CMatrix can_matrix(const CanAngles& c) {
  return std::exp(cplx(0, c.phase)) * kron(c.post[0], c.post[1]) * can_core(c.ising) * kron(c.pre[0], c.pre[1]);
}

TrotterGate build_can(const CanAngles& c) {
  for (const auto* m : {&c.pre[0], &c.pre[1], &c.post[0], &c.post[1]})
    if (m->rows() != 2 || m->cols() != 2) throw ArityError("CAN locals must be 2x2");
  std::vector<double> a;
  for (const CMatrix* m : {&c.pre[0], &c.pre[1]})
    for (double x : euler_angles(*m)) a.push_back(x);
  for (double x : c.ising) a.push_back(x);
  for (const CMatrix* m : {&c.post[0], &c.post[1]})
    for (double x : euler_angles(*m)) a.push_back(x);
  return make_gate(GateForm::Can, std::move(a));
}

TrotterGate build_cnot_form(const std::vector<double>& angles) {
  if (angles.size() != 15) throw ArityError("CNOT form needs 15 angles");
  return make_gate(GateForm::Cnot, angles);
}

}  // namespace tmera::gates
