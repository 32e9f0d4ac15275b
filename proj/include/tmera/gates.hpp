#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tmera/qcore.hpp"

namespace tmera::gates {

using qcore::UnitaryMatrix;

// Parametrization of one gate. Single-qubit and XX gates are the building
// blocks of the XX-block network form.
enum class GateForm { Free, Can, Cnot, SingleQubit, Xx };

std::string to_string(GateForm f);
GateForm gate_form_from_string(const std::string& s);
int num_angles(GateForm f);  // -1 for Free
int gate_qubits(GateForm f);  // 1 or 2; Free gates carry their own size

struct ArityError : InputError {
  using InputError::InputError;
};
struct NumericalDegeneracy : NumericalError {
  using NumericalError::NumericalError;
};

struct TrotterGate {
  GateForm form = GateForm::Free;
  CMatrix matrix;              // 2x2 or 4x4 unitary
  std::vector<double> angles;  // empty for Free

  int num_qubits() const { return matrix.rows() == 2 ? 1 : 2; }
};

// Build a gate from its angles; also used to rebuild after angle updates.
TrotterGate make_gate(GateForm f, std::vector<double> angles);
TrotterGate free_gate(CMatrix u);
CMatrix gate_matrix(GateForm f, const std::vector<double>& angles);
// d gate / d angles[j]
CMatrix gate_derivative(GateForm f, const std::vector<double>& angles, int j);

// R_z(a) R_y(b) R_z(c)
UnitaryMatrix single_qubit(const std::array<double, 3>& euler);
// Euler angles of a 2x2 unitary up to global phase; `phase` receives the
// phase so that u = e^{i phase} R_z(a) R_y(b) R_z(c).
std::array<double, 3> euler_angles(const CMatrix& u, double* phase = nullptr);

// u = e^{i phase} (post0 (x) post1) R_XX(ising[0]) R_YY(ising[1]) R_ZZ(ising[2]) (pre0 (x) pre1)
struct CanAngles {
  std::array<CMatrix, 2> pre;
  std::array<double, 3> ising{};
  std::array<CMatrix, 2> post;
  double phase = 0;
};

CMatrix can_core(const std::array<double, 3>& ising);
CMatrix can_matrix(const CanAngles& c);
// Angle order: pre0 euler, pre1 euler, xx, yy, zz, post0 euler, post1 euler.
TrotterGate build_can(const CanAngles& c);
// Angle order: l1, l2 euler; three interior rotations; l3, l4 euler.
TrotterGate build_cnot_form(const std::vector<double>& angles);
// Angles of a CNOT-form gate equal to u up to global phase.
std::vector<double> cnot_form_angles(const CMatrix& u);

// Magic-basis decomposition, canonicalized to pi/2 >= xx >= yy >= |zz|.
CanAngles kak_decompose(const UnitaryMatrix& u);

// Angles of a CAN-form gate equal to u up to global phase.
std::vector<double> can_form_angles(const CMatrix& u);

}  // namespace tmera::gates
