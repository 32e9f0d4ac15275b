#pragma once

#include <vector>

#include "tmera/simulator.hpp"

namespace tmera::gradients {

using network::MeraState;
using simulator::Evaluator;

struct WrongParametrization : InputError {
  using InputError::InputError;
};

// g = (d - u d^dagger u) / 2, the tangent component of d at u.
CMatrix riemannian_projection(const CMatrix& u, const CMatrix& d);
// max |u^dagger w + w^dagger u|
double tangent_defect(const CMatrix& u, const CMatrix& w);

// Real flat vector of a tangent block and back (column-major, re/im interleaved).
void pack_block(const CMatrix& w, double* out);
CMatrix unpack_block(const double* in, Eigen::Index dim);

// Registry gradient: dE/dtheta for angle forms, packed Riemannian blocks for FREE.
struct Gradient {
  double energy = 0;
  Eigen::VectorXd flat;
};

// Production path: one adjoint pass.
Gradient full_gradient(const Evaluator& ev, const MeraState& s);
// Registry vector length (angles or 2 n^2 per free gate).
Eigen::Index registry_size(const MeraState& s);

// Parameter-shift rule for registry angle j: one half-difference per
// occurrence of the gate, summed.
double shift_gradient(const Evaluator& ev, const MeraState& s, int j);
// All occurrences shifted together (reported for comparison only).
double simultaneous_shift_gradient(const Evaluator& ev, const MeraState& s, int j);

// Pauli-string coefficients alpha_k = E(u R_k(-pi/2)) - E(u R_k(pi/2)),
// summed over occurrences; strings in lexicographic {I,X,Y,Z} order.
std::vector<double> pauli_alphas(const Evaluator& ev, const MeraState& s, int gate);
// g = i sum_k alpha_k u sigma_k / n
CMatrix riemannian_gradient(const Evaluator& ev, const MeraState& s, int gate);

// Full gradient from measurement-style evaluations only (shift rule or
// Pauli expansion). The parallel loop assembles in registry order.
Gradient measurement_gradient(const Evaluator& ev, const MeraState& s);
Gradient measurement_gradient_serial(const Evaluator& ev, const MeraState& s);

// Two-qubit gate applications per full measurement gradient (cost proxy).
long long gradient_cost_proxy(const Evaluator& ev, const MeraState& s);

}  // namespace tmera::gradients
