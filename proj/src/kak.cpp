#include <algorithm>
#include <cmath>
#include <numbers>

#include "tmera/gates.hpp"

namespace tmera::gates {
namespace {

using qcore::kron;
using qcore::pauli;
constexpr double pi = std::numbers::pi;

CMatrix magic_basis() {
  const cplx i(0, 1);
  CMatrix m(4, 4);
  m << 1, i, 0, 0,
       0, 0, i, 1,
       0, 0, i, -1,
       1, -i, 0, 0;
  return m / std::sqrt(2.0);
}

// a = a1 (x) a2 for a 4x4 local unitary
std::array<CMatrix, 2> kron_factor(const CMatrix& a) {
  int bi = 0, bj = 0;
  double best = -1;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double nrm = a.block(2 * i, 2 * j, 2, 2).norm();
      if (nrm > best) best = nrm, bi = i, bj = j;
    }
  CMatrix a2 = a.block(2 * bi, 2 * bj, 2, 2);
  a2 /= std::sqrt(a2.determinant());
  CMatrix a1(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a1(i, j) = (a2.adjoint() * a.block(2 * i, 2 * j, 2, 2)).trace() / 2.0;
  if ((kron(a1, a2) - a).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericalDegeneracy("kak: local factor is not a tensor product");
  return {a1, a2};
}

// Moves that keep can_matrix(c) fixed while changing the Ising angles.
void shift(CanAngles& c, int ax, int dir) {
  const CMatrix s = pauli(ax + 1);
  c.ising[ax] += dir * pi;
  c.pre[0] = s * c.pre[0];
  c.pre[1] = s * c.pre[1];
  c.phase += dir * pi / 2;
}

// negate the two Ising angles other than `keep`
void flip(CanAngles& c, int keep) {
  const CMatrix s = pauli(keep + 1);
  for (int a = 0; a < 3; ++a)
    if (a != keep) c.ising[a] = -c.ising[a];
  c.post[0] = c.post[0] * s;
  c.pre[0] = s * c.pre[0];
}

void swap_axes(CanAngles& c, int a, int b) {
  const cplx i(0, 1);
  CMatrix p(2, 2);
  if ((a == 0 && b == 1) || (a == 1 && b == 0))
    p << 1, 0, 0, i;
  else if ((a == 0 && b == 2) || (a == 2 && b == 0)) {
    p << 1, 1, 1, -1;
    p /= std::sqrt(2.0);
  } else
    p = qcore::rx(pi / 2);
  std::swap(c.ising[a], c.ising[b]);
  for (int q = 0; q < 2; ++q) {
    c.post[q] = c.post[q] * p.adjoint();
    c.pre[q] = p * c.pre[q];
  }
}

void canonicalize(CanAngles& c) {
  for (int a = 0; a < 3; ++a) {
    while (c.ising[a] > pi / 2) shift(c, a, -1);
    while (c.ising[a] <= -pi / 2) shift(c, a, +1);
  }
  for (int pass = 0; pass < 2; ++pass)
    for (int a = 0; a < 2; ++a)
      if (std::abs(c.ising[a]) < std::abs(c.ising[a + 1])) swap_axes(c, a, a + 1);
  if (c.ising[0] < 0) flip(c, 1);
  if (c.ising[1] < 0) flip(c, 0);
}

}  // namespace

CanAngles kak_decompose(const UnitaryMatrix& uin) {
  const CMatrix& u = uin.matrix();
  if (u.rows() != 4 || u.cols() != 4) throw ArityError("kak_decompose needs a 4x4 unitary");
  const CMatrix M = magic_basis();
  const cplx det = u.determinant();
  const CMatrix us = u * std::pow(det, -0.25);
  const CMatrix v = M.adjoint() * us * M;
  const CMatrix gamma = v.transpose() * v;
  const Eigen::MatrixXd gr = gamma.real(), gi = gamma.imag();

  // Gamma is symmetric unitary, so its real and imaginary parts commute and
  // share a real orthogonal eigenbasis; a generic real combination finds it.
  static const double mix[] = {0.7316, 1.2974, -0.4721, 2.9035, -1.8117, 0.1093};
  Eigen::MatrixXd q;
  bool ok = false;
  for (double c : mix) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gr + c * gi);
    q = es.eigenvectors();
    const CMatrix d = q.transpose().cast<cplx>() * gamma * q.cast<cplx>();
    CMatrix off = d;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() < 1e-9) {
      ok = true;
      break;
    }
  }
  if (!ok) throw NumericalDegeneracy("kak: could not diagonalize the magic-basis Gram matrix");
  if (q.determinant() < 0) q.col(0) = -q.col(0);

  const CMatrix qc = q.cast<cplx>();
  const CMatrix lam = qc.transpose() * gamma * qc;
  Eigen::Vector4d psi;
  for (int k = 0; k < 4; ++k) psi(k) = std::arg(lam(k, k)) / 2;
  auto o1_of = [&](const Eigen::Vector4d& ph) {
    CMatrix dinv = CMatrix::Zero(4, 4);
    for (int k = 0; k < 4; ++k) dinv(k, k) = std::exp(cplx(0, -ph(k)));
    return CMatrix(v * qc * dinv);
  };
  CMatrix o1 = o1_of(psi);
  if (o1.real().determinant() < 0) {
    psi(0) += pi;
    o1 = o1_of(psi);
  }
  if (o1.imag().cwiseAbs().maxCoeff() > 1e-7) throw NumericalDegeneracy("kak: left factor is not real");

  const CMatrix a = M * o1.real().cast<cplx>() * M.adjoint();
  const CMatrix b = M * qc.transpose() * M.adjoint();

  // Solve psi_k = c0 + sum_a c_a lambda_a(k) with lambda the magic-basis
  // eigenvalues of XX, YY, ZZ.
  Eigen::Matrix4d sys;
  for (int k = 0; k < 4; ++k) {
    sys(k, 0) = 1;
    for (int ax = 1; ax <= 3; ++ax) {
      const CMatrix s = M.adjoint() * kron(pauli(ax), pauli(ax)) * M;
      sys(k, ax) = s(k, k).real();
    }
  }
  const Eigen::Vector4d coef = sys.colPivHouseholderQr().solve(psi);

  CanAngles c;
  const auto af = kron_factor(a), bf = kron_factor(b);
  c.post = {af[0], af[1]};
  c.pre = {bf[0], bf[1]};
  // exp(i c sigma sigma) = R(-2c)
  c.ising = {-2 * coef(1), -2 * coef(2), -2 * coef(3)};
  canonicalize(c);

  c.phase = 0;
  const CMatrix rec = can_matrix(c);
  const cplx overlap = (rec.adjoint() * u).trace();
  c.phase = std::arg(overlap);
  if ((can_matrix(c) - u).cwiseAbs().maxCoeff() > 1e-8) throw NumericalDegeneracy("kak: reconstruction failed");
  return c;
}

std::vector<double> can_form_angles(const CMatrix& u) {
  return build_can(kak_decompose(UnitaryMatrix(u))).angles;
}

std::vector<double> cnot_form_angles(const CMatrix& u) {
  const CanAngles cu = kak_decompose(UnitaryMatrix(u));
  // The interior of the CNOT form with angles (a, b, c) is locally equivalent
  // to the CAN core (pi/2 - a, pi/2 + b, pi/2 + c).
  std::vector<double> a(15, 0.0);
  a[6] = pi / 2 - cu.ising[0];
  a[7] = cu.ising[1] - pi / 2;
  a[8] = cu.ising[2] - pi / 2;
  const CanAngles cw = kak_decompose(UnitaryMatrix(build_cnot_form(a).matrix));
  for (int k = 0; k < 3; ++k)
    if (std::abs(cw.ising[k] - cu.ising[k]) > 1e-9) throw NumericalDegeneracy("cnot form: interior class mismatch");
  const std::array<CMatrix, 4> locals = {cw.pre[0].adjoint() * cu.pre[0], cw.pre[1].adjoint() * cu.pre[1],
                                         cu.post[0] * cw.post[0].adjoint(), cu.post[1] * cw.post[1].adjoint()};
  const int slot[4] = {0, 3, 9, 12};
  for (int k = 0; k < 4; ++k) {
    const auto e = euler_angles(locals[k]);
    for (int j = 0; j < 3; ++j) a[slot[k] + j] = e[j];
  }
  const CMatrix g = build_cnot_form(a).matrix;
  const cplx ov = (g.adjoint() * u).trace() / 4.0;
  if (std::abs(std::abs(ov) - 1) > 1e-8) throw NumericalDegeneracy("cnot form: reconstruction failed");
  return a;
}

}  // namespace tmera::gates
