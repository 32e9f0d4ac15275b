#include "tmera/models.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace tmera::models {

using qcore::kron;
using qcore::pauli;

namespace {

CMatrix identity(int nq) { return CMatrix::Identity(Eigen::Index{1} << nq, Eigen::Index{1} << nq); }

// Embed a two-site operator that acts on `k` qubits at the front of each site.
CMatrix embed_sites(const CMatrix& op_pair, int k, int q) {
  if (k == q) return op_pair;
  const int n = 2 * q;
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix out = CMatrix::Zero(dim, dim);
  const int spec = q - k;
  const Eigen::Index smask = (Eigen::Index{1} << spec) - 1;
  auto split = [&](Eigen::Index x, Eigen::Index& phys, Eigen::Index& rest) {
    const Eigen::Index s1 = x >> q, s2 = x & ((Eigen::Index{1} << q) - 1);
    phys = ((s1 >> spec) << k) | (s2 >> spec);
    rest = ((s1 & smask) << spec) | (s2 & smask);
  };
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      Eigen::Index pr, rr, pc, rc;
      split(r, pr, rr);
      split(c, pc, rc);
      if (rr == rc) out(r, c) = op_pair(pr, pc);
    }
  return out;
}

}  // namespace

LocalModel tfim_term(double g, int q) {
  if (q < 1) throw EmbeddingError("tfim_term: q must be >= 1");
  const CMatrix X = pauli(1), Z = pauli(3), I = pauli(0);
  const CMatrix h2 = -kron(X, X) + (g / 2) * (kron(Z, I) + kron(I, Z));
  LocalModel m;
  m.kind = ModelKind::Tfim;
  m.name = "tfim";
  m.parameter = g;
  m.q = q;
  m.physical_qubits = {0};
  m.h = embed_sites(h2, 1, q);
  return m;
}

Eigen::MatrixXd spin1_dot() {
  const double r = std::sqrt(2.0);
  Eigen::Matrix3d sz = Eigen::Vector3d(1, 0, -1).asDiagonal();
  Eigen::Matrix3d sp = Eigen::Matrix3d::Zero();  // S+ |m> -> |m+1>
  sp(0, 1) = r;
  sp(1, 2) = r;
  const Eigen::Matrix3d sm = sp.transpose();
  Eigen::MatrixXd out = Eigen::kroneckerProduct(sz, sz);
  out += 0.5 * (Eigen::MatrixXd(Eigen::kroneckerProduct(sp, sm)) + Eigen::MatrixXd(Eigen::kroneckerProduct(sm, sp)));
  return out;
}

Eigen::MatrixXd blbq_bond(double theta) {
  const Eigen::MatrixXd x = spin1_dot();
  return std::cos(theta) * x + std::sin(theta) * x * x;
}

LocalModel blbq_term(double theta, int q, double penalty) {
  if (q < 2) throw EmbeddingError("blbq_term: a spin-1 site needs q >= 2");
  if (penalty < 0) throw InputError("blbq_term: penalty must be >= 0");
  const Eigen::MatrixXd b9 = blbq_bond(theta);
  CMatrix h16 = CMatrix::Zero(16, 16);
  for (int a = 0; a < 9; ++a)
    for (int c = 0; c < 9; ++c) h16((a / 3) * 4 + a % 3, (c / 3) * 4 + c % 3) = b9(a, c);
  CMatrix pinv = CMatrix::Zero(4, 4);
  pinv(3, 3) = 1;
  h16 += (penalty / 2) * (kron(pinv, identity(2)) + kron(identity(2), pinv));
  LocalModel m;
  m.kind = ModelKind::Blbq;
  m.name = "blbq";
  m.parameter = theta;
  m.q = q;
  m.penalty = penalty;
  m.physical_qubits = {0, 1};
  m.h = embed_sites(h16, 2, q);
  return m;
}

LocalModel make_model(const std::string& name, double parameter, int q, double penalty) {
  if (name == "tfim") return tfim_term(parameter, q);
  if (name == "blbq") return blbq_term(parameter, q, penalty);
  throw InputError("unknown model: " + name);
}

Eigen::MatrixXd tfim_chain(int N, double g) {
  const Eigen::Index dim = Eigen::Index{1} << N;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    for (int i = 0; i < N; ++i) {
      const int j = (i + 1) % N;
      const Eigen::Index bi = Eigen::Index{1} << (N - 1 - i), bj = Eigen::Index{1} << (N - 1 - j);
      H(s ^ bi ^ bj, s) -= 1;
      H(s, s) += g * ((s & bi) ? -1 : 1);
    }
  return H;
}

Eigen::MatrixXd blbq_chain(int N, double theta) {
  const Eigen::MatrixXd b9 = blbq_bond(theta);
  Eigen::Index dim = 1;
  for (int i = 0; i < N; ++i) dim *= 3;
  std::vector<Eigen::Index> pw(N);
  for (int i = 0; i < N; ++i) {
    pw[i] = 1;
    for (int k = i + 1; k < N; ++k) pw[i] *= 3;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    for (int i = 0; i < N; ++i) {
      const int j = (i + 1) % N;
      const int a = static_cast<int>((s / pw[i]) % 3), c = static_cast<int>((s / pw[j]) % 3);
      const Eigen::Index base = s - a * pw[i] - c * pw[j];
      for (int a2 = 0; a2 < 3; ++a2)
        for (int c2 = 0; c2 < 3; ++c2) {
          const double v = b9(a2 * 3 + c2, a * 3 + c);
          if (v != 0) H(base + a2 * pw[i] + c2 * pw[j], s) += v;
        }
    }
  return H;
}

}  // namespace tmera::models
