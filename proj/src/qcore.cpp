#include "tmera/qcore.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "tmera/kernels.hpp"

namespace tmera::qcore {

bool is_unitary(const CMatrix& m, double eps) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= eps;
}

bool is_hermitian(const CMatrix& m, double eps) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

int log2_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw InputError("dimension is not a power of two");
  return n;
}

double wrap_angle(double a) {
  const double two_pi = 2 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

UnitaryMatrix::UnitaryMatrix(CMatrix m) : m_(std::move(m)) {
  if (!is_unitary(m_)) throw InputError("matrix is not unitary");
}

UnitaryMatrix UnitaryMatrix::unchecked(CMatrix m) {
  UnitaryMatrix u;
  u.m_ = std::move(m);
  return u;
}

UnitaryMatrix UnitaryMatrix::identity(Eigen::Index dim) {
  return unchecked(CMatrix::Identity(dim, dim));
}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  log2_dim(m_.rows());
  if (!is_hermitian(m_)) throw InputError("density matrix is not Hermitian");
  if (std::abs(m_.trace() - cplx(1.0)) > tol::trace) throw InputError("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::hermiticity)
    throw InputError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::unchecked(CMatrix m) {
  DensityMatrix d;
  d.m_ = std::move(m);
  return d;
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  return unchecked(psi * psi.adjoint());
}

int DensityMatrix::num_qubits() const { return log2_dim(m_.rows()); }

HermitianUnitary::HermitianUnitary(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw InvalidGenerator("generator must be square");
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol::generator)
    throw InvalidGenerator("generator is not Hermitian");
  CMatrix sq = m_ * m_ - CMatrix::Identity(m_.rows(), m_.cols());
  if (sq.cwiseAbs().maxCoeff() > tol::generator) throw InvalidGenerator("generator does not square to identity");
}

CMatrix pauli(int k) {
  CMatrix p(2, 2);
  const cplx i(0, 1);
  switch (k) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, -i, i, 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: throw InputError("pauli index out of range");
  }
  return p;
}

CMatrix pauli_string(int index, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) {
    int digit = (index >> (2 * k)) & 3;
    out = kron(out, pauli(digit));
  }
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

CMatrix rotation(const CMatrix& sigma, double theta) {
  const Eigen::Index n = sigma.rows();
  return std::cos(theta / 2) * CMatrix::Identity(n, n) - cplx(0, std::sin(theta / 2)) * sigma;
}

UnitaryMatrix rotation_gate(const HermitianUnitary& sigma, double theta) {
  return UnitaryMatrix::unchecked(rotation(sigma.matrix(), theta));
}

CMatrix rx(double theta) { return rotation(pauli(1), theta); }
CMatrix ry(double theta) { return rotation(pauli(2), theta); }
CMatrix rz(double theta) { return rotation(pauli(3), theta); }

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.num_qubits();
  std::vector<int> seen(n, 0);
  for (int k : keep) {
    if (k < 0 || k >= n) throw InputError("partial_trace: qubit index out of range");
    if (seen[k]++) throw InputError("partial_trace: repeated qubit index");
  }
  return DensityMatrix::unchecked(kernels::reduce(rho.matrix(), n, keep));
}

UnitaryMatrix project_to_unitary(const CMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("project_to_unitary: matrix not square");
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < tol::singular)
    throw DegenerateProjection("project_to_unitary: singular value below threshold");
  return UnitaryMatrix::unchecked(svd.matrixU() * svd.matrixV().adjoint());
}

CMatrix expm(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n <= 8 && (a + a.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * (1 + a.cwiseAbs().maxCoeff())) {
    // a = iH with H Hermitian
    CMatrix h = cplx(0, -1) * a;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CVector ph(n);
    for (Eigen::Index k = 0; k < n; ++k) ph(k) = std::exp(cplx(0, es.eigenvalues()(k)));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  }
  return a.exp();
}

UnitaryMatrix haar_unitary(int dim, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix z(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) z(i, j) = cplx(nd(rng), nd(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    cplx d = r(k, k);
    cplx ph = std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
    q.col(k) *= ph;
  }
  return project_to_unitary(q);
}

}  // namespace tmera::qcore
