#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tmera {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

// Error kinds. Numerical failures are distinguished from bad input so the CLI
// can map them to different exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};

namespace tol {
inline constexpr double unitarity = 1e-10;
inline constexpr double hermiticity = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double generator = 1e-12;
inline constexpr double singular = 1e-12;
}  // namespace tol

namespace qcore {

struct InvalidGenerator : InputError {
  using InputError::InputError;
};
struct DegenerateProjection : NumericalError {
  using NumericalError::NumericalError;
};

bool is_unitary(const CMatrix& m, double eps = tol::unitarity);
bool is_hermitian(const CMatrix& m, double eps = tol::hermiticity);

// Square complex matrix with U^dagger U = 1 checked on construction.
class UnitaryMatrix {
 public:
  UnitaryMatrix() = default;
  explicit UnitaryMatrix(CMatrix m);
  static UnitaryMatrix unchecked(CMatrix m);
  static UnitaryMatrix identity(Eigen::Index dim);

  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  UnitaryMatrix adjoint() const { return unchecked(m_.adjoint()); }
  UnitaryMatrix operator*(const UnitaryMatrix& o) const { return unchecked(m_ * o.m_); }

 private:
  CMatrix m_;
};

// Hermitian, positive semidefinite, unit trace; dimension 2^n.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix m);
  static DensityMatrix unchecked(CMatrix m);
  static DensityMatrix pure(const CVector& psi);

  const CMatrix& matrix() const { return m_; }
  int num_qubits() const;

 private:
  CMatrix m_;
};

// sigma = sigma^dagger and sigma^2 = 1; the generator of rotation_gate.
class HermitianUnitary {
 public:
  explicit HermitianUnitary(CMatrix m);
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

CMatrix pauli(int k);                 // 0:I 1:X 2:Y 3:Z
CMatrix pauli_string(int index, int n);  // base-4 digits, qubit 0 most significant
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_all(std::span<const CMatrix> factors);

// exp(-i theta sigma / 2) = cos(theta/2) 1 - i sin(theta/2) sigma
UnitaryMatrix rotation_gate(const HermitianUnitary& sigma, double theta);
CMatrix rotation(const CMatrix& sigma, double theta);
CMatrix rx(double theta);
CMatrix ry(double theta);
CMatrix rz(double theta);

// Reduced state on `keep`, ordered as given.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

// Nearest unitary in Frobenius norm (polar factor via SVD).
UnitaryMatrix project_to_unitary(const CMatrix& m);

// Matrix exponential. Skew-Hermitian inputs up to dimension 8 use an
// eigendecomposition, everything else scaling-and-squaring Pade.
CMatrix expm(const CMatrix& a);

UnitaryMatrix haar_unitary(int dim, Rng& rng);

int log2_dim(Eigen::Index dim);
double wrap_angle(double a);  // into (-pi, pi]

}  // namespace qcore
}  // namespace tmera
