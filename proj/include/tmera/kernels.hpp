#pragma once

#include <span>

#include "tmera/qcore.hpp"

// Register-level kernels on n-qubit density matrices and state vectors.
// The default entry points are OpenMP-parallel; the *_serial variants are
// straightforward reference implementations (full operator embedding) kept
// for tests and the benchmark.
namespace tmera::kernels {

// Full 2^n operator for a gate acting on `qubits`.
CMatrix embed(const CMatrix& g, int n, std::span<const int> qubits);

// rho <- G rho G^dagger
void apply_dm(CMatrix& rho, int n, const CMatrix& g, std::span<const int> qubits);
void apply_dm_serial(CMatrix& rho, int n, const CMatrix& g, std::span<const int> qubits);

// m <- G m  and  m <- m G^dagger
void apply_left(CMatrix& m, int n, const CMatrix& g, std::span<const int> qubits);
void apply_right_adjoint(CMatrix& m, int n, const CMatrix& g, std::span<const int> qubits);

// psi <- G psi
void apply_sv(CVector& psi, int n, const CMatrix& g, std::span<const int> qubits);
void apply_sv_serial(CVector& psi, int n, const CMatrix& g, std::span<const int> qubits);

// Partial trace keeping `keep` in the listed order.
CMatrix reduce(const CMatrix& rho, int n, std::span<const int> keep);
CMatrix reduce_serial(const CMatrix& rho, int n, std::span<const int> keep);
// Partial trace removing `drop`; survivors keep their relative order.
CMatrix trace_out(const CMatrix& rho, int n, std::span<const int> drop);
// Reduced density matrix of a pure state on `keep`.
CMatrix reduce_state(const CVector& psi, int n, std::span<const int> keep);

// rho (x) |0..0><0..0| with k fresh qubits appended after the last qubit.
CMatrix append_zero(const CMatrix& rho, int n, int k);
// <0..0| h |0..0> on the last k of h's n qubits (adjoint of append_zero).
CMatrix project_zero(const CMatrix& h, int n, int k);
// Adjoint of trace_out: h acts on the survivors, identity on `positions`
// of the n_out-qubit result.
CMatrix insert_identity(const CMatrix& h, int n_out, std::span<const int> positions);
// New qubit k is old qubit order[k].
CMatrix permute(const CMatrix& rho, int n, std::span<const int> order);
CVector permute_state(const CVector& psi, int n, std::span<const int> order);
// <psi| O |psi> for a Hermitian O on `qubits`.
double expectation_sv(const CVector& psi, int n, const CMatrix& op, std::span<const int> qubits);

// Tr over everything except `qubits` of (b y), returned on `qubits`.
CMatrix env_trace(const CMatrix& b, const CMatrix& y, int n, std::span<const int> qubits);

}  // namespace tmera::kernels
