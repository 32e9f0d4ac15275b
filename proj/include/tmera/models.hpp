#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tmera/qcore.hpp"

namespace tmera::models {

enum class ModelKind { Tfim, Blbq };

struct EmbeddingError : InputError {
  using InputError::InputError;
};
struct NoReference : InputError {
  using InputError::InputError;
};

// Two-site term on the (2^q)^2 space of two q-qubit sites.
struct LocalModel {
  ModelKind kind = ModelKind::Tfim;
  std::string name;        // "tfim" or "blbq"
  double parameter = 0;    // g or theta
  int q = 1;
  double penalty = 0;      // BLBQ invalid-state penalty
  std::vector<int> physical_qubits;  // within a site block
  CMatrix h;
};

// -XX + (g/2)(Z1 + 1Z) on the designated qubits.
LocalModel tfim_term(double g, int q);
// cos(theta) S.S + sin(theta) (S.S)^2 with spin 1 on the first two qubits of
// each site, basis |+1>,|0>,|-1> -> |00>,|01>,|10>; |11> penalized by lambda/2 per site.
LocalModel blbq_term(double theta, int q, double penalty = 10.0);
LocalModel make_model(const std::string& name, double parameter, int q, double penalty = 10.0);

// Spin-1 two-site operator S.S in the 9-dim basis (m1, m2), m ordered +1, 0, -1.
Eigen::MatrixXd spin1_dot();
Eigen::MatrixXd blbq_bond(double theta);  // 9x9

// Periodic-chain Hamiltonians, dense (small N only).
Eigen::MatrixXd tfim_chain(int N, double g);
Eigen::MatrixXd blbq_chain(int N, double theta);

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;
// Lowest eigenvalue of a real symmetric operator by Lanczos with full reorthogonalization.
double lanczos_ground(const MatVec& apply, Eigen::Index dim, std::uint64_t seed = 1, int max_iter = 300);

// Energies per site.
double tfim_infinite(double g);           // free-fermion dispersion integral
double tfim_finite(double g, int N);      // periodic chain, exact
double tfim_ed(double g, int N);          // Lanczos on the spin chain
double blbq_ed(double theta, int N);      // Lanczos in the Sz = 0 sector

struct BlbqExtrapolation {
  std::vector<int> sizes;
  std::vector<double> energies;
  double value = 0;
  double uncertainty = 0;
};
BlbqExtrapolation blbq_extrapolate(double theta, const std::vector<int>& sizes = {6, 8, 10, 12});

struct ReferenceEnergy {
  std::string model;
  double parameter = 0;
  std::string method;  // "free-fermion-integral" or "ed-extrapolation"
  double value = 0;
  double uncertainty = 0;
};

inline constexpr int reference_generator_version = 1;

// Computed once and cached under $TMERA_CACHE_DIR (default .tmera-cache).
ReferenceEnergy reference_energy(const LocalModel& m);
ReferenceEnergy compute_reference(const LocalModel& m);
std::string cache_file();

}  // namespace tmera::models
