#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <numbers>

#include "oracles.hpp"
#include "tmera/kernels.hpp"
#include "tmera/models.hpp"

using namespace tmera;
using namespace tmera::models;
using qcore::kron;
using qcore::pauli;
using std::numbers::pi;

namespace {

// -sum X X + g sum Z on a periodic chain, built directly from Pauli factors.
CMatrix textbook_tfim(int N, double g) {
  const int d = 1 << N;
  CMatrix H = CMatrix::Zero(d, d);
  for (int i = 0; i < N; ++i) {
    H -= oracle::embed(kron(pauli(1), pauli(1)), N, {i, (i + 1) % N});
    H += g * oracle::embed(pauli(3), N, {i});
  }
  return H;
}

// Spin-1 operators in the basis +1, 0, -1.
Eigen::Matrix3cd spin(int axis) {
  const double r = 1 / std::sqrt(2.0);
  Eigen::Matrix3cd s = Eigen::Matrix3cd::Zero();
  if (axis == 0) s(0, 1) = s(1, 0) = s(1, 2) = s(2, 1) = r;
  if (axis == 1) {
    s(0, 1) = s(1, 2) = cplx(0, -r);
    s(1, 0) = s(2, 1) = cplx(0, r);
  }
  if (axis == 2) s(0, 0) = 1, s(2, 2) = -1;
  return s;
}

CMatrix textbook_bond(double theta) {
  CMatrix x = CMatrix::Zero(9, 9);
  for (int a = 0; a < 3; ++a) x += kron(spin(a), spin(a));
  return std::cos(theta) * x + std::sin(theta) * x * x;
}

std::vector<double> eigenvalues(const CMatrix& h) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

}  // namespace

TEST_CASE("TFIM bond term spectrum") {
  // blocks {00,11}: [[g,-1],[-1,-g]] and {01,10}: [[0,-1],[-1,0]]
  const double g = 1.25, r = std::sqrt(1 + g * g);
  const auto ev = eigenvalues(tfim_term(g, 1).h);
  const std::vector<double> want{-r, -1, 1, r};
  for (int k = 0; k < 4; ++k) CHECK(ev[k] == doctest::Approx(want[k]).epsilon(1e-14));
  CHECK(r == doctest::Approx(1.6007810593582121).epsilon(1e-15));
  CHECK(tfim_term(0.3, 1).h.isApprox(tfim_term(0.3, 1).h.adjoint(), 1e-15));
}

TEST_CASE("TFIM at g=0 is the classical ferromagnet") {
  CHECK(tfim_infinite(0) == doctest::Approx(-1).epsilon(1e-12));
  CHECK(tfim_ed(0, 8) == doctest::Approx(-1).epsilon(1e-12));
}

TEST_CASE("spectator qubits carry no energy") {
  Rng rng(4);
  const auto m = tfim_term(0.7, 2);
  CHECK(m.physical_qubits == std::vector<int>{0});
  const CVector psi = qcore::haar_unitary(4, rng).matrix().col(0);  // on the two designated qubits
  double first = 0;
  for (int rep = 0; rep < 4; ++rep) {
    const CVector s = qcore::haar_unitary(4, rng).matrix().col(0);  // spectators
    // qubits: site A = (0,1), site B = (2,3); designated 0 and 2
    CVector full = kron(psi, s);
    const std::vector<int> order{0, 2, 1, 3};
    full = kernels::permute_state(full, 4, order);
    const std::vector<int> all{0, 1, 2, 3};
    const double e = kernels::expectation_sv(full, 4, m.h, all);
    if (rep == 0) first = e;
    CHECK(e == doctest::Approx(first).epsilon(1e-13));
  }
  CHECK(first == doctest::Approx((psi.adjoint() * tfim_term(0.7, 1).h * psi)(0, 0).real()).epsilon(1e-13));
}

TEST_CASE("BLBQ bond spectrum at the ULS point") {
  const auto ev = eigenvalues(CMatrix(blbq_bond(pi / 4).cast<cplx>()));
  int zeros = 0, roots = 0;
  for (double e : ev) zeros += std::abs(e) < 1e-12, roots += std::abs(e - std::sqrt(2.0)) < 1e-12;
  CHECK(zeros == 3);
  CHECK(roots == 6);
  CHECK((CMatrix(blbq_bond(0.37).cast<cplx>()) - textbook_bond(0.37)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(blbq_term(0.1, 1), EmbeddingError);
}

TEST_CASE("BLBQ penalty keeps the ground state valid") {
  const auto free = blbq_term(pi / 4, 2, 0.0);
  const auto pen = blbq_term(pi / 4, 2, 10.0);
  // projector onto valid two-site states (neither site in |11>)
  CMatrix P = CMatrix::Zero(16, 16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != 3 && b != 3) P(4 * a + b, 4 * a + b) = 1;
  for (int a = 0; a < 4; ++a) {
    const int idx = 4 * 3 + a;
    CHECK(free.h.col(idx).norm() < 1e-15);
  }
  CHECK((pen.h * P - P * pen.h).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(pen.h);
  const CVector gs = es.eigenvectors().col(0);
  CHECK((gs - P * gs).norm() < 1e-12);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0).scale(1));
}

TEST_CASE("bond sums reproduce the textbook chains") {
  for (int N : {4, 6, 8}) {
    const double g = 0.83;
    const CMatrix H = textbook_tfim(N, g);
    CHECK((CMatrix(tfim_chain(N, g).cast<cplx>()) - H).cwiseAbs().maxCoeff() < 1e-13);
    CMatrix S = CMatrix::Zero(H.rows(), H.cols());
    const auto m = tfim_term(g, 1);
    for (int i = 0; i < N; ++i) S += oracle::embed(m.h, N, {i, (i + 1) % N});
    CHECK((S - H).cwiseAbs().maxCoeff() < 1e-13);
  }
  // spin-1 chain through the 2-qubit embedding; valid states m -> bits m
  for (int N : {4, 6}) {
    const double th = 0.61;
    const auto m = blbq_term(th, 2, 10.0);
    const Eigen::MatrixXd ref = blbq_chain(N, th);
    const int nq = 2 * N;
    Eigen::Index dim3 = 1;
    for (int i = 0; i < N; ++i) dim3 *= 3;
    auto embed_index = [&](Eigen::Index s) {
      Eigen::Index out = 0;
      for (int i = 0; i < N; ++i) {
        out = out * 4 + s / static_cast<Eigen::Index>(std::pow(3, N - 1 - i)) % 3;
      }
      return out;
    };
    double worst = 0;
    for (Eigen::Index c = 0; c < dim3; ++c) {
      CVector v = CVector::Zero(Eigen::Index{1} << nq);
      v(embed_index(c)) = 1;
      CVector hv = CVector::Zero(v.size());
      for (int i = 0; i < N; ++i) {
        CVector w = v;
        const int j = (i + 1) % N;
        kernels::apply_sv(w, nq, m.h, std::vector<int>{2 * i, 2 * i + 1, 2 * j, 2 * j + 1});
        hv += w;
      }
      for (Eigen::Index r = 0; r < dim3; ++r) worst = std::max(worst, std::abs(hv(embed_index(r)) - ref(r, c)));
    }
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("TFIM infinite-chain reference") {
  // trapezoid oracle, values frozen from it
  CHECK(tfim_infinite(0.75) == doctest::Approx(-1.146479754370767).epsilon(1e-13));
  CHECK(tfim_infinite(1.25) == doctest::Approx(-1.459761885650907).epsilon(1e-13));
  CHECK(std::abs(tfim_infinite(0.75) - oracle::tfim_trapezoid(0.75, 2048)) < 1e-12);
  CHECK(std::abs(tfim_infinite(1.25) - oracle::tfim_trapezoid(1.25, 2048)) < 1e-12);
  // g = 1 has a kink in the integrand; the trapezoid needs many points
  const double crit = oracle::tfim_trapezoid(1.0, 1 << 20);
  CHECK(std::abs(crit + 4 / pi) < 1e-11);
  CHECK(std::abs(tfim_infinite(1.0) + 4 / pi) < 1e-12);
  // large g: e = -g - 1/(4g) + O(g^-3)
  for (double g : {20.0, 50.0}) CHECK(std::abs(tfim_infinite(g) - (-g - 1 / (4 * g))) < 1 / (g * g * g));
  // sign convention from a dense 4-site diagonalization
  CHECK(eigenvalues(textbook_tfim(4, 20))[0] / 4 == doctest::Approx(-20.0125).epsilon(1e-5));
}

TEST_CASE("finite chains: exact free fermions, Lanczos and the finite-size envelope") {
  for (double g : {0.75, 1.0, 1.25}) {
    const double fin = tfim_finite(g, 16);
    CHECK(std::abs(tfim_ed(g, 16) - fin) < 1e-10);
    // CFT correction at criticality is pi v c / (6 N^2) per site with v = 2, c = 1/2
    CHECK(std::abs(fin - tfim_infinite(g)) <= pi / (6.0 * 16 * 16) * 1.01);
  }
  CHECK(tfim_finite(1.25, 16) == doctest::Approx(-1.459964724526162).epsilon(1e-13));
  CHECK(std::abs(tfim_ed(0.9, 8) - eigenvalues(textbook_tfim(8, 0.9))[0] / 8) < 1e-10);
}

TEST_CASE("reference energies and the cache") {
  const auto dir = std::filesystem::temp_directory_path() / "tmera-models-cache";
  std::filesystem::remove_all(dir);
  setenv("TMERA_CACHE_DIR", dir.c_str(), 1);
  const auto m = tfim_term(1.05, 1);
  const auto a = reference_energy(m);
  CHECK(std::filesystem::exists(cache_file()));
  const auto b = reference_energy(m);
  CHECK(a.value == b.value);
  CHECK(a.method == "free-fermion-integral");
  CHECK(a.value == tfim_infinite(1.05));
  CHECK_THROWS_AS(reference_energy(blbq_term(0.3, 2)), NoReference);
  unsetenv("TMERA_CACHE_DIR");
  std::filesystem::remove_all(dir);
}

TEST_CASE("BLBQ extrapolation brackets the Bethe-ansatz value") {
  // ULS point: h = (P + 1)/sqrt2 with P the site swap; SU(3) Sutherland gives
  // e_P = 1 - ln 3 - pi / (3 sqrt 3) per site
  const double exact = (2 - std::log(3.0) - pi / (3 * std::sqrt(3.0))) / std::sqrt(2.0);
  CHECK(exact == doctest::Approx(0.2098612).epsilon(1e-6));
  const auto x = blbq_extrapolate(pi / 4);
  REQUIRE(x.energies.size() == 4);
  CHECK(x.uncertainty > 0);
  CHECK(std::abs(x.value - exact) <= x.uncertainty);
  // the small-size ED agrees with dense diagonalization of the spin-1 chain
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blbq_chain(6, pi / 4));
  CHECK(x.energies[0] == doctest::Approx(es.eigenvalues()(0) / 6).epsilon(1e-10));
}
