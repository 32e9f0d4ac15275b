#include <doctest.h>

#include "oracles.hpp"
#include "tmera/kernels.hpp"

using namespace tmera;
namespace k = tmera::kernels;

namespace {

double maxdiff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

CMatrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> nd;
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

CMatrix density(int n, Rng& rng) {
  const CMatrix a = gaussian(1 << n, 1 << n, rng);
  CMatrix r = a * a.adjoint();
  return r / r.trace();
}

}  // namespace

TEST_CASE("parallel and serial kernels agree with the dense oracle") {
  Rng rng(21);
  const int n = 5;
  const std::vector<std::vector<int>> targets{{0}, {4}, {3, 1}, {0, 4}, {2, 0, 3}};
  for (const auto& t : targets) {
    const CMatrix g = qcore::haar_unitary(1 << t.size(), rng).matrix();
    const CMatrix rho = density(n, rng);
    const CMatrix full = oracle::embed(g, n, t);
    CHECK(maxdiff(k::embed(g, n, t), full) < 1e-14);
    const CMatrix want = full * rho * full.adjoint();
    CMatrix a = rho, b = rho;
    k::apply_dm(a, n, g, t);
    k::apply_dm_serial(b, n, g, t);
    CHECK(maxdiff(a, want) < 1e-13);
    CHECK(maxdiff(b, want) < 1e-13);

    CMatrix l = rho, r = rho;
    k::apply_left(l, n, g, t);
    k::apply_right_adjoint(r, n, g, t);
    CHECK(maxdiff(l, full * rho) < 1e-13);
    CHECK(maxdiff(r, rho * full.adjoint()) < 1e-13);

    CVector psi = gaussian(1 << n, 1, rng).col(0).normalized();
    CVector p1 = psi, p2 = psi, p3 = psi;
    k::apply_sv(p1, n, g, t);
    k::apply_sv_serial(p2, n, g, t);
    oracle::apply_gate(p3, n, g, t);
    CHECK((p1 - full * psi).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((p2 - p3).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("reductions agree with the index-summation oracle") {
  Rng rng(4);
  const int n = 4;
  const CMatrix rho = density(n, rng);
  for (const std::vector<int>& keep : {std::vector<int>{1, 3}, {3, 0, 2}, {2}}) {
    const CMatrix want = oracle::partial_trace(rho, n, keep);
    CHECK(maxdiff(k::reduce(rho, n, keep), want) < 1e-14);
    CHECK(maxdiff(k::reduce_serial(rho, n, keep), want) < 1e-14);
  }
  // trace_out keeps survivors in order
  const std::vector<int> drop{1, 2};
  CHECK(maxdiff(k::trace_out(rho, n, drop), oracle::partial_trace(rho, n, {0, 3})) < 1e-14);

  const CVector psi = gaussian(1 << n, 1, rng).col(0).normalized();
  const std::vector<int> keep{2, 0};
  CHECK(maxdiff(k::reduce_state(psi, n, keep), oracle::partial_trace(psi * psi.adjoint(), n, keep)) < 1e-14);
}

TEST_CASE("fresh-qubit helpers are adjoint pairs") {
  Rng rng(8);
  const int n = 2, f = 2;
  const CMatrix rho = density(n, rng);
  CMatrix zero = CMatrix::Zero(1 << f, 1 << f);
  zero(0, 0) = 1;
  CHECK(maxdiff(k::append_zero(rho, n, f), qcore::kron(rho, zero)) < 1e-15);

  const CMatrix h = gaussian(1 << (n + f), 1 << (n + f), rng);
  // Tr(h append(rho)) = Tr(project(h) rho)
  CHECK(std::abs((h * k::append_zero(rho, n, f)).trace() - (k::project_zero(h, n + f, f) * rho).trace()) < 1e-12);

  // Tr(x trace_out(m)) = Tr(insert_identity(x) m)
  const CMatrix m = gaussian(16, 16, rng);
  const CMatrix x = gaussian(4, 4, rng);
  const std::vector<int> drop{0, 2};
  CHECK(std::abs((x * k::trace_out(m, 4, drop)).trace() - (k::insert_identity(x, 4, drop) * m).trace()) < 1e-11);
}

TEST_CASE("permutation relabels qubits") {
  Rng rng(13);
  const int n = 3;
  const CVector psi = gaussian(8, 1, rng).col(0).normalized();
  const std::vector<int> order{2, 0, 1};
  const CVector moved = k::permute_state(psi, n, order);
  // new qubit j is old qubit order[j]
  for (int i = 0; i < 8; ++i) {
    const int b0 = (i >> 2) & 1, b1 = (i >> 1) & 1, b2 = i & 1;
    const int old = (b1 << 2) | (b2 << 1) | b0;
    CHECK(std::abs(moved(i) - psi(old)) < 1e-15);
  }
  const CMatrix rho = psi * psi.adjoint();
  CHECK(maxdiff(k::permute(rho, n, order), moved * moved.adjoint()) < 1e-15);
  CHECK_THROWS_AS(k::permute_state(psi, n, std::vector<int>{0, 0, 1}), InputError);
}

TEST_CASE("expectation and environment traces") {
  Rng rng(17);
  const int n = 4;
  const CVector psi = gaussian(16, 1, rng).col(0).normalized();
  CMatrix op = gaussian(4, 4, rng);
  op = (op + op.adjoint()).eval();
  const std::vector<int> q{3, 1};
  const CMatrix full = oracle::embed(op, n, q);
  CHECK(k::expectation_sv(psi, n, op, q) == doctest::Approx((psi.adjoint() * full * psi)(0, 0).real()).epsilon(1e-12));

  // Tr(b y) with y = embed(g): derivative of Tr(b embed(g)) w.r.t. g entries
  const CMatrix b = gaussian(16, 16, rng);
  const CMatrix g = gaussian(4, 4, rng);
  const CMatrix env = k::env_trace(b, CMatrix::Identity(16, 16), n, q);
  CHECK(std::abs((env * g).trace() - (b * oracle::embed(g, n, q)).trace()) < 1e-11);
}

TEST_CASE("kernel argument checks") {
  CMatrix rho = CMatrix::Identity(4, 4) / 4;
  CHECK_THROWS_AS(k::apply_dm(rho, 2, CMatrix::Identity(2, 2), std::vector<int>{2}), InputError);
  CHECK_THROWS_AS(k::apply_dm(rho, 2, CMatrix::Identity(4, 4), std::vector<int>{1, 1}), InputError);
  CHECK_THROWS_AS(k::apply_dm(rho, 2, CMatrix::Identity(4, 4), std::vector<int>{0}), InputError);
}
