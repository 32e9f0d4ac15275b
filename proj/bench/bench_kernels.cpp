// OpenMP kernels against their serial references, plus one full energy gradient.
#include <benchmark/benchmark.h>

#include <array>

#include "tmera/gradients.hpp"
#include "tmera/kernels.hpp"

using namespace tmera;

namespace {

CMatrix random_density(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  const Eigen::Index d = Eigen::Index(1) << n;
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = cplx(nd(rng), nd(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

CVector random_state(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  CVector v(Eigen::Index(1) << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(nd(rng), nd(rng));
  return v.normalized();
}

template <void (*Apply)(CMatrix&, int, const CMatrix&, std::span<const int>)>
void BM_apply_dm(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(1);
  const CMatrix g = qcore::haar_unitary(4, rng).matrix();
  CMatrix rho = random_density(n, 2);
  const std::array<int, 2> q{1, n - 1};
  for (auto _ : st) {
    Apply(rho, n, g, q);
    benchmark::DoNotOptimize(rho.data());
  }
}

template <void (*Apply)(CVector&, int, const CMatrix&, std::span<const int>)>
void BM_apply_sv(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(1);
  const CMatrix g = qcore::haar_unitary(4, rng).matrix();
  CVector psi = random_state(n, 3);
  const std::array<int, 2> q{0, n / 2};
  for (auto _ : st) {
    Apply(psi, n, g, q);
    benchmark::DoNotOptimize(psi.data());
  }
}

template <CMatrix (*Reduce)(const CMatrix&, int, std::span<const int>)>
void BM_reduce(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const CMatrix rho = random_density(n, 4);
  const std::array<int, 2> keep{n - 1, 0};
  for (auto _ : st) benchmark::DoNotOptimize(Reduce(rho, n, keep));
}

void BM_gradient(benchmark::State& st, bool parallel) {
  network::InitSpec init;
  init.mode = network::InitMode::Random;
  init.seed = 5;
  const auto s = network::build_network(network::NetworkKind::ModBinary1D, 2, 1, 1, network::NetworkForm::Free, init);
  const simulator::Evaluator ev(s, models::tfim_term(1.0, 1));
  for (auto _ : st)
    benchmark::DoNotOptimize(parallel ? gradients::measurement_gradient(ev, s).energy
                                      : gradients::measurement_gradient_serial(ev, s).energy);
}

}  // namespace

BENCHMARK(BM_apply_dm<kernels::apply_dm>)->Name("apply_dm/omp")->DenseRange(4, 8, 2);
BENCHMARK(BM_apply_dm<kernels::apply_dm_serial>)->Name("apply_dm/serial")->DenseRange(4, 8, 2);
BENCHMARK(BM_apply_sv<kernels::apply_sv>)->Name("apply_sv/omp")->DenseRange(8, 16, 4);
BENCHMARK(BM_apply_sv<kernels::apply_sv_serial>)->Name("apply_sv/serial")->DenseRange(8, 10, 2);
BENCHMARK(BM_reduce<kernels::reduce>)->Name("reduce/omp")->DenseRange(4, 8, 2);
BENCHMARK(BM_reduce<kernels::reduce_serial>)->Name("reduce/serial")->DenseRange(4, 8, 2);
BENCHMARK_CAPTURE(BM_gradient, omp, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_gradient, serial, false)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
