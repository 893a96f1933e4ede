// Serial vs OpenMP paths of the three parallel kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "lqs/kalman_filter.hpp"
#include "lqs/photon.hpp"
#include "lqs/system.hpp"

using namespace lqs;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

StateSpace random_system(int n, int m) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto cm = [&](int r, int c) {
    CMat X(r, c);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < c; ++k) X(i, k) = cplx(g(rng), g(rng));
    return X;
  };
  PhysicalParams p = make_params(n, m);
  p.S = Eigen::HouseholderQR<CMat>(cm(m, m)).householderQ() * CMat::Identity(m, m);
  p.C_minus = cm(m, n);
  p.C_plus = 0.3 * cm(m, n);
  const CMat H = cm(n, n), P = cm(n, n);
  p.Omega_minus = 0.5 * (H + H.adjoint());
  p.Omega_plus = 0.25 * (P + P.transpose());
  return build_state_space(p);
}

void BM_TransferGrid(benchmark::State& st) {
  const StateSpace ss = random_system(8, 4);
  std::vector<double> w(4096);
  for (size_t k = 0; k < w.size(); ++k) w[k] = -20.0 + 40.0 * (k + 0.5) / w.size();
  for (auto _ : st) benchmark::DoNotOptimize(transfer_grid(ss, w, exec_of(st)));
}
BENCHMARK(BM_TransferGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FilterEnsemble(benchmark::State& st) {
  FilterConfig c = example_oscillator_filter(1.0, 0.5);
  c.dt = 1e-3;
  c.horizon = 2.0;
  c.seed = 1;
  for (auto _ : st) benchmark::DoNotOptimize(simulate_ensemble(c, 64, exec_of(st)));
}
BENCHMARK(BM_FilterEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ModeProduct(benchmark::State& st) {
  PhysicalParams p = make_params(1, 1);
  p.C_minus(0, 0) = 1.0;
  PhotonTensor t;
  t.photons = 2;
  t.m = 1;
  t.L = 256;
  t.t0 = -4.0;
  t.dt = 0.0625;
  t.data.resize(t.L * t.L);
  for (Eigen::Index i = 0; i < t.L; ++i)
    for (Eigen::Index j = 0; j < t.L; ++j) {
      const double a = t.t0 + i * t.dt, b = t.t0 + j * t.dt;
      t.data(i * t.L + j) = std::exp(-(a * a + b * b) / 2);
    }
  for (auto _ : st) benchmark::DoNotOptimize(mode_product(p, t, 0, kDefaultPadding, exec_of(st)));
}
BENCHMARK(BM_ModeProduct)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
