// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lqs/doubled.hpp"
#include "lqs/gaussian.hpp"
#include "lqs/kalman_filter.hpp"
#include "lqs/network.hpp"
#include "lqs/photon.hpp"
#include "lqs/structure.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lqs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. realizability of randomly drawn parameters
Outcome realizability() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> d(1, 4), dl(0, 2);
  double worst = 0.0;
  bool all = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < 100; ++t) {
    const StateSpace ss = build_state_space(test::random_params(rng, d(rng), d(rng), dl(rng)));
    const RealizabilityReport r = check_realizability(ss, 1e-12);
    worst = std::max({worst, r.residual_A, r.residual_B});
    all = all && r.passes;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {all && worst <= 1e-12 && secs < 5.0, fmt("worst residual %.2e", worst) + fmt(", %.3f s", secs)};
}

// 2. flat-unitarity of the transfer function on the imaginary axis
Outcome transfer_unitarity() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> d(1, 4);
  std::vector<double> w;
  for (int k = 0; k < 50; ++k) w.push_back(-10.0 + 20.0 * (k + 0.5) / 50);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const StateSpace ss = build_state_space(test::random_params(rng, d(rng), d(rng)));
    const int m = ss.m();
    for (const CMat& X : transfer_grid(ss, w))
      worst = std::max(worst, opnorm(CMat(flat_adjoint(X) * X - CMat::Identity(2 * m, 2 * m))));
  }
  return {worst <= 1e-9, fmt("worst ||X^flat X - I|| %.2e", worst)};
}

// 3. filter on the single-mode oscillator
Outcome filter() {
  const auto t0 = std::chrono::steady_clock::now();
  FilterConfig c = example_oscillator_filter(1.0, 0.0);
  c.seed = 2024;  // vacuum start: zero mean
  const RiccatiTrajectory ric = integrate_riccati(c);
  double v2 = 0.0;
  for (const RMat& V : ric.V) v2 = std::max(v2, std::abs(V(0, 1)));
  double drift = 0.0;
  for (std::uint64_t path = 0; path < 100; ++path) {
    const FilterTrajectory f = simulate_filter(c, ric, path, nullptr, false);
    for (const RVec& m : f.mean) drift = std::max(drift, std::abs(m(1)));
  }
  FilterConfig r = example_oscillator_filter(1.0, 0.5);
  r.seed = 2025;
  const Ensemble e = simulate_ensemble(r, 500);
  double s = 0, s2 = 0;
  for (const auto& p : e.paths) {
    s += p.mean.back()(1);
    s2 += p.mean.back()(1) * p.mean.back()(1);
  }
  const double mu = s / 500, var = (s2 - 500 * mu * mu) / 499;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = v2 <= 1e-12 && drift <= 1e-12 && var > 1e-4 && secs < 30.0;
  return {ok, fmt("max|V2| %.1e", v2) + fmt(", max pi(p) drift %.1e", drift) + fmt(", var pi_T(p) at w=0.5 %.3e", var) +
                  fmt(", %.2f s", secs)};
}

// 4. optomechanical decomposition
Outcome decomposition() {
  const double G = 0.7;
  const KalmanDecomposition kd = kalman_decompose(to_quadrature(build_state_space(test::optomech(1.0, G, 2.0))));
  const bool dims = kd.dims.n_h == 2 && kd.dims.n_co == 1 && kd.dims.n_cbar_obar == 0;
  const KalmanDecomposition k0 = apply_transform(kd, to_quadrature(build_state_space(test::optomech(1.0, G, 0.0))));
  // order (q_h1, q_h2, p_h1, p_h2, q_c, p_c); q_h2 = -p_+
  const RMat& A = k0.A_bar;
  const double c_pplus = -A(1, 4);
  const double e1 = std::abs(c_pplus + 2 * std::sqrt(2.0) * G);
  const double e2 = A.row(4).cwiseAbs().maxCoeff();
  const bool bae = check_bae(kd, BaeDirection::p_in_to_q_out).holds && check_bae(kd, BaeDirection::q_in_to_p_out).holds;
  const bool ok = dims && e1 <= 1e-10 && e2 <= 1e-10 && bae;
  return {ok, "dims (" + std::to_string(kd.dims.n_h) + "," + std::to_string(kd.dims.n_co) + "," +
                  std::to_string(kd.dims.n_cbar_obar) + ")" + fmt(", q_c coefficient error %.1e", e1) +
                  fmt(", |dq_c/dt| row %.1e", e2) + (bae ? ", BAE both ways" : ", BAE fails")};
}

// 5. spin / membrane / laser network
Outcome network() {
  const double Gs = 0.3, Gm = 0.5, kext = 1.2, phi = 0.4;
  auto node = [](const std::string& mode, cplx cq, cplx cp) {
    SLHNode g;
    g.label = mode;
    g.modes = {mode};
    g.S = CMat::Identity(1, 1);
    g.Lambda = CMat(1, 2);
    g.Lambda << cq, cp;
    g.lambda0 = CVec::Zero(1);
    g.H = RMat::Zero(2, 2);
    g.h = RVec::Zero(2);
    return g;
  };
  const SLHNode spin = node("s", std::sqrt(2 * Gs), 0.0), mem = node("m", cplx(0, -std::sqrt(2 * Gm)), 0.0);
  SLHNode laser = node("l", std::sqrt(kext / 2), cplx(0, std::sqrt(kext / 2)));
  laser.lambda0(0) = 0.7;

  // (q_s, q_m, p_s, p_m)
  RMat H1 = RMat::Zero(4, 4);
  H1(0, 1) = H1(1, 0) = 2 * std::sqrt(Gm * Gs);
  const double e1 = (series_detailed(mem, spin).H_interaction - H1).cwiseAbs().maxCoeff();

  // (q_l, q_s, p_l, p_s)
  RMat H2 = RMat::Zero(4, 4);
  H2(1, 2) = H2(2, 1) = std::sqrt(kext * Gs);
  const double e2 = (series_detailed(spin, laser).H_interaction - H2).cwiseAbs().maxCoeff();

  const SLHNode first = apply_static(phase_shifter(phi), series(mem, spin));
  RMat H3 = RMat::Zero(4, 4);
  H3(0, 1) = H3(1, 0) = (1 - std::cos(phi)) * 2 * std::sqrt(Gm * Gs);
  H3(0, 0) = 2 * 2 * std::sin(phi) * Gs;
  const double e3 = (series(spin, first).H - H3).cwiseAbs().maxCoeff();
  const double worst = std::max({e1, e2, e3});
  return {worst <= 1e-12, fmt("q_m q_s %.1e", e1) + fmt(", q_s p_l %.1e", e2) + fmt(", H_eff %.1e", e3)};
}

// 6. photon response of a cavity
Outcome photon() {
  const auto t0 = std::chrono::steady_clock::now();
  const double kappa = 2.0;
  PulseShape mu;
  mu.t0 = -10.0;
  mu.dt = 0.01;
  mu.samples.resize(4000);
  for (Eigen::Index k = 0; k < 4000; ++k) mu.samples(k) = std::pow(M_PI, -0.25) * std::exp(-mu.time(k) * mu.time(k) / 2);
  const PulseShape nu = output_pulse_passive(test::cavity(kappa), {mu}).pulses[0];
  CVec ref(4000);
  for (Eigen::Index k = 0; k < 4000; ++k) ref(k) = oracle::cavity_gaussian_output(kappa, mu.time(k));
  const double e1 = std::sqrt((nu.samples - ref).squaredNorm() * mu.dt);
  const double e2 = std::abs(nu.norm() - 1.0);

  PhotonTensor psi;
  psi.photons = 2;
  psi.m = 1;
  psi.L = 128;
  psi.t0 = -4.0;
  psi.dt = 0.125;
  psi.data.resize(128 * 128);
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < 128; ++j) {
      const double a = psi.t0 + i * psi.dt, b = psi.t0 + j * psi.dt;
      psi.data(i * 128 + j) = std::exp(-(a * a + b * b) / 2 - 0.3 * a * b) * cplx(1.0, 0.4 * (a - b));
    }
  psi.data /= psi.norm();
  const PhotonTensor out = multiphoton_transform(test::cavity(1.0), psi);
  const CVec ref2 = oracle::cavity_convolve_2d(1.0, psi.dt, psi.data, psi.L);
  const double e3 = std::sqrt((out.data - ref2).squaredNorm() * psi.dt * psi.dt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = e1 <= 1e-5 && e2 <= 1e-6 && e3 <= 1e-4 && secs < 60.0;
  return {ok, fmt("single-photon L2 error %.2e", e1) + fmt(", |norm-1| %.1e", e2) + fmt(", two-photon L2 error %.2e", e3) +
                  fmt(", %.2f s", secs)};
}

// 7. uncertainty relations
Outcome uncertainty() {
  const double vac = uncertainty_report(GaussianState::vacuum(1)).heisenberg_lhs;
  bool ok = vac == 0.5;
  double worst = 0.0, min_excess = 1e300;
  for (double nbar : {0.5, 1.0, 2.0})
    for (double r : {0.0, 0.4}) {
      GaussianState s = GaussianState::vacuum(1);
      s.cov(0, 0) = (nbar + 0.5) * std::exp(-2 * r);
      s.cov(1, 1) = (nbar + 0.5) * std::exp(2 * r);
      const UncertaintyReport u = uncertainty_report(s, 60);
      worst = std::max(worst, std::abs(u.luo_lhs - 0.25));
      min_excess = std::min(min_excess, u.heisenberg_lhs - 0.5);
    }
  ok = ok && worst <= 1e-3 && min_excess > 0.0;
  return {ok, fmt("vacuum Heisenberg %.17g", vac) + fmt(", worst |U_q U_p - 1/4| %.2e", worst) +
                  fmt(", min Heisenberg excess %.3f", min_excess)};
}

// 8. pure-state generation
Outcome pure_state() {
  RMat X(1, 1), Y(1, 1);
  X << 0.2;
  Y << 1.5;
  const PureStateGenerator g =
      pure_state_generator(X, Y, RMat::Zero(1, 1), RMat::Zero(1, 1), RMat::Identity(1, 1));
  const double res = (g.steady_cov - 0.5 * g.S * g.S.transpose()).cwiseAbs().maxCoeff();
  const bool pure = is_pure(GaussianState{RVec::Zero(2), g.steady_cov}, 1e-8);
  return {res <= 1e-8 && pure, fmt("steady vs target %.2e", res) + (pure ? ", pure" : ", not pure")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"realizability", realizability}, {"transfer unitarity", transfer_unitarity},
      {"filter", filter},               {"decomposition", decomposition},
      {"network", network},             {"photon response", photon},
      {"uncertainty", uncertainty},     {"pure state", pure_state}};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}
