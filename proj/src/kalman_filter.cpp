#include "lqs/kalman_filter.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "lqs/doubled.hpp"

namespace lqs {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double validity_eig(const RMat& V) {
  const int n = static_cast<int>(V.rows() / 2);
  const CMat H = V.cast<cplx>() + 0.5 * kI * JJ(n).cast<cplx>();
  return Eigen::SelfAdjointEigenSolver<CMat>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double record_scale(FilterForm f) { return f == FilterForm::normalized ? 1.0 / std::sqrt(2.0) : 1.0; }

void check_finite(const RVec& x, long step) {
  if (!x.allFinite() || x.norm() > 1e12)
    throw DivergenceError("filter mean diverged at step " + std::to_string(step));
}

// Shared Euler-Maruyama loop. `noise` returns dnu for step k; the measurement
// increment is formed first and dnu is recomputed from it so replay is exact.
template <class NoiseFn>
FilterTrajectory run_filter(const FilterConfig& cfg, const RiccatiTrajectory& ric, NoiseFn&& noise, const DriveFn& drive,
                            bool keep_cov) {
  const long steps = cfg.steps();
  const double dt = cfg.dt;
  const double sc = record_scale(cfg.form);
  const int m = static_cast<int>(cfg.C1.rows());
  const int l = cfg.qs.l();
  FilterTrajectory tr;
  tr.times.reserve(steps + 1);
  tr.mean.reserve(steps + 1);
  tr.innovation.reserve(steps);
  tr.measurement_increments.reserve(steps);
  tr.measurement.reserve(steps + 1);
  RVec pi = cfg.initial_mean;
  RVec Q = RVec::Zero(m);
  tr.times.push_back(0.0);
  tr.mean.push_back(pi);
  tr.measurement.push_back(Q);
  if (keep_cov) tr.cov = ric.V;
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const RMat K = filter_gain(cfg.C1, cfg.M, ric.V[k], cfg.form);
    const RVec pred = cfg.C1 * pi * dt;
    const RVec dQ = noise(k, pred);
    const RVec dnu = (dQ - pred) / sc;
    RVec drift = cfg.qs.A * pi;
    if (drive && l > 0) {
      const RVec u = drive(t);
      if (u.size() != 2 * l) throw DimensionError("filter drive must return a vector of length 2l");
      drift += cfg.qs.E * u;
    }
    pi = pi + drift * dt + K * dnu;
    check_finite(pi, k + 1);
    Q += dQ;
    tr.times.push_back((k + 1) * dt);
    tr.mean.push_back(pi);
    tr.innovation.push_back(dnu);
    tr.measurement_increments.push_back(dQ);
    tr.measurement.push_back(Q);
  }
  return tr;
}

}  // namespace

void FilterConfig::validate() const {
  const Eigen::Index N = qs.A.rows();
  if (qs.A.cols() != N || N % 2) throw DimensionError("filter config: A must be 2n x 2n");
  if (C1.cols() != N || C1.rows() > qs.C.rows()) throw DimensionError("filter config: C1 must be m x 2n");
  if (M.rows() != N || M.cols() != C1.rows()) throw DimensionError("filter config: M must be 2n x m");
  if (!(dt > 0.0)) throw ParameterError("dt", dt, "filter config: dt must be positive");
  if (!(horizon >= 0.0)) throw ParameterError("horizon", horizon, "filter config: horizon must be non-negative");
  if (initial_mean.size() != N) throw DimensionError("filter config: initial_mean must have length 2n");
  if (initial_cov.rows() != N || initial_cov.cols() != N) throw DimensionError("filter config: initial_cov must be 2n x 2n");
  const double asym = N ? (initial_cov - initial_cov.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-12) throw ParameterError("initial_cov", asym, "filter config: initial_cov not symmetric");
  if (N) {
    const double e = validity_eig(initial_cov);
    if (e < -1e-10) throw ParameterError("initial_cov", e, "filter config: initial_cov is not a valid quantum covariance");
  }
}

long FilterConfig::steps() const { return static_cast<long>(std::llround(horizon / dt)); }

FilterConfig make_filter_config(const QuadratureSystem& qs, double dt, double horizon, std::uint64_t seed,
                                const RVec& initial_mean, const RMat& initial_cov, FilterForm form) {
  FilterConfig c;
  c.qs = qs;
  const int m = qs.m();
  const int N = static_cast<int>(qs.A.rows());
  c.C1 = qs.C.topRows(m);
  c.M = qs.B.leftCols(m) / std::sqrt(2.0);
  if (c.C1.cols() != N) throw DimensionError("make_filter_config: C has wrong width");
  c.dt = dt;
  c.horizon = horizon;
  c.seed = seed;
  c.initial_mean = initial_mean;
  c.initial_cov = initial_cov;
  c.form = form;
  c.validate();
  return c;
}

FilterConfig example_oscillator_filter(double kappa, double omega, FilterForm form) {
  if (!(kappa > 0.0)) throw ParameterError("kappa", kappa, "example_oscillator_filter: kappa must be positive");
  QuadratureSystem qs;
  qs.A.resize(2, 2);
  qs.A << -kappa / 2, omega, -omega, -kappa / 2;
  qs.B = -std::sqrt(kappa) * RMat::Identity(2, 2);
  qs.C = std::sqrt(kappa) * RMat::Identity(2, 2);
  qs.D = RMat::Identity(2, 2);
  qs.E = RMat::Zero(2, 0);
  const RMat V0 = form == FilterForm::as_published ? RMat(RMat::Identity(2, 2)) : RMat(0.5 * RMat::Identity(2, 2));
  return make_filter_config(qs, 1e-3 / kappa, 10.0 / kappa, 0, RVec::Zero(2), V0, form);
}

RMat filter_gain(const RMat& C1, const RMat& M, const RMat& V, FilterForm form) {
  const double g = form == FilterForm::normalized ? std::sqrt(2.0) : 1.0;
  return g * V * C1.transpose() + M;
}

RMat riccati_rhs(const QuadratureSystem& qs, const RMat& C1, const RMat& M, const RMat& V, FilterForm form) {
  const RMat K = filter_gain(C1, M, V, form);
  const RMat R = qs.A * V + V * qs.A.transpose() + 0.5 * qs.B * qs.B.transpose() - K * K.transpose();
  return 0.5 * (R + R.transpose());
}

RiccatiTrajectory integrate_riccati(const FilterConfig& cfg) {
  cfg.validate();
  const long steps = cfg.steps();
  const double dt = cfg.dt;
  auto f = [&](const RMat& V) { return riccati_rhs(cfg.qs, cfg.C1, cfg.M, V, cfg.form); };
  RiccatiTrajectory r;
  r.times.reserve(steps + 1);
  r.V.reserve(steps + 1);
  RMat V = cfg.initial_cov;
  r.times.push_back(0.0);
  r.V.push_back(V);
  for (long k = 1; k <= steps; ++k) {
    const RMat k1 = f(V), k2 = f(V + 0.5 * dt * k1), k3 = f(V + 0.5 * dt * k2), k4 = f(V + dt * k3);
    RMat Vn = V + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    r.max_asymmetry = std::max(r.max_asymmetry, (Vn - Vn.transpose()).cwiseAbs().maxCoeff());
    V = 0.5 * (Vn + Vn.transpose());
    if (!V.allFinite() || V.norm() > 1e12)
      throw DivergenceError("integrate_riccati: covariance diverged at step " + std::to_string(k));
    if (k % 10 == 0 || k == steps) {
      const double e = validity_eig(V);
      r.min_validity_eig = std::min(r.min_validity_eig, e);
      if (cfg.form == FilterForm::normalized && e < -1e-6) {
        std::ostringstream os;
        os << "integrate_riccati: covariance left the valid set (min eig " << e << ") at step " << k;
        throw DivergenceError(os.str());
      }
    }
    r.times.push_back(k * dt);
    r.V.push_back(V);
  }
  if (steps == 0) r.min_validity_eig = validity_eig(V);
  return r;
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) : key_(splitmix(seed ^ splitmix(path + 0x632be59bd9b4e019ULL))) {}

PathRng::result_type PathRng::operator()() { return splitmix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

FilterTrajectory simulate_filter(const FilterConfig& cfg, std::uint64_t path, const DriveFn& drive) {
  const RiccatiTrajectory ric = integrate_riccati(cfg);
  return simulate_filter(cfg, ric, path, drive, true);
}

FilterTrajectory simulate_filter(const FilterConfig& cfg, const RiccatiTrajectory& ric, std::uint64_t path,
                                 const DriveFn& drive, bool keep_cov) {
  if (static_cast<long>(ric.V.size()) != cfg.steps() + 1)
    throw DimensionError("simulate_filter: Riccati trajectory does not match the config grid");
  PathRng rng(cfg.seed, path);
  std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.dt));
  const double sc = record_scale(cfg.form);
  const Eigen::Index m = cfg.C1.rows();
  auto noise = [&](long, const RVec& pred) {
    RVec dnu(m);
    for (Eigen::Index i = 0; i < m; ++i) dnu(i) = gauss(rng);
    return RVec(sc * dnu + pred);
  };
  return run_filter(cfg, ric, noise, drive, keep_cov);
}

FilterTrajectory replay_filter(const FilterConfig& cfg, const std::vector<RVec>& dQ, const DriveFn& drive) {
  if (static_cast<long>(dQ.size()) != cfg.steps())
    throw DimensionError("replay_filter: record length does not match the config grid");
  const RiccatiTrajectory ric = integrate_riccati(cfg);
  auto noise = [&](long k, const RVec&) {
    if (dQ[k].size() != cfg.C1.rows()) throw DimensionError("replay_filter: record entry has wrong length");
    return dQ[k];
  };
  return run_filter(cfg, ric, noise, drive, true);
}

Ensemble simulate_ensemble(const FilterConfig& cfg, int n_paths, Exec exec, const DriveFn& drive) {
  if (n_paths < 0) throw ParameterError("n_paths", n_paths, "simulate_ensemble: negative path count");
  Ensemble e;
  e.riccati = integrate_riccati(cfg);
  e.paths.resize(n_paths);
  if (exec == Exec::serial) {
    for (int p = 0; p < n_paths; ++p) e.paths[p] = simulate_filter(cfg, e.riccati, p, drive, false);
    return e;
  }
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < n_paths; ++p) {
    try {
      e.paths[p] = simulate_filter(cfg, e.riccati, p, drive, false);
    } catch (...) {
#pragma omp critical
      err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return e;
}

}  // namespace lqs
