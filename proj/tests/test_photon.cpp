#include <gtest/gtest.h>

#include <cmath>

#include "lqs/doubled.hpp"
#include "lqs/photon.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lqs;

namespace {

PulseShape gaussian_pulse(double t0, double dt, Eigen::Index L, double center = 0.0, double width = 1.0) {
  PulseShape p;
  p.t0 = t0;
  p.dt = dt;
  p.samples.resize(L);
  const double c = std::pow(M_PI * width * width, -0.25);
  for (Eigen::Index k = 0; k < L; ++k) {
    const double x = (p.time(k) - center) / width;
    p.samples(k) = c * std::exp(-x * x / 2);
  }
  return p;
}

double l2_diff(const CVec& a, const CVec& b, double dt) { return std::sqrt((a - b).squaredNorm() * dt); }

// Non-separable two-photon amplitude on [-4, 12) with 128 points.
PhotonTensor entangled_pair(Eigen::Index L = 128, double t0 = -4.0, double dt = 0.125) {
  PhotonTensor t;
  t.photons = 2;
  t.m = 1;
  t.L = L;
  t.t0 = t0;
  t.dt = dt;
  t.data.resize(L * L);
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < L; ++j) {
      const double a = t0 + i * dt, b = t0 + j * dt;
      t.data(i * L + j) = std::exp(-(a * a + b * b) / 2 - 0.3 * a * b) * cplx(1.0, 0.4 * (a - b));
    }
  t.data /= t.norm();
  return t;
}

}  // namespace

TEST(Photon, FftFrequencies) {
  const auto w = fft_frequencies(8, 0.5);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(w[1], 2 * M_PI / 4.0, 1e-15);
  EXPECT_NEAR(w[4], -2 * M_PI, 1e-15);
  EXPECT_NEAR(w[7], -2 * M_PI / 4.0, 1e-15);
}

TEST(Photon, UncoupledSystemPassesPulseThrough) {
  // no internal modes: the transfer function is S = I
  const PulseShape mu = gaussian_pulse(-8, 0.05, 400);
  const auto r = output_pulse_passive(make_params(0, 1), {mu});
  EXPECT_LT(l2_diff(r.pulses[0].samples, mu.samples, mu.dt), 1e-10);
}

TEST(Photon, CavitySinglePhotonMatchesClosedForm) {
  const double kappa = 2.0;
  const PulseShape mu = gaussian_pulse(-10, 0.01, 4000);
  const PulseResponse r = output_pulse_passive(test::cavity(kappa), {mu});
  CVec ref(mu.samples.size());
  for (Eigen::Index k = 0; k < ref.size(); ++k) ref(k) = oracle::cavity_gaussian_output(kappa, mu.time(k));
  EXPECT_LT(l2_diff(r.pulses[0].samples, ref, mu.dt), 1e-5);
  EXPECT_LT(std::abs(r.pulses[0].norm() - 1.0), 1e-6);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Photon, ClosedFormAgreesWithDirectSummation) {
  // checks the two oracles against each other
  const double kappa = 1.0;
  const PulseShape mu = gaussian_pulse(-8, 0.02, 1200);
  const CVec y = oracle::cavity_convolve(kappa, mu.dt, mu.samples);
  CVec ref(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) ref(k) = oracle::cavity_gaussian_output(kappa, mu.time(k));
  EXPECT_LT(l2_diff(y, ref, mu.dt), 1e-6);
}

TEST(Photon, PassiveNormPreserved) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 5; ++t) {
    PhysicalParams p = test::random_passive(rng, 2, 2);
    std::vector<PulseShape> mu{gaussian_pulse(-20, 0.01, 6000, 0.0, 1.2), gaussian_pulse(-20, 0.01, 6000, 1.0, 0.8)};
    mu[1].samples *= cplx(0.0, 1.0);
    const PulseResponse r = output_pulse_passive(p, mu);
    double in = 0, out = 0;
    for (int i = 0; i < 2; ++i) {
      in += mu[i].samples.squaredNorm() * mu[i].dt;
      out += r.pulses[i].samples.squaredNorm() * mu[i].dt;
    }
    EXPECT_LT(std::abs(std::sqrt(out) - std::sqrt(in)), 1e-6) << "draw " << t;
  }
}

TEST(Photon, Linearity) {
  const PhysicalParams p = test::cavity(1.5, 0.3);
  const PulseShape a = gaussian_pulse(-10, 0.02, 1500, 0.0, 1.0), b = gaussian_pulse(-10, 0.02, 1500, 2.0, 0.7);
  const cplx al(0.3, -1.2), be(2.0, 0.5);
  PulseShape c = a;
  c.samples = al * a.samples + be * b.samples;
  const CVec ya = output_pulse_passive(p, {a}).pulses[0].samples;
  const CVec yb = output_pulse_passive(p, {b}).pulses[0].samples;
  const CVec yc = output_pulse_passive(p, {c}).pulses[0].samples;
  EXPECT_LT((yc - al * ya - be * yb).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Photon, CoarseGridWarns) {
  const PulseShape mu = gaussian_pulse(-10, 0.5, 40);
  const PulseResponse r = output_pulse_passive(test::cavity(50.0), {mu});
  EXPECT_GT(r.nyquist_deviation, 0.1);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Photon, NonPassiveRejected) {
  const PulseShape mu = gaussian_pulse(-10, 0.1, 200);
  PhysicalParams p = test::cavity(1.0);
  p.Omega_plus(0, 0) = 0.2;
  EXPECT_THROW(output_pulse_passive(p, {mu}), PreconditionError);
  PhysicalParams q = make_params(1, 1);
  q.Omega_minus(0, 0) = 1.0;
  EXPECT_THROW(output_pulse_passive(q, {mu}), PreconditionError);
  EXPECT_THROW(output_pulse_passive(test::cavity(1.0), {mu, mu}), DimensionError);
}

TEST(Photon, SinglePhotonTensorReducesToPulse) {
  const PhysicalParams p = test::cavity(1.0, 0.2);
  const PulseShape mu = gaussian_pulse(-6, 0.05, 300);
  const PhotonTensor t = multiphoton_transform(p, separable_tensor({mu}));
  const CVec y = output_pulse_passive(p, {mu}).pulses[0].samples;
  EXPECT_EQ((t.data - y).norm(), 0.0);
}

TEST(Photon, TwoPhotonMatchesNestedLoops) {
  const double kappa = 1.0;
  const PhotonTensor psi = entangled_pair();
  const PhotonTensor out = multiphoton_transform(test::cavity(kappa), psi);
  const CVec ref = oracle::cavity_convolve_2d(kappa, psi.dt, psi.data, psi.L);
  const double err = std::sqrt((out.data - ref).squaredNorm() * psi.dt * psi.dt);
  EXPECT_LT(err, 1e-4);
}

TEST(Photon, SeparableInputStaysSeparable) {
  const PhysicalParams p = test::cavity(1.0, 0.4);
  const PulseShape a = gaussian_pulse(-6, 0.1, 160, 0.0, 1.0), b = gaussian_pulse(-6, 0.1, 160, 1.0, 0.6);
  const PhotonTensor out = multiphoton_transform(p, separable_tensor({a, b}));
  const PhotonTensor expect = separable_tensor(
      {output_pulse_passive(p, {a}).pulses[0], output_pulse_passive(p, {b}).pulses[0]});
  EXPECT_LT((out.data - expect.data).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Photon, ModeProductsCommute) {
  std::mt19937_64 rng(42);
  const PhysicalParams p = test::random_passive(rng, 2, 2);
  PhotonTensor t;
  t.photons = 2;
  t.m = 2;
  t.L = 40;
  t.dt = 0.2;
  t.data = test::random_cmat(rng, t.size(), 1);
  const PhotonTensor ab = mode_product(p, mode_product(p, t, 0), 1);
  const PhotonTensor ba = mode_product(p, mode_product(p, t, 1), 0);
  EXPECT_LT((ab.data - ba.data).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Photon, ModeProductSerialMatchesParallel) {
  const PhotonTensor psi = entangled_pair(64, -4.0, 0.25);
  const PhysicalParams p = test::cavity(1.0, 0.1);
  const PhotonTensor a = mode_product(p, psi, 0, kDefaultPadding, Exec::serial);
  const PhotonTensor b = mode_product(p, psi, 0, kDefaultPadding, Exec::parallel);
  EXPECT_EQ((a.data - b.data).norm(), 0.0);
}

TEST(Photon, TensorGuardrails) {
  PhotonTensor t;
  t.photons = 2;
  t.m = 2;
  t.L = 2000;  // (2 * 2000)^2 = 1.6e7 entries
  t.dt = 0.01;
  EXPECT_THROW(t.validate(), ResourceError);
  PulseShape big;
  big.dt = 0.01;
  big.samples = CVec::Zero(4000);
  EXPECT_THROW(separable_tensor({big, big}), ResourceError);
  PhotonTensor three;
  three.photons = 3;
  three.L = 4;
  three.dt = 1;
  three.data = CVec::Zero(64);
  EXPECT_THROW(three.validate(), ValidationError);
}

TEST(Photon, GaussianTransformPassiveKeepsVacuumBlock) {
  std::mt19937_64 rng(43);
  const PhysicalParams p = test::random_passive(rng, 2, 2);
  const StateSpace ss = build_state_space(p);
  PhotonGaussianSpec in;
  in.m = 2;
  const PulseShape g = gaussian_pulse(-10, 0.05, 600);
  PulseShape zero = g;
  zero.samples.setZero();
  in.xi_minus = {g, zero, zero, g};
  in.xi_plus = {zero, zero, zero, zero};
  CMat R = CMat::Zero(4, 4);
  R.topLeftCorner(2, 2) = CMat::Identity(2, 2);
  for (double w : {-2.0, 0.0, 0.7, 3.0}) {
    in.R_omegas.push_back(w);
    in.R.push_back(R);
  }
  const PhotonGaussianSpec out = photon_gaussian_transform(ss, in);
  for (const CMat& Ro : out.R) EXPECT_LT(opnorm(CMat(Ro - R)), 1e-10);
  for (const auto& x : out.xi_plus) EXPECT_LT(x.samples.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(out.structure_residual, 1e-12);
  // columns of xi_minus are single-photon outputs
  const auto r = output_pulse_passive(p, {g, zero});
  EXPECT_LT((out.xi_minus[0].samples - r.pulses[0].samples).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((out.xi_minus[2].samples - r.pulses[1].samples).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Photon, GaussianTransformConjugatesR) {
  std::mt19937_64 rng(44);
  StateSpace ss = build_state_space(test::random_params(rng, 1, 1));
  // random_params can be unstable with squeezing; redraw until Hurwitz
  for (int tries = 0; ss.A.eigenvalues().real().maxCoeff() >= 0; ++tries) {
    ASSERT_LT(tries, 100);
    ss = build_state_space(test::random_params(rng, 1, 1));
  }
  PhotonGaussianSpec in;
  in.m = 1;
  const PulseShape g = gaussian_pulse(-10, 0.05, 400);
  in.xi_minus = {g};
  in.xi_plus = {gaussian_pulse(-10, 0.05, 400, 1.0, 0.5)};
  const CMat H = test::random_cmat(rng, 2, 2);
  in.R_omegas = {0.4};
  in.R = {H * H.adjoint()};
  const PhotonGaussianSpec out = photon_gaussian_transform(ss, in);
  const CMat Xi = transfer_function(ss, cplx(0, 0.4)).value;
  EXPECT_LT(opnorm(CMat(out.R[0] - Xi * in.R[0] * Xi.adjoint())), 1e-12);
  EXPECT_LT(out.structure_residual, 1e-12);
}

TEST(Photon, GaussianTransformIdentitySystem) {
  const StateSpace ss = build_state_space(make_params(0, 1));
  PhotonGaussianSpec in;
  in.m = 1;
  in.xi_minus = {gaussian_pulse(-5, 0.05, 200)};
  in.xi_plus = {gaussian_pulse(-5, 0.05, 200, 0.5, 0.7)};
  const PhotonGaussianSpec out = photon_gaussian_transform(ss, in);
  EXPECT_LT((out.xi_minus[0].samples - in.xi_minus[0].samples).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((out.xi_plus[0].samples - in.xi_plus[0].samples).cwiseAbs().maxCoeff(), 1e-10);
  PhotonGaussianSpec bad = in;
  bad.R_omegas = {1.0};
  EXPECT_THROW(photon_gaussian_transform(ss, bad), DimensionError);
}
