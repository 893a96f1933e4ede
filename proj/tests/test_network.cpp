#include <gtest/gtest.h>

#include <cmath>

#include "lqs/doubled.hpp"
#include "lqs/network.hpp"
#include "test_util.hpp"

using namespace lqs;

namespace {

constexpr double Gs = 0.3, Gm = 0.5, kext = 1.2, phi = 0.4;

// one mode, one channel, L = c_q q + c_p p
SLHNode mode_node(const std::string& label, const std::string& mode, cplx cq, cplx cp) {
  SLHNode g;
  g.label = label;
  g.modes = {mode};
  g.S = CMat::Identity(1, 1);
  g.Lambda = CMat(1, 2);
  g.Lambda << cq, cp;
  g.lambda0 = CVec::Zero(1);
  g.H = RMat::Zero(2, 2);
  g.h = RVec::Zero(2);
  return g;
}

SLHNode spin() { return mode_node("spin", "s", std::sqrt(2 * Gs), 0.0); }
SLHNode membrane() { return mode_node("membrane", "m", cplx(0, -std::sqrt(2 * Gm)), 0.0); }

SLHNode random_node(std::mt19937_64& rng, const std::vector<std::string>& modes, int m) {
  SLHNode g = node_from_params(test::random_params(rng, static_cast<int>(modes.size()), m), modes);
  g.lambda0 = test::random_cmat(rng, m, 1);
  g.h = test::random_rmat(rng, 2 * g.n(), 1);
  return g;
}

double node_diff(const SLHNode& a, const SLHNode& b) {
  EXPECT_EQ(a.modes, b.modes);
  return (a.S - b.S).norm() + (a.Lambda - b.Lambda).norm() + (a.lambda0 - b.lambda0).norm() + (a.H - b.H).norm() +
         (a.h - b.h).norm();
}

// Three channels with S(0,0) = 0: output 0 never sees input 0.
CMat shifted_unitary(std::mt19937_64& rng) {
  CMat P = CMat::Zero(3, 3);
  P(0, 1) = P(1, 2) = P(2, 0) = 1.0;
  CMat R = CMat::Identity(3, 3);
  R.bottomRightCorner(2, 2) = test::random_unitary(rng, 2);
  return R * P;
}

PartitionedSystem partitioned(const PhysicalParams& p, std::vector<int> in, std::vector<int> out) {
  return {to_quadrature(build_state_space(p)), std::move(in), std::move(out)};
}

}  // namespace

TEST(Network, SpinIntoMembraneInteraction) {
  const SeriesResult r = series_detailed(membrane(), spin());
  ASSERT_EQ(r.node.modes, (std::vector<std::string>{"s", "m"}));
  // x = (q_s, q_m, p_s, p_m)
  RMat H = RMat::Zero(4, 4);
  H(0, 1) = H(1, 0) = 2 * std::sqrt(Gm * Gs);
  EXPECT_LT((r.H_interaction - H).cwiseAbs().maxCoeff(), 1e-12) << r.H_interaction;
  EXPECT_LT((r.node.H - H).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Network, LaserIntoSpinInteraction) {
  SLHNode laser = mode_node("laser", "l", std::sqrt(kext / 2), cplx(0, std::sqrt(kext / 2)));
  laser.lambda0(0) = 0.7;
  const SeriesResult r = series_detailed(spin(), laser);
  ASSERT_EQ(r.node.modes, (std::vector<std::string>{"l", "s"}));
  // x = (q_l, q_s, p_l, p_s); H_int = sqrt(kext Gs) q_s p_l
  RMat H = RMat::Zero(4, 4);
  H(1, 2) = H(2, 1) = std::sqrt(kext * Gs);
  EXPECT_LT((r.H_interaction - H).cwiseAbs().maxCoeff(), 1e-12) << r.H_interaction;
  // a real amplitude cannot drive the Hermitian spin coupling
  EXPECT_EQ(r.h_interaction.norm(), 0.0);
  laser.lambda0(0) = cplx(0.0, 0.7);
  const SeriesResult ri = series_detailed(spin(), laser);
  EXPECT_NEAR(ri.h_interaction(1), 0.7 * std::sqrt(2 * Gs), 1e-15);
  EXPECT_NEAR(ri.h_interaction.norm(), 0.7 * std::sqrt(2 * Gs), 1e-15);
}

TEST(Network, PhaseShiftedLoopEffectiveHamiltonian) {
  const SLHNode s2 = spin(), s3 = spin();
  const SLHNode first = series(apply_static(phase_shifter(phi), series(membrane(), s2)), identity_channels(1));
  const SeriesResult r = series_detailed(s3, first);
  ASSERT_EQ(r.node.modes, (std::vector<std::string>{"s", "m"}));
  RMat H = RMat::Zero(4, 4);
  H(0, 1) = H(1, 0) = (1 - std::cos(phi)) * 2 * std::sqrt(Gm * Gs);
  H(0, 0) = 2 * (2 * std::sin(phi) * Gs);  // 1/2 x^T H x convention
  EXPECT_LT((r.node.H - H).cwiseAbs().maxCoeff(), 1e-12) << r.node.H;

  const cplx e = std::polar(1.0, phi);
  CMat L(1, 4);
  L << (1.0 + e) * std::sqrt(2 * Gs), -kI * e * std::sqrt(2 * Gm), 0.0, 0.0;
  EXPECT_LT((r.node.Lambda - L).cwiseAbs().maxCoeff(), 1e-12) << r.node.Lambda;
}

TEST(Network, ZeroPhaseIsIdentity) {
  const SLHNode g = membrane();
  EXPECT_LT(node_diff(apply_static(phase_shifter(0.0), g), g), 1e-15);
}

TEST(Network, SeriesWithUncoupledFirstStage) {
  std::mt19937_64 rng(51);
  const SLHNode g2 = random_node(rng, {"a", "b"}, 2);
  SLHNode g1 = random_node(rng, {"c"}, 2);
  g1.S = CMat::Identity(2, 2);
  g1.Lambda.setZero();
  g1.lambda0.setZero();
  const SeriesResult r = series_detailed(g2, g1);
  EXPECT_EQ(r.H_interaction.norm(), 0.0);
  EXPECT_EQ(r.h_interaction.norm(), 0.0);
  // merged coordinates (q_c, q_a, q_b, p_c, p_a, p_b)
  const SLHNode c = concatenation(g1, g2);
  EXPECT_LT((r.node.H - c.H).norm(), 1e-15);
  EXPECT_LT((r.node.S - g2.S).norm(), 1e-15);
  EXPECT_EQ(r.node.Lambda.col(0).norm() + r.node.Lambda.col(3).norm(), 0.0);
  const std::vector<int> cols{1, 2, 4, 5};
  for (int k = 0; k < 4; ++k) EXPECT_LT((r.node.Lambda.col(cols[k]) - g2.Lambda.col(k)).norm(), 1e-15);
  EXPECT_LT(node_diff(series(g2, identity_channels(2)), g2), 1e-15);
}

TEST(Network, SeriesIsAssociative) {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 10; ++t) {
    const SLHNode g1 = random_node(rng, {"a"}, 2), g2 = random_node(rng, {"b", "c"}, 2), g3 = random_node(rng, {"d"}, 2);
    const SLHNode left = series(series(g3, g2), g1);
    const SLHNode right = series(g3, series(g2, g1));
    EXPECT_LT(node_diff(left, right), 1e-12) << "draw " << t;
  }
}

TEST(Network, SeriesPreservesRealizability) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 20; ++t) {
    const SLHNode g1 = random_node(rng, {"a", "b"}, 2), g2 = random_node(rng, {"c"}, 2);
    const RealizabilityReport r = check_realizability(node_quadrature(series(g2, g1)).qs);
    EXPECT_LE(std::max(r.residual_A, r.residual_B), 1e-10);
    EXPECT_TRUE(r.passes);
  }
}

TEST(Network, ConcatenationIsBlockDiagonal) {
  std::mt19937_64 rng(54);
  const SLHNode a = random_node(rng, {"a"}, 1), b = random_node(rng, {"b", "c"}, 2);
  const SLHNode c = concatenation(a, b);
  EXPECT_EQ(c.m(), 3);
  EXPECT_EQ(c.n(), 3);
  EXPECT_LT((c.S.topLeftCorner(1, 1) - a.S).norm() + (c.S.bottomRightCorner(2, 2) - b.S).norm(), 1e-15);
  EXPECT_EQ(c.S.topRightCorner(1, 2).norm() + c.S.bottomLeftCorner(2, 1).norm(), 0.0);
  // H over (q_a, q_b, q_c, p_a, p_b, p_c)
  EXPECT_EQ(c.H(0, 1) + c.H(0, 2) + c.H(0, 4) + c.H(0, 5), 0.0);
  EXPECT_EQ(c.H(0, 0), a.H(0, 0));
  EXPECT_EQ(c.H(1, 2), b.H(0, 1));
  EXPECT_EQ(c.H(4, 5), b.H(2, 3));
  EXPECT_TRUE(check_realizability(node_quadrature(c).qs).passes);
  EXPECT_THROW(concatenation(a, a), CompositionError);
  EXPECT_THROW(series(a, b), DimensionError);
}

TEST(Network, DirectCouplingBlocks) {
  const DirectCoupling z = direct_coupling(CMat::Zero(1, 2), CMat::Zero(1, 2));
  EXPECT_EQ(z.B12.norm() + z.B21.norm(), 0.0);
  const DirectCoupling u = direct_coupling(CMat::Identity(1, 1), CMat::Zero(1, 1));
  EXPECT_LT(opnorm(CMat(u.B12 + CMat::Identity(2, 2))), 1e-15);
  std::mt19937_64 rng(55);
  for (int t = 0; t < 10; ++t) {
    const DirectCoupling d = direct_coupling(test::random_cmat(rng, 2, 3), test::random_cmat(rng, 2, 3));
    EXPECT_LT(opnorm(CMat(d.B21 + flat_adjoint(d.B12))), 1e-13);
    EXPECT_LT(doubled_residual(d.B21), 1e-15);
  }
}

TEST(Network, ClosedLoopIsRealizable) {
  std::mt19937_64 rng(56);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    PhysicalParams p = test::random_params(rng, 1 + t % 3, 3, t % 2);
    PhysicalParams k = test::random_params(rng, 1 + (t / 3) % 2, 3, (t / 2) % 2);
    k.S = shifted_unitary(rng);
    const PartitionedSystem P = partitioned(p, {0, 1, 2}, {0, 1, 2});
    const PartitionedSystem K = partitioned(k, {0, 1, 2}, {0, 1, 2});
    const DirectCoupling dc = direct_coupling(test::random_cmat(rng, k.n, p.n), test::random_cmat(rng, k.n, p.n));
    const ClosedLoopSystem cl = closed_loop(P, K, t % 2 ? &dc : nullptr);
    const RealizabilityReport r = check_realizability(cl.as_system());
    worst = std::max({worst, r.residual_A, r.residual_B});
    EXPECT_TRUE(r.passes) << "draw " << t;
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Network, ClosedLoopPlantBlockAndPassThrough) {
  std::mt19937_64 rng(57);
  const PhysicalParams p = test::random_params(rng, 2, 3);
  PhysicalParams k = make_params(1, 3);  // uncoupled controller mode
  k.Omega_minus(0, 0) = 0.8;
  k.S = shifted_unitary(rng);
  const PartitionedSystem P = partitioned(p, {0, 1, 2}, {0, 1, 2});
  const ClosedLoopSystem cl = closed_loop(P, partitioned(k, {0, 1, 2}, {0, 1, 2}));
  EXPECT_EQ((cl.A_cl.topLeftCorner(4, 4) - P.qs.A).norm(), 0.0);
  EXPECT_LT(cl.A_cl.topRightCorner(4, 2).norm(), 1e-15);
  EXPECT_LT(cl.A_cl.bottomLeftCorner(2, 4).norm(), 1e-15);
}

TEST(Network, DirectCouplingOnlyFillsOffDiagonal) {
  std::mt19937_64 rng(58);
  const PhysicalParams p = test::random_params(rng, 2, 1), k = test::random_params(rng, 1, 1);
  // no field connection either way
  const PartitionedSystem P = partitioned(p, {1}, {1}), K = partitioned(k, {1}, {1});
  const DirectCoupling dc = direct_coupling(test::random_cmat(rng, 1, 2), test::random_cmat(rng, 1, 2));
  const ClosedLoopSystem cl = closed_loop(P, K, &dc);
  const RMat q12 = (Vk(2) * dc.B12 * Vk(1).adjoint()).real(), q21 = (Vk(1) * dc.B21 * Vk(2).adjoint()).real();
  EXPECT_LT((cl.A_cl.topRightCorner(4, 2) - q12).norm(), 1e-14);
  EXPECT_LT((cl.A_cl.bottomLeftCorner(2, 4) - q21).norm(), 1e-14);
  EXPECT_EQ((cl.A_cl.topLeftCorner(4, 4) - P.qs.A).norm(), 0.0);
  EXPECT_EQ((cl.A_cl.bottomRightCorner(2, 2) - K.qs.A).norm(), 0.0);
  EXPECT_TRUE(check_realizability(cl.as_system()).passes);
}

TEST(Network, ClosedLoopErrors) {
  std::mt19937_64 rng(59);
  const PhysicalParams p = test::random_params(rng, 1, 3);
  PhysicalParams k = test::random_params(rng, 1, 3);
  k.S = CMat::Identity(3, 3);  // output p reads input k1 directly
  const PartitionedSystem P = partitioned(p, {0, 1, 2}, {0, 1, 2});
  EXPECT_THROW(closed_loop(P, partitioned(k, {0, 1, 2}, {0, 1, 2})), CausalityError);
  k.S = shifted_unitary(rng);
  EXPECT_THROW(closed_loop(P, partitioned(k, {0, 0, 2}, {0, 1, 2})), CompositionError);
  EXPECT_THROW(closed_loop(P, partitioned(k, {0, 1, 2}, {0, 0, 2})), CompositionError);
  EXPECT_THROW(closed_loop(P, partitioned(k, {0, 1}, {0, 1, 2})), DimensionError);
  DirectCoupling bad = direct_coupling(test::random_cmat(rng, 1, 1), test::random_cmat(rng, 1, 1));
  bad.B21(0, 0) += 0.5;  // breaks the doubled-up form
  EXPECT_THROW(closed_loop(P, partitioned(k, {0, 1, 2}, {0, 1, 2}), &bad), StructureError);
}

TEST(Network, NodeQuadratureOffsets) {
  SLHNode laser = mode_node("laser", "l", std::sqrt(kext / 2), cplx(0, std::sqrt(kext / 2)));
  laser.lambda0(0) = cplx(0.7, -0.2);
  const NodeQuadrature nq = node_quadrature(laser);
  EXPECT_NEAR(nq.output_offset(0), std::sqrt(2.0) * 0.7, 1e-15);
  EXPECT_NEAR(nq.output_offset(1), -std::sqrt(2.0) * 0.2, 1e-15);
  // drift = JJ Im(Lambda^dagger lambda0)
  const RVec im = (laser.Lambda.adjoint() * laser.lambda0).imag();
  EXPECT_LT((nq.drift - JJ(1) * im).norm(), 1e-15);
  EXPECT_TRUE(check_realizability(nq.qs).passes);
}
