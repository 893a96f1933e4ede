#pragma once

#include <string>
#include <vector>

#include "lqs/system.hpp"

namespace lqs {

// (S, L, H) with L = Lambda x + lambda0 and H = 1/2 x^T H x + h^T x over
// x = (q_1..q_n, p_1..p_n). Modes carry labels; series products merge modes with
// equal labels, so a system with several channels can appear at several places
// in a cascade as long as its Hamiltonian is attached to only one of them.
struct SLHNode {
  std::string label;
  std::vector<std::string> modes;
  CMat S;        // m x m
  CMat Lambda;   // m x 2n
  CVec lambda0;  // m
  RMat H;        // 2n x 2n symmetric
  RVec h;        // 2n

  int n() const { return static_cast<int>(modes.size()); }
  int m() const { return static_cast<int>(S.rows()); }
  int mode_index(const std::string& mode) const;  // -1 if absent
  void validate(double tol = 1e-10) const;
};

SLHNode node_from_params(const PhysicalParams& p, const std::vector<std::string>& modes, const std::string& label = "");
// Drops lambda0 and h; see node_quadrature for the affine parts.
PhysicalParams node_params(const SLHNode& g);

// Channels only, no modes: S = U, L = 0, H = 0.
SLHNode static_node(const CMat& U, const std::string& label = "static");
SLHNode identity_channels(int m);

struct StaticComponent {
  CMat unitary;
};
StaticComponent phase_shifter(double phi);
StaticComponent beamsplitter(double theta, double phase = 0.0);
SLHNode apply_static(const StaticComponent& c, const SLHNode& g);

SLHNode concatenation(const SLHNode& g1, const SLHNode& g2);

// g2 after g1. Merged mode order: modes of g1, then new modes of g2.
struct SeriesResult {
  SLHNode node;
  RMat H_interaction;  // quadratic form of the interaction term, merged coordinates
  RVec h_interaction;  // linear part generated by offsets
};
SeriesResult series_detailed(const SLHNode& g2, const SLHNode& g1);
SLHNode series(const SLHNode& g2, const SLHNode& g1);

// Permutes modes into the given label order (must be a permutation).
SLHNode reorder_modes(const SLHNode& g, const std::vector<std::string>& order);

struct NodeQuadrature {
  QuadratureSystem qs;
  RVec drift;          // JJ (h + Im(Lambda^dagger lambda0))
  RVec output_offset;  // sqrt2 [Re lambda0; Im lambda0]
};
NodeQuadrature node_quadrature(const SLHNode& g);

// Direct coupling H_int = 1/2 (a_p^dagger Xi^dagger a_k + a_k^dagger Xi a_p), Xi = Delta(i K-, i K+).
struct DirectCoupling {
  CMat B12;  // -Delta(K-, K+)^flat, 2 n_p x 2 n_k
  CMat B21;  // Delta(K-, K+), 2 n_k x 2 n_p
};
DirectCoupling direct_coupling(const CMat& Kminus, const CMat& Kplus);

// Channel partition of a system that takes part in a feedback loop.
// Plant: inputs {p1 free, p2 signal+vacuum, p3 from controller}, outputs {f free, m measured, k to controller}.
// Controller: inputs {k1 from plant, k2, k3 signal+vacuum}, outputs {p to plant, f, m}.
struct PartitionedSystem {
  QuadratureSystem qs;
  std::vector<int> input_group;   // per channel, 0/1/2
  std::vector<int> output_group;  // per channel, 0/1/2
  void validate() const;
};

struct ClosedLoopSystem {
  RMat A_cl, B_cl, E_cl, G_cl, C_cl, D_cl;
  // Free physical outputs [p_f; p_m; k_f; k_m] driven by [U_p1; U_p2; U_k2; U_k3].
  RMat C_out, D_out;
  int n_p = 0, n_k = 0;
  // quadrature column counts of the noise inputs p1, p2, k2, k3
  std::vector<int> noise_blocks;
  int e_k_cols = 0;  // drive columns contributed by the controller
  // (A_cl, G_cl, C_out, D_out) with states and noise inputs permuted to the q-then-p order
  QuadratureSystem as_system() const;
};

struct Performance {
  RMat C_p, C_k, D_z;
};

ClosedLoopSystem closed_loop(const PartitionedSystem& plant, const PartitionedSystem& controller,
                             const DirectCoupling* coupling = nullptr, const Performance* perf = nullptr);

}  // namespace lqs
