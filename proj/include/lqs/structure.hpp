#pragma once

#include <string>
#include <vector>

#include "lqs/system.hpp"

namespace lqs {

struct HurwitzResult {
  bool stable = false;
  double abscissa = 0.0;  // max Re(lambda(A))
};

HurwitzResult is_hurwitz(const QuadratureSystem& qs, double tol = kDefaultTol);

enum class SubspaceLabel { controllable, observable, co, c_obar, cbar_o, cbar_obar };
const char* to_string(SubspaceLabel label);

struct SubspaceBasis {
  RMat columns;  // 2n x d, orthonormal
  SubspaceLabel label = SubspaceLabel::controllable;
  std::vector<double> singular_values;
  double threshold = 0.0;  // absolute rank cut actually used
  std::vector<std::string> warnings;
  int dim() const { return static_cast<int>(columns.cols()); }
};

inline constexpr double kRankTol = 1e-9;

SubspaceBasis controllable_subspace(const QuadratureSystem& qs, double tol = kRankTol);
SubspaceBasis observable_subspace(const QuadratureSystem& qs, double tol = kRankTol);

struct KalmanDims {
  int n_h = 0;
  int n_co = 0;
  int n_cbar_obar = 0;
};

// Coordinates are ordered (q_h, p_h, x_co, x_cbar_obar) with x_co = (q_co, p_co) and
// x_cbar_obar = (q, p) of the decoherence-free block.
struct KalmanDecomposition {
  RMat T;  // x_tilde = T^T x
  KalmanDims dims;
  RMat A_bar, B_bar, C_bar, H_bar;
  CMat Lambda_h;   // V_m^dagger C_h, 2m x n_h
  CMat Lambda_co;  // V_m^dagger C_co, 2m x 2 n_co
  std::vector<int> qnd_indices, qmfs_indices, dfs_indices;
  QuadratureSystem system;  // scattering-normalized input (D = I)
  bool scattering_normalized = false;
  double pattern_residual = 0.0;
  double orthogonality_residual = 0.0;
  double symplectic_residual = 0.0;
  double rank_tol = kRankTol;
  std::vector<SubspaceBasis> subspaces;  // co, c_obar, cbar_o, cbar_obar
  std::vector<std::string> warnings;

  int offset_qh() const { return 0; }
  int offset_ph() const { return dims.n_h; }
  int offset_co() const { return 2 * dims.n_h; }
  int offset_cbo() const { return 2 * dims.n_h + 2 * dims.n_co; }
};

KalmanDecomposition kalman_decompose(const QuadratureSystem& qs, double tol = kRankTol);

// Reuses kd.T on another system of the same size, for example the same plant with a
// coupling switched off. Pattern residual is recomputed but not enforced.
KalmanDecomposition apply_transform(const KalmanDecomposition& kd, const QuadratureSystem& qs);

double kalman_pattern_residual(const KalmanDecomposition& kd);

struct DecomposedDynamics {
  RMat A_h11, A_h12, A_h22, A12, A13, A21, A_co, A31, A_cbo;
  RMat B_h, B_co, C_h, C_co;
  // Rearranged cascade, state order (q_h, x_co, x_cbar_obar, p_h).
  RMat A_cascade, B_cascade, C_cascade;
  std::vector<std::string> names;  // coordinate names in cascade order

  // One line per coordinate, e.g. "d(qco1)/dt = -1*qco1 + 2*ph2 - 1.4*u1".
  std::string to_text(double zero_tol = 1e-12) const;
};

DecomposedDynamics decomposed_dynamics(const KalmanDecomposition& kd);

enum class BaeDirection { p_in_to_q_out, q_in_to_p_out };

struct BaeResult {
  bool holds = false;
  double max_residual = 0.0;     // Kalman-form rational expression
  double direct_residual = 0.0;  // cross block of the transfer function
  bool consistent = false;       // both evaluations agree on the verdict
  int points_used = 0;
  std::vector<std::string> notes;
};

std::vector<cplx> default_bae_samples();

BaeResult check_bae(const KalmanDecomposition& kd, BaeDirection direction,
                    const std::vector<cplx>& sample_points = default_bae_samples(), double tol = kDefaultTol);

struct Prop61Report {
  int ctrb_rank = 0;
  int obsv_rank = 0;
  bool ranks_equal = false;
  bool hurwitz = false;
  bool hurwitz_implies_full = true;
  double cbo_max_abs_real = 0.0;
  bool cbo_on_imaginary_axis = true;
  bool holds = false;
};

Prop61Report verify_prop61(const QuadratureSystem& qs, double tol = kDefaultTol);

}  // namespace lqs
