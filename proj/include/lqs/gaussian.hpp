#pragma once

#include <string>
#include <vector>

#include "lqs/system.hpp"

namespace lqs {

// Convention [x, x^T] = i JJ, vacuum covariance I/2.
struct GaussianState {
  RVec mean;  // 2n
  RMat cov;   // 2n x 2n, symmetrized second moment 1/2 <dx dx^T + (dx dx^T)^T>
  int n() const { return static_cast<int>(mean.size() / 2); }

  static GaussianState vacuum(int n);
  static GaussianState thermal(int n, double nbar);
  // Single-mode squeezed vacuum with q variance e^{-2r}/2.
  static GaussianState squeezed(double r);
};

// Checks shapes and symmetry; throws DimensionError / ParameterError.
void validate_state(const GaussianState& s, double tol = 1e-12);

struct ValidityResult {
  bool valid = false;
  double min_eig_plus = 0.0;   // of V + i/2 JJ
  double min_eig_minus = 0.0;  // of V - i/2 JJ
  double min_eig() const { return std::min(min_eig_plus, min_eig_minus); }
};

ValidityResult is_valid(const GaussianState& s, double tol = 1e-10);
bool is_pure(const GaussianState& s, double tol = 1e-10);

double wigner(const GaussianState& s, const RVec& w);
// Tr[rho exp(i x^T JJ beta)] = exp(i mu^T JJ beta - 1/2 (JJ beta)^T V (JJ beta)).
cplx characteristic(const GaussianState& s, const RVec& beta);

// Integral of the Wigner function by tensor Gauss-Hermite quadrature, scaled to
// the state's covariance. n <= 2 only.
double wigner_normalization(const GaussianState& s, int nodes = 64);

// Symplectic eigenvalues nu_k (>= 1/2 for valid states, vacuum 1/2).
std::vector<double> symplectic_eigenvalues(const RMat& cov);

// Converts a covariance between the I/2 (here) and the unit-vacuum convention.
RMat cov_to_unit_vacuum(const RMat& cov);
RMat cov_from_unit_vacuum(const RMat& cov);

struct MomentSample {
  double t = 0.0;
  GaussianState state;
};

// Measurement-free moments: d mu = A mu dt, dV/dt = A V + V A^T + 1/2 B B^T (RK4).
std::vector<MomentSample> evolve_moments(const QuadratureSystem& qs, const GaussianState& s0, double horizon,
                                         double dt, int record_every = 1);

// Solves A V + V A^T + Q = 0; throws PreconditionError if A is not Hurwitz.
RMat lyapunov_steady(const RMat& A, const RMat& Q);
RMat steady_covariance(const QuadratureSystem& qs);

struct PureStateGenerator {
  RMat H;          // quadrature Hamiltonian, 2n x 2n
  CMat Lambda;     // K x 2n coupling, L = Lambda x
  RMat S;          // [[Y^{-1/2}, 0], [X Y^{-1/2}, Y^{1/2}]]
  RMat target_cov;  // 1/2 S S^T
  RMat steady_cov;  // Lyapunov solution of the generated system
  double residual = 0.0;
  bool target_pure = false;
  int controllability_rank = 0;
  PhysicalParams params;  // full parameterization, S = I
  QuadratureSystem system;
};

PureStateGenerator pure_state_generator(const RMat& X, const RMat& Y, const RMat& R, const RMat& Gamma,
                                        const RMat& P, double tol = 1e-8);

struct FockDensity {
  int dim = 0;
  CMat rho;
  double trace = 0.0;
  double moment_residual = 0.0;
  std::vector<std::string> warnings;
};

// Squeezed displaced thermal state matching (mean, cov); n = 1 only.
// With auto_grow the truncation doubles until the moment residual is below 1e-5 or N = 512.
FockDensity gaussian_to_fock(const GaussianState& s, int N, bool auto_grow = false);

// Truncated ladder operator and quadratures on N levels.
CMat fock_annihilation(int N);
CMat fock_q(int N);
CMat fock_p(int N);

double fock_variance(const FockDensity& rho, const CMat& X);
double skew_information(const FockDensity& rho, const CMat& X);
double luo_uncertainty(const FockDensity& rho, const CMat& X);

struct UncertaintyReport {
  double heisenberg_lhs = 0.0;  // std(q) std(p)
  double heisenberg_rhs = 0.5;
  double U_q = 0.0;
  double U_p = 0.0;
  double luo_lhs = 0.0;  // U_q U_p
  double luo_rhs = 0.25;
  double I_q = 0.0, I_p = 0.0, V_q = 0.0, V_p = 0.0;
  int N = 0;
  double moment_residual = 0.0;
  std::vector<std::string> warnings;
};

// auto_grow as in gaussian_to_fock.
UncertaintyReport uncertainty_report(const GaussianState& s, int N = 60, bool auto_grow = false);

}  // namespace lqs
