#pragma once

#include <vector>

#include "lqs/types.hpp"

namespace lqs {

// Physical parameterization of an open linear quantum system with n modes,
// m field channels and l classical drive channels.
//   L = [C_minus C_plus] (a; a#),  H = 1/2 (a; a#)^dagger Delta(Omega_minus, Omega_plus) (a; a#)
struct PhysicalParams {
  int n = 0;
  int m = 0;
  int l = 0;
  CMat S;            // m x m unitary
  CMat C_minus;      // m x n
  CMat C_plus;       // m x n
  CMat Omega_minus;  // n x n Hermitian
  CMat Omega_plus;   // n x n symmetric
  CMat K;            // 2n x 2l, not required to be doubled-up

  // Throws ParameterError naming the offending field.
  void validate(double tol = kDefaultTol) const;
};

// Zero-initialized parameters of the given shape with S = I.
PhysicalParams make_params(int n, int m, int l = 0);

// Doubled-up complex state-space matrices in the (a, a#) picture.
struct StateSpace {
  CMat A, B, C, D, E;
  int n() const { return static_cast<int>(A.rows() / 2); }
  int m() const { return static_cast<int>(D.rows() / 2); }
  int l() const { return static_cast<int>(E.cols() / 2); }
};

// Real matrices in quadrature coordinates x = V_n (a; a#).
struct QuadratureSystem {
  RMat A, B, C, D, E;
  int n() const { return static_cast<int>(A.rows() / 2); }
  int m() const { return static_cast<int>(D.rows() / 2); }
  int l() const { return static_cast<int>(E.cols() / 2); }
};

struct RealizabilityReport {
  double residual_A = 0.0;  // ||A + A^flat + B B^flat||
  double residual_B = 0.0;  // ||B + C^flat D||
  double passive_residual_A = 0.0;
  double passive_residual_B = 0.0;
  bool passes = false;
  bool passive_variant_used = false;
  double tol = kDefaultTol;
};

StateSpace build_state_space(const PhysicalParams& p, double tol = kDefaultTol);
RealizabilityReport check_realizability(const StateSpace& ss, double tol = kDefaultTol);

QuadratureSystem to_quadrature(const StateSpace& ss);
StateSpace from_quadrature(const QuadratureSystem& qs);

// Realizability expressed on the real matrices: A + A^sharp + B B^sharp = 0, B = -C^sharp D.
RealizabilityReport check_realizability(const QuadratureSystem& qs, double tol = kDefaultTol);

struct TransferValue {
  CMat value;
  double condition = 0.0;  // 2-norm condition number of (sI - A)
};

TransferValue transfer_function(const StateSpace& ss, cplx s);
RMat transfer_function_real(const QuadratureSystem& qs, cplx s, CMat* out = nullptr);

// Evaluates transfer_function on s = i*omega for each entry of omegas.
std::vector<CMat> transfer_grid(const StateSpace& ss, const std::vector<double>& omegas,
                                Exec exec = Exec::parallel);

struct ImpulseResponse {
  CMat smooth;        // -C e^{At} C^flat D for t >= 0
  CMat delta_weight;  // D for t >= 0, zero for t < 0
  double structure_residual = 0.0;
};

ImpulseResponse impulse_response(const StateSpace& ss, double t);

bool is_passive(const PhysicalParams& p, double tol = kDefaultTol);

// Passive transfer function S - C_-(sI + i Omega_- + 1/2 C_-^dagger C_-)^{-1} C_-^dagger S.
CMat passive_transfer(const PhysicalParams& p, cplx s);

// Quadrature coupling, Hamiltonian and drive matrices.
CMat coupling_lambda(const PhysicalParams& p);  // [C_- C_+] V_n^dagger, m x 2n
RMat hamiltonian_quadrature(const PhysicalParams& p);  // V_n Omega V_n^dagger

}  // namespace lqs
