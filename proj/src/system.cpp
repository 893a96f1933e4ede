#include "lqs/system.hpp"

#include <Eigen/Eigenvalues>
#include <exception>

#include "lqs/doubled.hpp"
#include "lqs/expm.hpp"

namespace lqs {

namespace {

void require_shape(const CMat& X, Eigen::Index r, Eigen::Index c, const char* field) {
  if (X.rows() != r || X.cols() != c)
    throw ParameterError(field, 0.0,
                         std::string("field ") + field + " has shape " + std::to_string(X.rows()) + "x" +
                             std::to_string(X.cols()) + ", expected " + std::to_string(r) + "x" +
                             std::to_string(c));
}

CMat swap_blocks(int k) {
  CMat P = CMat::Zero(2 * k, 2 * k);
  P.topRightCorner(k, k).setIdentity();
  P.bottomLeftCorner(k, k).setIdentity();
  return P;
}

// Conjugation x -> V_r x V_c^dagger that tolerates zero-size blocks.
CMat conj_basis(const CMat& X, int r, int c) {
  if (X.size() == 0) return CMat::Zero(2 * r, 2 * c);
  return Vk(r) * X * Vk(c).adjoint();
}

CMat unconj_basis(const CMat& X, int r, int c) {
  if (X.size() == 0) return CMat::Zero(2 * r, 2 * c);
  return Vk(r).adjoint() * X * Vk(c);
}

RMat real_part_checked(const CMat& X, const char* what) {
  const double imag = X.size() ? X.imag().cwiseAbs().maxCoeff() : 0.0;
  if (imag > 1e-9)
    throw StructureError(std::string("to_quadrature: ") + what + " has imaginary residue " +
                         std::to_string(imag) + " (input not doubled-up)");
  return X.real();
}

}  // namespace

void PhysicalParams::validate(double tol) const {
  if (n < 0 || m < 0 || l < 0) throw ParameterError("n", 0.0, "negative dimension");
  require_shape(S, m, m, "S");
  require_shape(C_minus, m, n, "C_minus");
  require_shape(C_plus, m, n, "C_plus");
  require_shape(Omega_minus, n, n, "Omega_minus");
  require_shape(Omega_plus, n, n, "Omega_plus");
  require_shape(K, 2 * n, 2 * l, "K");
  const double rS = opnorm(CMat(S * S.adjoint() - CMat::Identity(m, m)));
  if (rS > tol) throw ParameterError("S", rS, "S is not unitary: ||S S^dagger - I|| = " + std::to_string(rS));
  const double rOm = opnorm(CMat(Omega_minus - Omega_minus.adjoint()));
  if (rOm > tol)
    throw ParameterError("Omega_minus", rOm, "Omega_minus is not Hermitian: residual " + std::to_string(rOm));
  const double rOp = opnorm(CMat(Omega_plus - Omega_plus.transpose()));
  if (rOp > tol)
    throw ParameterError("Omega_plus", rOp, "Omega_plus is not symmetric: residual " + std::to_string(rOp));
}

PhysicalParams make_params(int n, int m, int l) {
  PhysicalParams p;
  p.n = n;
  p.m = m;
  p.l = l;
  p.S = CMat::Identity(m, m);
  p.C_minus = CMat::Zero(m, n);
  p.C_plus = CMat::Zero(m, n);
  p.Omega_minus = CMat::Zero(n, n);
  p.Omega_plus = CMat::Zero(n, n);
  p.K = CMat::Zero(2 * n, 2 * l);
  return p;
}

StateSpace build_state_space(const PhysicalParams& p, double tol) {
  p.validate(tol);
  const int n = p.n, m = p.m, l = p.l;
  StateSpace ss;
  ss.D = Delta(p.S, CMat::Zero(m, m));
  ss.C = Delta(p.C_minus, p.C_plus);
  const CMat Omega = Delta(p.Omega_minus, p.Omega_plus);
  const CMat Cf = n > 0 && m > 0 ? flat_adjoint(ss.C) : CMat::Zero(2 * n, 2 * m);
  ss.B = -Cf * ss.D;
  ss.A = -kI * J(n) * Omega - 0.5 * Cf * ss.C;
  if (l > 0) {
    const CMat Ksharp = p.K.conjugate();
    ss.E = -kI * (J(n) * p.K + JJ(n).cast<cplx>() * Ksharp * swap_blocks(l));
  } else {
    ss.E = CMat::Zero(2 * n, 0);
  }
  return ss;
}

RealizabilityReport check_realizability(const StateSpace& ss, double tol) {
  RealizabilityReport r;
  r.tol = tol;
  const Eigen::Index n2 = ss.A.rows(), m2 = ss.D.rows();
  if (ss.A.cols() != n2 || ss.B.rows() != n2 || ss.B.cols() != m2 || ss.C.rows() != m2 || ss.C.cols() != n2 ||
      ss.D.cols() != m2)
    throw DimensionError("check_realizability: inconsistent state-space dimensions");
  if (n2 == 0) {
    r.passes = true;
    return r;
  }
  const CMat Af = flat_adjoint(ss.A);
  const CMat Bf = m2 ? flat_adjoint(ss.B) : CMat::Zero(0, n2);
  r.residual_A = opnorm(CMat(ss.A + Af + ss.B * Bf));
  r.residual_B = m2 ? opnorm(CMat(ss.B + flat_adjoint(ss.C) * ss.D)) : 0.0;
  r.passes = r.residual_A <= tol && r.residual_B <= tol;

  // Annihilation-only systems: also check the passive form on the upper-left blocks.
  const Eigen::Index n = n2 / 2, m = m2 / 2;
  auto offdiag = [](const CMat& X) {
    if (X.size() == 0) return 0.0;
    return opnorm(CMat(DoubledMatrix::from_full(X).upper_right()));
  };
  if (offdiag(ss.A) <= tol && offdiag(ss.B) <= tol && offdiag(ss.C) <= tol && offdiag(ss.D) <= tol) {
    r.passive_variant_used = true;
    const CMat A = ss.A.topLeftCorner(n, n);
    const CMat B = ss.B.topLeftCorner(n, m);
    const CMat C = ss.C.topLeftCorner(m, n);
    const CMat S = ss.D.topLeftCorner(m, m);
    r.passive_residual_A = opnorm(CMat(A + A.adjoint() + B * B.adjoint()));
    r.passive_residual_B = m ? opnorm(CMat(B + C.adjoint() * S)) : 0.0;
    r.passes = r.passes && r.passive_residual_A <= tol && r.passive_residual_B <= tol;
  }
  return r;
}

QuadratureSystem to_quadrature(const StateSpace& ss) {
  const int n = ss.n(), m = ss.m(), l = ss.l();
  QuadratureSystem qs;
  qs.A = real_part_checked(conj_basis(ss.A, n, n), "A");
  qs.B = real_part_checked(conj_basis(ss.B, n, m), "B");
  qs.C = real_part_checked(conj_basis(ss.C, m, n), "C");
  qs.D = real_part_checked(conj_basis(ss.D, m, m), "D");
  qs.E = l > 0 ? real_part_checked(conj_basis(ss.E, n, l), "E") : RMat::Zero(2 * n, 0);
  return qs;
}

StateSpace from_quadrature(const QuadratureSystem& qs) {
  const int n = qs.n(), m = qs.m(), l = qs.l();
  StateSpace ss;
  ss.A = unconj_basis(qs.A.cast<cplx>(), n, n);
  ss.B = unconj_basis(qs.B.cast<cplx>(), n, m);
  ss.C = unconj_basis(qs.C.cast<cplx>(), m, n);
  ss.D = unconj_basis(qs.D.cast<cplx>(), m, m);
  ss.E = l > 0 ? unconj_basis(qs.E.cast<cplx>(), n, l) : CMat::Zero(2 * n, 0);
  for (const CMat* X : {&ss.A, &ss.B, &ss.C, &ss.D}) {
    if (X->size() && doubled_residual(*X) > 1e-9)
      throw StructureError("from_quadrature: result is not doubled-up");
  }
  return ss;
}

RealizabilityReport check_realizability(const QuadratureSystem& qs, double tol) {
  RealizabilityReport r;
  r.tol = tol;
  if (qs.A.rows() == 0) {
    r.passes = true;
    return r;
  }
  const bool has_fields = qs.D.rows() > 0;
  const RMat BBs = has_fields ? RMat(qs.B * sharp_adjoint(qs.B)) : RMat::Zero(qs.A.rows(), qs.A.cols());
  r.residual_A = opnorm(RMat(qs.A + sharp_adjoint(qs.A) + BBs));
  r.residual_B = has_fields ? opnorm(RMat(qs.B + sharp_adjoint(qs.C) * qs.D)) : 0.0;
  r.passes = r.residual_A <= tol && r.residual_B <= tol;
  return r;
}

namespace {

struct Resolvent {
  CMat A;
  Eigen::VectorXcd eig;

  explicit Resolvent(const CMat& A_) : A(A_) {
    if (A.rows() > 0) eig = Eigen::ComplexEigenSolver<CMat>(A, false).eigenvalues();
  }

  // (sI - A)^{-1} X, with the spectrum check of transfer_function.
  CMat solve(cplx s, const CMat& X, double* cond) const {
    const Eigen::Index n = A.rows();
    if (n == 0) return CMat::Zero(0, X.cols());
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      if (std::abs(s - eig(i)) <= 1e-12)
        throw SingularityError("transfer_function: s coincides with an eigenvalue of A");
    }
    const CMat M = s * CMat::Identity(n, n) - A;
    if (cond) {
      Eigen::JacobiSVD<CMat> svd(M);
      const auto& sv = svd.singularValues();
      *cond = sv(0) / sv(sv.size() - 1);
    }
    return M.partialPivLu().solve(X);
  }
};

}  // namespace

TransferValue transfer_function(const StateSpace& ss, cplx s) {
  Resolvent R(ss.A);
  TransferValue out;
  out.value = ss.C * R.solve(s, ss.B, &out.condition) + ss.D;
  return out;
}

RMat transfer_function_real(const QuadratureSystem& qs, cplx s, CMat* out) {
  Resolvent R(qs.A.cast<cplx>());
  const CMat X = qs.C.cast<cplx>() * R.solve(s, qs.B.cast<cplx>(), nullptr) + qs.D.cast<cplx>();
  if (out) *out = X;
  return X.real();
}

std::vector<CMat> transfer_grid(const StateSpace& ss, const std::vector<double>& omegas, Exec exec) {
  const Resolvent R(ss.A);
  std::vector<CMat> out(omegas.size());
  const long N = static_cast<long>(omegas.size());
  if (exec == Exec::serial) {
    for (long k = 0; k < N; ++k) out[k] = ss.C * R.solve(kI * omegas[k], ss.B, nullptr) + ss.D;
    return out;
  }
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (long k = 0; k < N; ++k) {
    try {
      out[k] = ss.C * R.solve(kI * omegas[k], ss.B, nullptr) + ss.D;
    } catch (...) {
#pragma omp critical
      err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

ImpulseResponse impulse_response(const StateSpace& ss, double t) {
  ImpulseResponse r;
  const Eigen::Index m2 = ss.D.rows();
  if (t < 0.0) {
    r.smooth = CMat::Zero(m2, m2);
    r.delta_weight = CMat::Zero(m2, m2);
    return r;
  }
  const CMat Cf = ss.A.rows() && m2 ? flat_adjoint(ss.C) : CMat::Zero(ss.A.rows(), m2);
  r.smooth = -ss.C * expm(CMat(ss.A * t)) * Cf * ss.D;
  r.delta_weight = ss.D;
  r.structure_residual = m2 ? doubled_residual(r.smooth) : 0.0;
  return r;
}

bool is_passive(const PhysicalParams& p, double tol) {
  auto small = [tol](const CMat& X) { return X.size() == 0 || X.cwiseAbs().maxCoeff() <= tol; };
  if (!small(p.C_plus) || !small(p.Omega_plus)) return false;
  if (p.l > 0) {
    const int n = p.n, l = p.l;
    // K = [[K1, K2], [K3, K4]] with n x l blocks
    if (!small(p.K.topRightCorner(n, l)) || !small(p.K.bottomLeftCorner(n, l))) return false;
  }
  return true;
}

CMat passive_transfer(const PhysicalParams& p, cplx s) {
  const int n = p.n;
  if (n == 0) return p.S;
  const CMat M = s * CMat::Identity(n, n) + kI * p.Omega_minus + 0.5 * p.C_minus.adjoint() * p.C_minus;
  return p.S - p.C_minus * M.partialPivLu().solve(p.C_minus.adjoint() * p.S);
}

CMat coupling_lambda(const PhysicalParams& p) {
  CMat CC(p.m, 2 * p.n);
  CC << p.C_minus, p.C_plus;
  if (p.n == 0) return CC;
  return CC * Vk(p.n).adjoint();
}

RMat hamiltonian_quadrature(const PhysicalParams& p) {
  if (p.n == 0) return RMat::Zero(0, 0);
  const CMat H = Vk(p.n) * Delta(p.Omega_minus, p.Omega_plus) * Vk(p.n).adjoint();
  return H.real();
}

}  // namespace lqs
