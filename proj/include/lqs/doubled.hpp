#pragma once

#include "lqs/types.hpp"

namespace lqs {

// J_k = diag(I_k, -I_k)
CMat J(int k);
// Symplectic form [[0, I_k], [-I_k, 0]]
RMat JJ(int k);

// X^flat = J_r X^dagger J_k for X of size 2k x 2r.
CMat flat_adjoint(const CMat& X);
// X^sharp = -JJ_r X^dagger JJ_k for X of size 2k x 2r.
CMat sharp_adjoint(const CMat& X);
RMat sharp_adjoint(const RMat& X);

// Delta(U, V) = [[U, V], [conj(V), conj(U)]].
class DoubledMatrix {
 public:
  DoubledMatrix() = default;
  DoubledMatrix(CMat upper_left, CMat upper_right);

  // Averages the redundant blocks of a raw 2k x 2r matrix; the asymmetry
  // residual is available through asymmetry().
  static DoubledMatrix from_full(const CMat& X);

  const CMat& upper_left() const { return U_; }
  const CMat& upper_right() const { return V_; }
  CMat full() const;
  double asymmetry() const { return asym_; }

  DoubledMatrix operator+(const DoubledMatrix& o) const;
  DoubledMatrix operator*(const DoubledMatrix& o) const;

 private:
  CMat U_, V_;
  double asym_ = 0.0;
};

inline CMat Delta(const CMat& U, const CMat& V) { return DoubledMatrix(U, V).full(); }

// Distance of X from the doubled-up set.
double doubled_residual(const CMat& X);
bool is_doubled(const CMat& X, double tol = kDefaultTol);

struct GroupCheck {
  bool ok = false;
  double structure_residual = 0.0;  // doubled-up residual (Bogoliubov only)
  double left_residual = 0.0;       // ||X X^adj - I||
  double right_residual = 0.0;      // ||X^adj X - I||
};

GroupCheck is_bogoliubov(const CMat& T, double tol = kDefaultTol);
GroupCheck is_symplectic(const CMat& S, double tol = kDefaultTol);
GroupCheck is_symplectic(const RMat& S, double tol = kDefaultTol);

struct QuadBasisUnitary {
  int k = 0;
  CMat matrix;
};

// V_k = (1/sqrt 2)[[I, I], [-iI, iI]], maps (a, a#) to (q, p).
QuadBasisUnitary quad_basis(int k);
CMat Vk(int k);

}  // namespace lqs
