#include "lqs/doubled.hpp"

#include <Eigen/SVD>

namespace lqs {

double opnorm(const CMat& X) {
  if (X.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(X);
  return svd.singularValues()(0);
}

double opnorm(const RMat& X) {
  if (X.size() == 0) return 0.0;
  Eigen::JacobiSVD<RMat> svd(X);
  return svd.singularValues()(0);
}

namespace {

void require_even(const CMat& X, const char* what) {
  if (X.rows() % 2 != 0 || X.cols() % 2 != 0)
    throw DimensionError(std::string(what) + ": matrix dimensions must be even, got " +
                         std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
}

}  // namespace

CMat J(int k) {
  CMat out = CMat::Identity(2 * k, 2 * k);
  out.bottomRightCorner(k, k) *= -1.0;
  return out;
}

RMat JJ(int k) {
  RMat out = RMat::Zero(2 * k, 2 * k);
  out.topRightCorner(k, k).setIdentity();
  out.bottomLeftCorner(k, k) = -RMat::Identity(k, k);
  return out;
}

CMat flat_adjoint(const CMat& X) {
  require_even(X, "flat_adjoint");
  const int k = static_cast<int>(X.rows() / 2), r = static_cast<int>(X.cols() / 2);
  return J(r) * X.adjoint() * J(k);
}

CMat sharp_adjoint(const CMat& X) {
  require_even(X, "sharp_adjoint");
  const int k = static_cast<int>(X.rows() / 2), r = static_cast<int>(X.cols() / 2);
  return -(JJ(r).cast<cplx>() * X.adjoint() * JJ(k).cast<cplx>());
}

RMat sharp_adjoint(const RMat& X) {
  if (X.rows() % 2 != 0 || X.cols() % 2 != 0)
    throw DimensionError("sharp_adjoint: matrix dimensions must be even");
  const int k = static_cast<int>(X.rows() / 2), r = static_cast<int>(X.cols() / 2);
  return -(JJ(r) * X.transpose() * JJ(k));
}

DoubledMatrix::DoubledMatrix(CMat upper_left, CMat upper_right)
    : U_(std::move(upper_left)), V_(std::move(upper_right)) {
  if (U_.rows() != V_.rows() || U_.cols() != V_.cols())
    throw DimensionError("DoubledMatrix: U and V blocks must have equal shape");
}

DoubledMatrix DoubledMatrix::from_full(const CMat& X) {
  require_even(X, "DoubledMatrix::from_full");
  const Eigen::Index k = X.rows() / 2, r = X.cols() / 2;
  const CMat X11 = X.topLeftCorner(k, r), X12 = X.topRightCorner(k, r);
  const CMat X21 = X.bottomLeftCorner(k, r), X22 = X.bottomRightCorner(k, r);
  DoubledMatrix out((X11 + X22.conjugate()) / 2.0, (X12 + X21.conjugate()) / 2.0);
  out.asym_ = opnorm(CMat(X - out.full()));
  return out;
}

CMat DoubledMatrix::full() const {
  const Eigen::Index k = U_.rows(), r = U_.cols();
  CMat out(2 * k, 2 * r);
  out << U_, V_, V_.conjugate(), U_.conjugate();
  return out;
}

DoubledMatrix DoubledMatrix::operator+(const DoubledMatrix& o) const {
  return DoubledMatrix(U_ + o.U_, V_ + o.V_);
}

DoubledMatrix DoubledMatrix::operator*(const DoubledMatrix& o) const {
  // [[U1,V1],[V1#,U1#]] [[U2,V2],[V2#,U2#]]
  return DoubledMatrix(U_ * o.U_ + V_ * o.V_.conjugate(), U_ * o.V_ + V_ * o.U_.conjugate());
}

double doubled_residual(const CMat& X) { return DoubledMatrix::from_full(X).asymmetry(); }

bool is_doubled(const CMat& X, double tol) { return doubled_residual(X) <= tol; }

GroupCheck is_bogoliubov(const CMat& T, double tol) {
  GroupCheck g;
  if (T.rows() != T.cols() || T.rows() % 2 != 0) return g;
  const CMat I = CMat::Identity(T.rows(), T.cols());
  const CMat Tf = flat_adjoint(T);
  g.structure_residual = doubled_residual(T);
  g.left_residual = opnorm(CMat(T * Tf - I));
  g.right_residual = opnorm(CMat(Tf * T - I));
  g.ok = g.structure_residual <= tol && g.left_residual <= tol && g.right_residual <= tol;
  return g;
}

GroupCheck is_symplectic(const CMat& S, double tol) {
  GroupCheck g;
  if (S.rows() != S.cols() || S.rows() % 2 != 0) return g;
  const CMat I = CMat::Identity(S.rows(), S.cols());
  const CMat Ss = sharp_adjoint(S);
  g.left_residual = opnorm(CMat(S * Ss - I));
  g.right_residual = opnorm(CMat(Ss * S - I));
  g.ok = g.left_residual <= tol && g.right_residual <= tol;
  return g;
}

GroupCheck is_symplectic(const RMat& S, double tol) { return is_symplectic(CMat(S.cast<cplx>()), tol); }

CMat Vk(int k) {
  if (k < 1) throw DimensionError("quad_basis: k must be positive");
  const double s = 1.0 / std::sqrt(2.0);
  CMat V(2 * k, 2 * k);
  const CMat I = CMat::Identity(k, k);
  V << I, I, -kI * I, kI * I;
  return s * V;
}

QuadBasisUnitary quad_basis(int k) { return {k, Vk(k)}; }

}  // namespace lqs
