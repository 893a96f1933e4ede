#include "lqs/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "lqs/doubled.hpp"
#include "lqs/expm.hpp"

namespace lqs {

namespace {

bool finite(const RMat& X) { return X.allFinite(); }

RMat symmetrize(const RMat& X) { return 0.5 * (X + X.transpose()); }

CMat sqrt_psd(const CMat& rho, double neg_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho);
  RVec ev = es.eigenvalues();
  if (ev.size() && ev.minCoeff() < -neg_tol) {
    std::ostringstream os;
    os << "density matrix has eigenvalue " << ev.minCoeff() << " below " << -neg_tol;
    throw PreconditionError(os.str());
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

struct Moments {
  RVec mean = RVec::Zero(2);
  RMat cov = RMat::Zero(2, 2);
};

Moments fock_moments(const CMat& rho) {
  const int N = static_cast<int>(rho.rows());
  const CMat q = fock_q(N), p = fock_p(N);
  auto ex = [&](const CMat& X) { return (rho * X).trace().real(); };
  Moments m;
  m.mean << ex(q), ex(p);
  m.cov(0, 0) = ex(q * q) - m.mean(0) * m.mean(0);
  m.cov(1, 1) = ex(p * p) - m.mean(1) * m.mean(1);
  m.cov(0, 1) = m.cov(1, 0) = 0.5 * ex(q * p + p * q) - m.mean(0) * m.mean(1);
  return m;
}

FockDensity build_fock(const GaussianState& s, int N) {
  const RMat& V = s.cov;
  const double det = V.determinant();
  const double nu = 2.0 * std::sqrt(std::max(det, 0.0));
  const double nbar = std::max(0.0, (nu - 1.0) / 2.0);

  Eigen::SelfAdjointEigenSolver<RMat> es(V);
  const double lmin = es.eigenvalues()(0);
  const RVec dir = es.eigenvectors().col(0);
  const double phi = std::atan2(dir(1), dir(0));
  const double r = (nu > 0.0 && lmin > 0.0) ? -0.5 * std::log(2.0 * lmin / nu) : 0.0;
  const cplx zeta = std::polar(r, 2.0 * phi);
  const cplx alpha = cplx(s.mean(0), s.mean(1)) / std::sqrt(2.0);

  const int W = 2 * N;  // padded working space
  const CMat a = fock_annihilation(W);
  const CMat ad = a.adjoint();
  const CMat Sq = expm(CMat(0.5 * (std::conj(zeta) * a * a - zeta * ad * ad)));
  const CMat Dp = expm(CMat(alpha * ad - std::conj(alpha) * a));
  const CMat U = Dp * Sq;

  RVec pk = RVec::Zero(W);
  if (nbar <= 0.0) {
    pk(0) = 1.0;
  } else {
    const double lr = std::log(nbar) - std::log1p(nbar);
    for (int k = 0; k < W; ++k) pk(k) = std::exp(k * lr - std::log1p(nbar));
  }
  const CMat rho_w = U * pk.cast<cplx>().asDiagonal() * U.adjoint();

  FockDensity f;
  f.dim = N;
  f.rho = rho_w.topLeftCorner(N, N);
  f.rho = 0.5 * (f.rho + f.rho.adjoint()).eval();
  f.trace = f.rho.trace().real();
  const Moments m = fock_moments(f.rho);
  f.moment_residual = std::max((m.mean - s.mean).cwiseAbs().maxCoeff(), (m.cov - s.cov).cwiseAbs().maxCoeff());
  return f;
}

}  // namespace

GaussianState GaussianState::vacuum(int n) {
  GaussianState s;
  s.mean = RVec::Zero(2 * n);
  s.cov = 0.5 * RMat::Identity(2 * n, 2 * n);
  return s;
}

GaussianState GaussianState::thermal(int n, double nbar) {
  GaussianState s = vacuum(n);
  s.cov *= (2.0 * nbar + 1.0);
  return s;
}

GaussianState GaussianState::squeezed(double r) {
  GaussianState s = vacuum(1);
  s.cov(0, 0) = 0.5 * std::exp(-2.0 * r);
  s.cov(1, 1) = 0.5 * std::exp(2.0 * r);
  return s;
}

void validate_state(const GaussianState& s, double tol) {
  if (s.mean.size() % 2) throw DimensionError("gaussian state: mean must have even length");
  if (s.cov.rows() != s.mean.size() || s.cov.cols() != s.mean.size())
    throw DimensionError("gaussian state: covariance shape does not match mean");
  const double asym = s.cov.size() ? (s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > tol) throw ParameterError("cov", asym, "gaussian state: covariance is not symmetric");
}

ValidityResult is_valid(const GaussianState& s, double tol) {
  validate_state(s, 1e-12);
  ValidityResult r;
  const int n = s.n();
  if (n == 0) {
    r.valid = true;
    return r;
  }
  const CMat Jc = JJ(n).cast<cplx>();
  const CMat Vc = s.cov.cast<cplx>();
  r.min_eig_plus = Eigen::SelfAdjointEigenSolver<CMat>(Vc + 0.5 * kI * Jc, Eigen::EigenvaluesOnly).eigenvalues()(0);
  r.min_eig_minus = Eigen::SelfAdjointEigenSolver<CMat>(Vc - 0.5 * kI * Jc, Eigen::EigenvaluesOnly).eigenvalues()(0);
  r.valid = r.min_eig() >= -tol;
  return r;
}

bool is_pure(const GaussianState& s, double tol) {
  if (!is_valid(s).valid) throw PreconditionError("is_pure: state is not a valid quantum covariance");
  return std::abs(s.cov.determinant() - std::ldexp(1.0, -2 * s.n())) <= tol;
}

double wigner(const GaussianState& s, const RVec& w) {
  validate_state(s);
  if (w.size() != s.mean.size()) throw DimensionError("wigner: point dimension mismatch");
  Eigen::LDLT<RMat> ldlt(s.cov);
  const double det = s.cov.determinant();
  if (ldlt.info() != Eigen::Success || !(det > 1e-300) || !ldlt.isPositive())
    throw SingularityError("wigner: covariance is singular");
  const RVec d = w - s.mean;
  const double quad = d.dot(ldlt.solve(d));
  return std::exp(-0.5 * quad) / (std::pow(2.0 * M_PI, s.n()) * std::sqrt(det));
}

cplx characteristic(const GaussianState& s, const RVec& beta) {
  validate_state(s);
  if (beta.size() != s.mean.size()) throw DimensionError("characteristic: point dimension mismatch");
  if (beta.size() == 0) return 1.0;
  // Tr[rho exp(i x^T JJ beta)]; the mean and covariance see JJ beta
  const RVec jb = JJ(s.n()) * beta;
  return std::exp(cplx(-0.5 * jb.dot(s.cov * jb), s.mean.dot(jb)));
}

double wigner_normalization(const GaussianState& s, int nodes) {
  const int n = s.n();
  if (n > 2) throw ResourceError("wigner_normalization: tensor quadrature limited to n <= 2");
  if (nodes < 2) throw ParameterError("nodes", 0.0, "wigner_normalization: need at least 2 nodes");
  // Golub-Welsch for the physicists' Hermite weight e^{-z^2}
  RMat Jm = RMat::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) Jm(k, k - 1) = Jm(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<RMat> es(Jm);
  const RVec z = es.eigenvalues();
  const RVec wts = std::sqrt(M_PI) * es.eigenvectors().row(0).transpose().array().square();
  const Eigen::LLT<RMat> llt(s.cov);
  if (llt.info() != Eigen::Success) throw SingularityError("wigner_normalization: covariance not positive definite");
  const RMat L = llt.matrixL();
  const int dim = 2 * n;
  const double jac = std::pow(std::sqrt(2.0), dim) * L.diagonal().prod();
  long total = 1;
  for (int d = 0; d < dim; ++d) total *= nodes;
  double sum = 0.0;
  std::vector<int> idx(dim, 0);
  RVec zz(dim);
  for (long c = 0; c < total; ++c) {
    long rem = c;
    double wprod = 1.0;
    for (int d = 0; d < dim; ++d) {
      idx[d] = static_cast<int>(rem % nodes);
      rem /= nodes;
      zz(d) = z(idx[d]);
      wprod *= wts(idx[d]);
    }
    const RVec w = s.mean + std::sqrt(2.0) * L * zz;
    sum += wprod * wigner(s, w) * std::exp(zz.squaredNorm()) * jac;
  }
  return sum;
}

std::vector<double> symplectic_eigenvalues(const RMat& cov) {
  const int n = static_cast<int>(cov.rows() / 2);
  std::vector<double> out;
  if (n == 0) return out;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<RMat>(RMat(JJ(n) * cov), false).eigenvalues();
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < ev.size(); ++i) mags.push_back(std::abs(ev(i)));
  std::sort(mags.begin(), mags.end());
  for (int k = 0; k < n; ++k) out.push_back(0.5 * (mags[2 * k] + mags[2 * k + 1]));
  return out;
}

RMat cov_to_unit_vacuum(const RMat& cov) { return 2.0 * cov; }
RMat cov_from_unit_vacuum(const RMat& cov) { return 0.5 * cov; }

std::vector<MomentSample> evolve_moments(const QuadratureSystem& qs, const GaussianState& s0, double horizon,
                                         double dt, int record_every) {
  if (!(dt > 0.0)) throw ParameterError("dt", dt, "evolve_moments: dt must be positive");
  if (horizon < 0.0) throw ParameterError("horizon", horizon, "evolve_moments: negative horizon");
  if (record_every < 1) record_every = 1;
  validate_state(s0);
  if (s0.mean.size() != qs.A.rows()) throw DimensionError("evolve_moments: state and system sizes differ");
  const RMat& A = qs.A;
  const RMat Q = 0.5 * qs.B * qs.B.transpose();
  auto fV = [&](const RMat& V) -> RMat { return A * V + V * A.transpose() + Q; };
  const long steps = static_cast<long>(std::llround(horizon / dt));
  std::vector<MomentSample> out;
  RVec mu = s0.mean;
  RMat V = s0.cov;
  out.push_back({0.0, s0});
  for (long k = 1; k <= steps; ++k) {
    const RVec m1 = A * mu, m2 = A * (mu + 0.5 * dt * m1), m3 = A * (mu + 0.5 * dt * m2), m4 = A * (mu + dt * m3);
    mu += dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    const RMat k1 = fV(V), k2 = fV(V + 0.5 * dt * k1), k3 = fV(V + 0.5 * dt * k2), k4 = fV(V + dt * k3);
    V = symmetrize(V + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (!mu.allFinite() || !finite(V) || V.norm() > 1e12 || mu.norm() > 1e12)
      throw DivergenceError("evolve_moments: trajectory diverged at step " + std::to_string(k));
    if (k % record_every == 0 || k == steps) {
      GaussianState st;
      st.mean = mu;
      st.cov = V;
      out.push_back({k * dt, st});
    }
  }
  return out;
}

RMat lyapunov_steady(const RMat& A, const RMat& Q) {
  const Eigen::Index N = A.rows();
  if (N == 0) return RMat::Zero(0, 0);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<RMat>(A, false).eigenvalues();
  if (ev.real().maxCoeff() >= 0.0) throw PreconditionError("lyapunov_steady: A is not Hurwitz");
  const RMat I = RMat::Identity(N, N);
  RMat K = RMat::Zero(N * N, N * N);
  // column-major vec: vec(A V) = (I kron A) vec V, vec(V A^T) = (A kron I) vec V
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      K.block(i * N, j * N, N, N) += I(i, j) * A;
      K.block(i * N, j * N, N, N) += A(i, j) * I;
    }
  const RVec rhs = -Eigen::Map<const RVec>(Q.data(), N * N);
  const RVec v = K.partialPivLu().solve(rhs);
  return symmetrize(Eigen::Map<const RMat>(v.data(), N, N));
}

RMat steady_covariance(const QuadratureSystem& qs) { return lyapunov_steady(qs.A, 0.5 * qs.B * qs.B.transpose()); }

PureStateGenerator pure_state_generator(const RMat& X, const RMat& Y, const RMat& R, const RMat& Gamma,
                                        const RMat& P, double tol) {
  const Eigen::Index n = X.rows();
  auto square = [n](const RMat& M, const char* f) {
    if (M.rows() != n || M.cols() != n) throw ParameterError(f, 0.0, std::string("pure_state_generator: ") + f + " must be n x n");
  };
  square(X, "X");
  square(Y, "Y");
  square(R, "R");
  square(Gamma, "Gamma");
  if (P.rows() != n || P.cols() < 1) throw ParameterError("P", 0.0, "pure_state_generator: P must be n x K with K >= 1");
  const double sx = (X - X.transpose()).cwiseAbs().maxCoeff(), sy = (Y - Y.transpose()).cwiseAbs().maxCoeff();
  const double sr = (R - R.transpose()).cwiseAbs().maxCoeff(), sg = (Gamma + Gamma.transpose()).cwiseAbs().maxCoeff();
  if (sx > 1e-12) throw ParameterError("X", sx, "pure_state_generator: X must be symmetric");
  if (sy > 1e-12) throw ParameterError("Y", sy, "pure_state_generator: Y must be symmetric");
  if (sr > 1e-12) throw ParameterError("R", sr, "pure_state_generator: R must be symmetric");
  if (sg > 1e-12) throw ParameterError("Gamma", sg, "pure_state_generator: Gamma must be antisymmetric");
  Eigen::SelfAdjointEigenSolver<RMat> ey(Y);
  if (ey.eigenvalues().minCoeff() <= 0.0)
    throw ParameterError("Y", ey.eigenvalues().minCoeff(), "pure_state_generator: Y must be positive definite");

  PureStateGenerator g;
  const RMat Yh = ey.operatorSqrt();
  const RMat Yih = ey.operatorInverseSqrt();
  const RMat Yi = Y.inverse();
  g.S = RMat::Zero(2 * n, 2 * n);
  g.S.topLeftCorner(n, n) = Yih;
  g.S.bottomLeftCorner(n, n) = X * Yih;
  g.S.bottomRightCorner(n, n) = Yh;
  g.target_cov = 0.5 * g.S * g.S.transpose();

  // (P, Q) controllability, Q = -i R Y + Y^{-1} Gamma
  const CMat Q = -kI * (R * Y).cast<cplx>() + (Yi * Gamma).cast<cplx>();
  CMat Kry(n, n * P.cols());
  CMat blk = P.cast<cplx>();
  for (Eigen::Index k = 0; k < n; ++k) {
    Kry.middleCols(k * P.cols(), P.cols()) = blk;
    blk = Q * blk;
  }
  Eigen::JacobiSVD<CMat> svd(Kry);
  const RVec& sv = svd.singularValues();
  g.controllability_rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++g.controllability_rank;
  if (g.controllability_rank < n) {
    throw PreconditionError("pure_state_generator: (P, Q) is not controllable (rank " +
                            std::to_string(g.controllability_rank) + " < " + std::to_string(n) + ")");
  }

  g.H = RMat::Zero(2 * n, 2 * n);
  g.H.topLeftCorner(n, n) = X * R * X + Y * R * Y - Gamma * Yi * X - X * Yi * Gamma.transpose();
  g.H.topRightCorner(n, n) = -X * R + Gamma * Yi;
  g.H.bottomLeftCorner(n, n) = -R * X + Yi * Gamma.transpose();
  g.H.bottomRightCorner(n, n) = R;
  g.H = symmetrize(g.H);

  const CMat Z = X.cast<cplx>() + kI * Y.cast<cplx>();
  CMat ZI(n, 2 * n);
  ZI << -Z, CMat::Identity(n, n);
  g.Lambda = P.transpose().cast<cplx>() * ZI;

  const int K = static_cast<int>(P.cols());
  const int ni = static_cast<int>(n);
  g.params = make_params(ni, K, 0);
  const CMat CC = g.Lambda * Vk(ni);
  g.params.C_minus = CC.leftCols(ni);
  g.params.C_plus = CC.rightCols(ni);
  const CMat Om = Vk(ni).adjoint() * g.H.cast<cplx>() * Vk(ni);
  g.params.Omega_minus = Om.topLeftCorner(ni, ni);
  g.params.Omega_plus = Om.topRightCorner(ni, ni);
  g.params.Omega_minus = 0.5 * (g.params.Omega_minus + g.params.Omega_minus.adjoint()).eval();
  g.params.Omega_plus = 0.5 * (g.params.Omega_plus + g.params.Omega_plus.transpose()).eval();
  g.system = to_quadrature(build_state_space(g.params));
  g.steady_cov = steady_covariance(g.system);
  g.residual = (g.steady_cov - g.target_cov).cwiseAbs().maxCoeff();
  GaussianState t;
  t.mean = RVec::Zero(2 * n);
  t.cov = g.target_cov;
  g.target_pure = is_pure(t, 1e-10);
  if (g.residual > tol) {
    std::ostringstream os;
    os << "pure_state_generator: steady covariance differs from target by " << g.residual;
    throw NumericalError(os.str());
  }
  return g;
}

CMat fock_annihilation(int N) {
  CMat a = CMat::Zero(N, N);
  for (int k = 1; k < N; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

CMat fock_q(int N) {
  const CMat a = fock_annihilation(N);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

CMat fock_p(int N) {
  const CMat a = fock_annihilation(N);
  return -kI * (a - a.adjoint()) / std::sqrt(2.0);
}

FockDensity gaussian_to_fock(const GaussianState& s, int N, bool auto_grow) {
  if (s.n() != 1) throw DimensionError("gaussian_to_fock: single-mode states only");
  if (N < 2) throw ParameterError("N", N, "gaussian_to_fock: truncation must be at least 2");
  if (!is_valid(s).valid) throw PreconditionError("gaussian_to_fock: invalid state");
  FockDensity f = build_fock(s, N);
  while (auto_grow && f.moment_residual >= 1e-5 && N < 512) {
    N = std::min(512, 2 * N);
    f = build_fock(s, N);
  }
  if (f.moment_residual > 1e-4) {
    std::ostringstream os;
    os << "truncation N=" << N << " reproduces the moments only to " << f.moment_residual << "; increase N";
    f.warnings.push_back(os.str());
  }
  return f;
}

double fock_variance(const FockDensity& f, const CMat& X) {
  const double m1 = (f.rho * X).trace().real();
  const double m2 = (f.rho * X * X).trace().real();
  return m2 - m1 * m1;
}

double skew_information(const FockDensity& f, const CMat& X) {
  if (X.rows() != f.rho.rows() || X.cols() != f.rho.cols()) throw DimensionError("skew_information: size mismatch");
  const CMat sr = sqrt_psd(f.rho, 1e-8);
  const CMat c = sr * X - X * sr;
  return -0.5 * (c * c).trace().real();
}

double luo_uncertainty(const FockDensity& f, const CMat& X) {
  const double V = fock_variance(f, X);
  const double I = skew_information(f, X);
  return std::sqrt(std::max(0.0, V * V - (V - I) * (V - I)));
}

UncertaintyReport uncertainty_report(const GaussianState& s, int N, bool auto_grow) {
  if (s.n() != 1) throw DimensionError("uncertainty_report: single-mode states only");
  if (!is_valid(s).valid) throw PreconditionError("uncertainty_report: invalid state");
  UncertaintyReport r;
  r.heisenberg_lhs = std::sqrt(s.cov(0, 0) * s.cov(1, 1));
  const FockDensity f = gaussian_to_fock(s, N, auto_grow);
  r.N = f.dim;
  r.moment_residual = f.moment_residual;
  r.warnings = f.warnings;
  const CMat q = fock_q(f.dim), p = fock_p(f.dim);
  r.V_q = fock_variance(f, q);
  r.V_p = fock_variance(f, p);
  r.I_q = skew_information(f, q);
  r.I_p = skew_information(f, p);
  r.U_q = luo_uncertainty(f, q);
  r.U_p = luo_uncertainty(f, p);
  r.luo_lhs = r.U_q * r.U_p;
  return r;
}

}  // namespace lqs
