#include "lqs/structure.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lqs/doubled.hpp"

namespace lqs {

namespace {

constexpr double kIntersectTol = 1e-6;
constexpr double kSubspaceCheckTol = 1e-6;

// Orthonormal basis of range(M) with rank cut tol * sigma_max.
SubspaceBasis range_basis(const RMat& M, double tol, SubspaceLabel label) {
  SubspaceBasis b;
  b.label = label;
  const Eigen::Index rows = M.rows();
  if (M.cols() == 0 || rows == 0) {
    b.columns = RMat::Zero(rows, 0);
    return b;
  }
  Eigen::JacobiSVD<RMat> svd(M, Eigen::ComputeThinU);
  const RVec& sv = svd.singularValues();
  b.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() ? sv(0) : 0.0;
  b.threshold = tol * std::max(smax, 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (smax > 0.0 && sv(i) > b.threshold) ++rank;
    if (smax > 0.0 && sv(i) > 0.1 * b.threshold && sv(i) < 10.0 * b.threshold) {
      std::ostringstream os;
      os << to_string(label) << " subspace: singular value " << sv(i) << " is within a factor 10 of the rank threshold "
         << b.threshold << "; rank may be ambiguous";
      b.warnings.push_back(os.str());
    }
  }
  b.columns = svd.matrixU().leftCols(rank);
  return b;
}

// Normalized Krylov blocks [X, A X / |A|, A^2 X / |A|^2, ...].
RMat krylov(const RMat& A, const RMat& X) {
  const Eigen::Index N = A.rows();
  if (X.cols() == 0) return RMat::Zero(N, 0);
  const double na = std::max(opnorm(A), 1e-300);
  const RMat As = A / na;
  RMat K(N, N * X.cols());
  RMat blk = X;
  for (Eigen::Index k = 0; k < N; ++k) {
    K.middleCols(k * X.cols(), X.cols()) = blk;
    blk = As * blk;
  }
  return K;
}

RMat complement(const RMat& P, Eigen::Index N) {
  if (P.cols() == 0) return RMat::Identity(N, N);
  Eigen::JacobiSVD<RMat> svd(P, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(N - P.cols());
}

// Null space of [I - P P^T; I - Q Q^T].
RMat intersect(const RMat& P, const RMat& Q) {
  const Eigen::Index N = P.rows();
  if (P.cols() == 0 || Q.cols() == 0) return RMat::Zero(N, 0);
  RMat M(2 * N, N);
  M.topRows(N) = RMat::Identity(N, N) - P * P.transpose();
  M.bottomRows(N) = RMat::Identity(N, N) - Q * Q.transpose();
  Eigen::JacobiSVD<RMat> svd(M, Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  int k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= kIntersectTol) ++k;
  return svd.matrixV().rightCols(k);
}

// Probe order over coordinate axes: q-axes then p-axes, or the reverse.
std::vector<int> probe_order(int n, bool p_first) {
  std::vector<int> order;
  for (int i = 0; i < n; ++i) order.push_back(p_first ? n + i : i);
  for (int i = 0; i < n; ++i) order.push_back(p_first ? i : n + i);
  return order;
}

// Projects the probe axis with the largest projection onto span(W); the pivot
// entry comes out positive, and is a largest-magnitude entry of the result.
RVec pivot_vector(const RMat& W, const std::vector<int>& order) {
  const RMat Pi = W * W.transpose();
  int best = order.front();
  double best_val = -1.0;
  for (int ax : order) {
    if (Pi(ax, ax) > best_val + 1e-9) {
      best_val = Pi(ax, ax);
      best = ax;
    }
  }
  RVec v = Pi.col(best);
  v /= v.norm();
  return v;
}

// Orthonormal basis of span(W) with the directions in X removed.
RMat deflate(const RMat& W, const RMat& X) {
  RMat R = W - X * (X.transpose() * W);
  const Eigen::Index target = W.cols() - X.cols();
  if (target <= 0) return RMat::Zero(W.rows(), 0);
  Eigen::JacobiSVD<RMat> svd(R, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(target);
}

double out_of_span(const RMat& W, const RMat& X) {
  if (X.cols() == 0) return 0.0;
  return opnorm(RMat(X - W * (W.transpose() * X)));
}

double max_abs(const RMat& X) { return X.size() ? X.cwiseAbs().maxCoeff() : 0.0; }

QuadratureSystem normalize_scattering(const QuadratureSystem& qs, bool* changed) {
  QuadratureSystem out = qs;
  const Eigen::Index m2 = qs.D.rows();
  *changed = m2 > 0 && max_abs(RMat(qs.D - RMat::Identity(m2, m2))) > 1e-14;
  if (*changed) {
    out.C = qs.D.transpose() * qs.C;
    out.D = RMat::Identity(m2, m2);
  }
  return out;
}

RMat block(const RMat& X, int r0, int nr, int c0, int nc) { return X.block(r0, c0, nr, nc); }

void fill_blocks(KalmanDecomposition& kd) {
  const QuadratureSystem& qs = kd.system;
  const RMat& T = kd.T;
  const int n = qs.n(), m = qs.m();
  kd.A_bar = T.transpose() * qs.A * T;
  kd.B_bar = T.transpose() * qs.B;
  kd.C_bar = qs.C * T;
  // H = JJ^T (A + 1/2 C^sharp C)
  RMat Hq = JJ(n).transpose() * (qs.A + 0.5 * (m ? RMat(sharp_adjoint(qs.C) * qs.C) : RMat::Zero(2 * n, 2 * n)));
  Hq = 0.5 * (Hq + Hq.transpose()).eval();
  kd.H_bar = T.transpose() * Hq * T;
  const int nh = kd.dims.n_h, nco = kd.dims.n_co;
  if (m > 0) {
    const CMat Lt = Vk(m).adjoint() * kd.C_bar.cast<cplx>();
    kd.Lambda_h = Lt.middleCols(kd.offset_ph(), nh);
    kd.Lambda_co = Lt.middleCols(kd.offset_co(), 2 * nco);
  } else {
    kd.Lambda_h = CMat::Zero(0, nh);
    kd.Lambda_co = CMat::Zero(0, 2 * nco);
  }
  kd.pattern_residual = kalman_pattern_residual(kd);
}

}  // namespace

const char* to_string(SubspaceLabel label) {
  switch (label) {
    case SubspaceLabel::controllable: return "controllable";
    case SubspaceLabel::observable: return "observable";
    case SubspaceLabel::co: return "co";
    case SubspaceLabel::c_obar: return "c_obar";
    case SubspaceLabel::cbar_o: return "cbar_o";
    case SubspaceLabel::cbar_obar: return "cbar_obar";
  }
  return "?";
}

HurwitzResult is_hurwitz(const QuadratureSystem& qs, double tol) {
  HurwitzResult r;
  if (qs.A.rows() == 0) {
    r.stable = true;
    r.abscissa = -std::numeric_limits<double>::infinity();
    return r;
  }
  const Eigen::VectorXcd ev = Eigen::EigenSolver<RMat>(qs.A, false).eigenvalues();
  r.abscissa = ev.real().maxCoeff();
  r.stable = r.abscissa < -tol;
  return r;
}

SubspaceBasis controllable_subspace(const QuadratureSystem& qs, double tol) {
  return range_basis(krylov(qs.A, qs.B), tol, SubspaceLabel::controllable);
}

SubspaceBasis observable_subspace(const QuadratureSystem& qs, double tol) {
  return range_basis(krylov(RMat(qs.A.transpose()), RMat(qs.C.transpose())), tol, SubspaceLabel::observable);
}

double kalman_pattern_residual(const KalmanDecomposition& kd) {
  const int nh = kd.dims.n_h, nco = 2 * kd.dims.n_co, nd = 2 * kd.dims.n_cbar_obar;
  const int qh = kd.offset_qh(), ph = kd.offset_ph(), co = kd.offset_co(), cbo = kd.offset_cbo();
  const RMat& A = kd.A_bar;
  const RMat& B = kd.B_bar;
  const RMat& C = kd.C_bar;
  const int mu = static_cast<int>(B.cols());
  double r = 0.0;
  // p_h row: only A_h22
  r = std::max(r, max_abs(block(A, ph, nh, qh, nh)));
  r = std::max(r, max_abs(block(A, ph, nh, co, nco)));
  r = std::max(r, max_abs(block(A, ph, nh, cbo, nd)));
  // x_co row
  r = std::max(r, max_abs(block(A, co, nco, qh, nh)));
  r = std::max(r, max_abs(block(A, co, nco, cbo, nd)));
  // x_cbo row
  r = std::max(r, max_abs(block(A, cbo, nd, qh, nh)));
  r = std::max(r, max_abs(block(A, cbo, nd, co, nco)));
  if (mu > 0) {
    r = std::max(r, max_abs(block(B, ph, nh, 0, mu)));
    r = std::max(r, max_abs(block(B, cbo, nd, 0, mu)));
    r = std::max(r, max_abs(block(C, 0, static_cast<int>(C.rows()), qh, nh)));
    r = std::max(r, max_abs(block(C, 0, static_cast<int>(C.rows()), cbo, nd)));
  }
  return r;
}

KalmanDecomposition kalman_decompose(const QuadratureSystem& qs_in, double tol) {
  const RealizabilityReport rr = check_realizability(qs_in, 1e-8);
  if (!rr.passes) {
    std::ostringstream os;
    os << "kalman_decompose: system is not physically realizable (residual_A=" << rr.residual_A
       << ", residual_B=" << rr.residual_B << ")";
    throw PreconditionError(os.str());
  }
  KalmanDecomposition kd;
  kd.rank_tol = tol;
  kd.system = normalize_scattering(qs_in, &kd.scattering_normalized);
  const QuadratureSystem& qs = kd.system;
  const int n = qs.n();
  const Eigen::Index N = 2 * n;

  const SubspaceBasis Rc = controllable_subspace(qs, tol);
  const SubspaceBasis Ro = observable_subspace(qs, tol);
  for (const auto& w : Rc.warnings) kd.warnings.push_back(w);
  for (const auto& w : Ro.warnings) kd.warnings.push_back(w);
  const RMat Nc = complement(Rc.columns, N);
  const RMat No = complement(Ro.columns, N);

  const RMat Sco = intersect(Rc.columns, Ro.columns);
  const RMat Scob = intersect(Rc.columns, No);
  const RMat Scbo = intersect(Nc, Ro.columns);
  const RMat Scbob = intersect(Nc, No);

  const RMat* parts[] = {&Sco, &Scob, &Scbo, &Scbob};
  const SubspaceLabel labels[] = {SubspaceLabel::co, SubspaceLabel::c_obar, SubspaceLabel::cbar_o,
                                  SubspaceLabel::cbar_obar};
  Eigen::Index total = 0;
  for (int i = 0; i < 4; ++i) {
    SubspaceBasis b;
    b.columns = *parts[i];
    b.label = labels[i];
    b.threshold = kIntersectTol;
    kd.subspaces.push_back(b);
    total += parts[i]->cols();
    for (int j = i + 1; j < 4; ++j) {
      if (parts[i]->cols() && parts[j]->cols()) {
        const double ov = opnorm(RMat(parts[i]->transpose() * *parts[j]));
        if (ov > kSubspaceCheckTol)
          throw StructureError(std::string("kalman_decompose: subspaces ") + to_string(labels[i]) + " and " +
                               to_string(labels[j]) + " are not orthogonal (overlap " + std::to_string(ov) + ")");
      }
    }
  }
  if (total != N) {
    std::ostringstream os;
    os << "kalman_decompose: subspace dimensions [" << Sco.cols() << ", " << Scob.cols() << ", " << Scbo.cols()
       << ", " << Scbob.cols() << "] do not span the " << N << "-dimensional phase space";
    throw StructureError(os.str());
  }
  if (Scob.cols() != Scbo.cols() || Sco.cols() % 2 || Scbob.cols() % 2)
    throw StructureError("kalman_decompose: subspace dimensions violate the expected pairing");

  kd.dims.n_h = static_cast<int>(Scbo.cols());
  kd.dims.n_co = static_cast<int>(Sco.cols() / 2);
  kd.dims.n_cbar_obar = static_cast<int>(Scbob.cols() / 2);
  const RMat Jn = JJ(n);

  // p_h from the uncontrollable-observable part, q_h = JJ p_h
  const int nh = kd.dims.n_h;
  RMat Ph(N, nh), Qh(N, nh);
  {
    RMat W = Scbo;
    const auto order = probe_order(n, true);
    for (int k = 0; k < nh; ++k) {
      const RVec v = pivot_vector(W, order);
      Ph.col(k) = v;
      W = deflate(W, v);
    }
    Qh = Jn * Ph;
    const double r = out_of_span(Scob, Qh);
    if (r > kSubspaceCheckTol)
      throw StructureError("kalman_decompose: JJ p_h leaves the controllable-unobservable subspace (residual " +
                           std::to_string(r) + ")");
  }

  // symplectic Gram-Schmidt on a JJ-invariant subspace
  auto symplectic_basis = [&](const RMat& S, int k, const char* name, RMat& Qb, RMat& Pb) {
    Qb.resize(N, k);
    Pb.resize(N, k);
    RMat W = S;
    const auto order = probe_order(n, false);
    for (int i = 0; i < k; ++i) {
      const RVec u = pivot_vector(W, order);
      const RVec v = Jn.transpose() * u;
      const double r = out_of_span(W, v);
      if (r > kSubspaceCheckTol)
        throw StructureError(std::string("kalman_decompose: ") + name + " subspace is not JJ-invariant (residual " +
                             std::to_string(r) + ")");
      Qb.col(i) = u;
      Pb.col(i) = v;
      RMat uv(N, 2);
      uv << u, v;
      W = deflate(W, uv);
    }
  };
  RMat Qco, Pco, Qd, Pd;
  symplectic_basis(Sco, kd.dims.n_co, "co", Qco, Pco);
  symplectic_basis(Scbob, kd.dims.n_cbar_obar, "cbar_obar", Qd, Pd);

  kd.T.resize(N, N);
  kd.T << Qh, Ph, Qco, Pco, Qd, Pd;
  kd.orthogonality_residual = opnorm(RMat(kd.T.transpose() * kd.T - RMat::Identity(N, N)));
  RMat Jblk = RMat::Zero(N, N);
  Jblk.block(0, 0, 2 * nh, 2 * nh) = JJ(nh);
  Jblk.block(2 * nh, 2 * nh, 2 * kd.dims.n_co, 2 * kd.dims.n_co) = JJ(kd.dims.n_co);
  Jblk.bottomRightCorner(2 * kd.dims.n_cbar_obar, 2 * kd.dims.n_cbar_obar) = JJ(kd.dims.n_cbar_obar);
  kd.symplectic_residual = opnorm(RMat(kd.T.transpose() * Jn * kd.T - Jblk));

  for (int i = 0; i < nh; ++i) {
    kd.qnd_indices.push_back(kd.offset_ph() + i);
    kd.qmfs_indices.push_back(kd.offset_ph() + i);
  }
  for (int i = 0; i < 2 * kd.dims.n_cbar_obar; ++i) kd.dfs_indices.push_back(kd.offset_cbo() + i);

  fill_blocks(kd);
  return kd;
}

KalmanDecomposition apply_transform(const KalmanDecomposition& kd, const QuadratureSystem& qs) {
  if (qs.A.rows() != kd.T.rows() || qs.D.rows() != kd.system.D.rows())
    throw DimensionError("apply_transform: system size does not match the decomposition");
  KalmanDecomposition out = kd;
  out.system = normalize_scattering(qs, &out.scattering_normalized);
  out.warnings.clear();
  fill_blocks(out);
  return out;
}

DecomposedDynamics decomposed_dynamics(const KalmanDecomposition& kd) {
  DecomposedDynamics d;
  const int nh = kd.dims.n_h, nco = 2 * kd.dims.n_co, nd = 2 * kd.dims.n_cbar_obar;
  const int qh = kd.offset_qh(), ph = kd.offset_ph(), co = kd.offset_co(), cbo = kd.offset_cbo();
  const RMat& A = kd.A_bar;
  const RMat& B = kd.B_bar;
  const RMat& C = kd.C_bar;
  const int mu = static_cast<int>(B.cols()), my = static_cast<int>(C.rows());
  d.A_h11 = block(A, qh, nh, qh, nh);
  d.A_h12 = block(A, qh, nh, ph, nh);
  d.A_h22 = block(A, ph, nh, ph, nh);
  d.A12 = block(A, qh, nh, co, nco);
  d.A13 = block(A, qh, nh, cbo, nd);
  d.A21 = block(A, co, nco, ph, nh);
  d.A_co = block(A, co, nco, co, nco);
  d.A31 = block(A, cbo, nd, ph, nh);
  d.A_cbo = block(A, cbo, nd, cbo, nd);
  d.B_h = block(B, qh, nh, 0, mu);
  d.B_co = block(B, co, nco, 0, mu);
  d.C_h = block(C, 0, my, ph, nh);
  d.C_co = block(C, 0, my, co, nco);

  std::vector<int> perm;
  std::vector<std::string> raw(A.rows());
  for (int i = 0; i < nh; ++i) raw[qh + i] = "qh" + std::to_string(i + 1);
  for (int i = 0; i < nh; ++i) raw[ph + i] = "ph" + std::to_string(i + 1);
  for (int i = 0; i < nco / 2; ++i) {
    raw[co + i] = "qco" + std::to_string(i + 1);
    raw[co + nco / 2 + i] = "pco" + std::to_string(i + 1);
  }
  for (int i = 0; i < nd / 2; ++i) {
    raw[cbo + i] = "qd" + std::to_string(i + 1);
    raw[cbo + nd / 2 + i] = "pd" + std::to_string(i + 1);
  }
  for (int i = 0; i < nh; ++i) perm.push_back(qh + i);
  for (int i = 0; i < nco; ++i) perm.push_back(co + i);
  for (int i = 0; i < nd; ++i) perm.push_back(cbo + i);
  for (int i = 0; i < nh; ++i) perm.push_back(ph + i);
  const int N = static_cast<int>(perm.size());
  d.A_cascade.resize(N, N);
  d.B_cascade.resize(N, mu);
  d.C_cascade.resize(my, N);
  for (int i = 0; i < N; ++i) {
    d.names.push_back(raw[perm[i]]);
    for (int j = 0; j < N; ++j) d.A_cascade(i, j) = A(perm[i], perm[j]);
    d.B_cascade.row(i) = B.row(perm[i]);
    d.C_cascade.col(i) = C.col(perm[i]);
  }
  return d;
}

std::string DecomposedDynamics::to_text(double zero_tol) const {
  std::ostringstream os;
  os.precision(6);
  const Eigen::Index N = A_cascade.rows();
  auto term = [&](std::ostringstream& line, bool& first, double c, const std::string& name) {
    if (std::abs(c) <= zero_tol) return;
    if (first) {
      line << (c < 0 ? "-" : "");
    } else {
      line << (c < 0 ? " - " : " + ");
    }
    line << std::abs(c) << "*" << name;
    first = false;
  };
  for (Eigen::Index i = 0; i < N; ++i) {
    std::ostringstream line;
    bool first = true;
    for (Eigen::Index j = 0; j < N; ++j) term(line, first, A_cascade(i, j), names[j]);
    for (Eigen::Index j = 0; j < B_cascade.cols(); ++j) term(line, first, B_cascade(i, j), "u" + std::to_string(j + 1));
    os << "d(" << names[i] << ")/dt = " << (first ? "0" : line.str()) << "\n";
  }
  for (Eigen::Index i = 0; i < C_cascade.rows(); ++i) {
    std::ostringstream line;
    bool first = true;
    for (Eigen::Index j = 0; j < N; ++j) term(line, first, C_cascade(i, j), names[j]);
    os << "y" << (i + 1) << " = " << (first ? "0" : line.str()) << " + u" << (i + 1) << "\n";
  }
  return os.str();
}

std::vector<cplx> default_bae_samples() {
  return {cplx(0.3, 0.1), cplx(0.0, 1.7), cplx(-0.5, 2.0), cplx(2.5, 0.0), cplx(1.0, -3.0), cplx(0.05, 0.45)};
}

BaeResult check_bae(const KalmanDecomposition& kd, BaeDirection direction, const std::vector<cplx>& samples,
                    double tol) {
  BaeResult res;
  const int m = kd.system.m();
  const int nco = kd.dims.n_co;
  if (m == 0) {
    res.holds = res.consistent = true;
    res.notes.push_back("no field channels");
    return res;
  }
  const bool use_real = direction == BaeDirection::p_in_to_q_out;
  const double scale = std::max(1.0, opnorm(kd.system.C) * opnorm(kd.system.C));
  const double thr = tol * scale;

  // Kalman form: [Lq Lp] (sI - JJ H_co)^{-1} [Lp^T; -Lq^T]
  RMat Lq, Lp, Gco;
  Eigen::VectorXcd eig_co;
  if (nco > 0) {
    const CMat top = kd.Lambda_co.topRows(m);
    Lq = use_real ? RMat(top.leftCols(nco).real()) : RMat(top.leftCols(nco).imag());
    Lp = use_real ? RMat(top.rightCols(nco).real()) : RMat(top.rightCols(nco).imag());
    const RMat Hco = kd.H_bar.block(kd.offset_co(), kd.offset_co(), 2 * nco, 2 * nco);
    Gco = JJ(nco) * Hco;
    eig_co = Eigen::EigenSolver<RMat>(Gco, false).eigenvalues();
  }
  const Eigen::VectorXcd eig_A =
      kd.system.A.rows() ? Eigen::VectorXcd(Eigen::EigenSolver<RMat>(kd.system.A, false).eigenvalues())
                         : Eigen::VectorXcd();
  auto near_spectrum = [](cplx s, const Eigen::VectorXcd& ev) {
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(s - ev(i)) < 1e-8) return true;
    return false;
  };

  for (cplx s : samples) {
    if (near_spectrum(s, eig_co) || near_spectrum(s, eig_A)) {
      std::ostringstream os;
      os << "sample point " << s << " lies on the spectrum and was skipped";
      res.notes.push_back(os.str());
      continue;
    }
    ++res.points_used;
    if (nco > 0) {
      RMat L(m, 2 * nco), R(2 * nco, m);
      L << Lq, Lp;
      R << Lp.transpose(), -Lq.transpose();
      const CMat M = s * CMat::Identity(2 * nco, 2 * nco) - Gco.cast<cplx>();
      const CMat val = L.cast<cplx>() * M.partialPivLu().solve(R.cast<cplx>());
      res.max_residual = std::max(res.max_residual, opnorm(val));
    }
    CMat Xi;
    transfer_function_real(kd.system, s, &Xi);
    const CMat cross = use_real ? CMat(Xi.block(0, m, m, m)) : CMat(Xi.block(m, 0, m, m));
    res.direct_residual = std::max(res.direct_residual, opnorm(cross));
  }
  if (res.points_used == 0) throw PreconditionError("check_bae: every sample point lies on the spectrum");
  const bool k_holds = res.max_residual <= thr;
  const bool d_holds = res.direct_residual <= thr;
  res.holds = k_holds;
  res.consistent = k_holds == d_holds;
  if (!res.consistent)
    res.notes.push_back("Kalman-form and direct transfer-function evaluations disagree");
  return res;
}

Prop61Report verify_prop61(const QuadratureSystem& qs, double tol) {
  Prop61Report r;
  bool dummy = false;
  const QuadratureSystem ns = normalize_scattering(qs, &dummy);
  r.ctrb_rank = controllable_subspace(ns).dim();
  r.obsv_rank = observable_subspace(ns).dim();
  r.ranks_equal = r.ctrb_rank == r.obsv_rank;
  r.hurwitz = is_hurwitz(ns, tol).stable;
  const int N = static_cast<int>(ns.A.rows());
  r.hurwitz_implies_full = !r.hurwitz || (r.ctrb_rank == N && r.obsv_rank == N);
  const KalmanDecomposition kd = kalman_decompose(ns);
  const int nd = 2 * kd.dims.n_cbar_obar;
  if (nd > 0) {
    const RMat Ad = kd.A_bar.bottomRightCorner(nd, nd);
    const Eigen::VectorXcd ev = Eigen::EigenSolver<RMat>(Ad, false).eigenvalues();
    r.cbo_max_abs_real = ev.real().cwiseAbs().maxCoeff();
  }
  r.cbo_on_imaginary_axis = r.cbo_max_abs_real <= 1e-8;
  r.holds = r.ranks_equal && r.hurwitz_implies_full && r.cbo_on_imaginary_axis;
  return r;
}

}  // namespace lqs
