#include "lqs/photon.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>

#include "lqs/doubled.hpp"

namespace lqs {

namespace {

std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

// In-place-capable 1-D complex FFT pair of fixed length; execution is thread-safe.
class FftPair {
 public:
  explicit FftPair(Eigen::Index n) : n_(n) {
    std::vector<cplx> a(n), b(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), pa, pb, FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), pa, pb, FFTW_BACKWARD, flags);
    if (!fwd_ || !bwd_) throw NumericalError("FFT planning failed");
  }
  ~FftPair() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  void forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)), reinterpret_cast<fftw_complex*>(out));
  }
  // Unnormalized; caller divides by n.
  void backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)), reinterpret_cast<fftw_complex*>(out));
  }
  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

// Applies per-bin matrices Xi[b] (c x c) to a c-channel signal stored as rows of X (c x L).
CMat filter_channels(const FftPair& fft, const std::vector<CMat>& Xi, const CMat& X) {
  const Eigen::Index c = X.rows(), L = X.cols(), Lp = fft.size();
  // row-major c x Lp buffers so each channel is contiguous
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> in = decltype(in)::Zero(c, Lp), spec(c, Lp),
                                                                        out(c, Lp);
  in.leftCols(L) = X;
  for (Eigen::Index i = 0; i < c; ++i) fft.forward(&in(i, 0), &spec(i, 0));
  for (Eigen::Index b = 0; b < Lp; ++b) spec.col(b) = (Xi[b] * spec.col(b)).eval();
  for (Eigen::Index i = 0; i < c; ++i) fft.backward(&spec(i, 0), &out(i, 0));
  return out.leftCols(L) / static_cast<double>(Lp);
}

double max_real_eig(const CMat& A) {
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  return Eigen::ComplexEigenSolver<CMat>(A, false).eigenvalues().real().maxCoeff();
}

void require_passive_hurwitz(const PhysicalParams& p, const char* who) {
  p.validate();
  if (!is_passive(p)) throw PreconditionError(std::string(who) + ": system is not passive");
  if (p.n > 0) {
    const CMat A = -kI * p.Omega_minus - 0.5 * p.C_minus.adjoint() * p.C_minus;
    if (max_real_eig(A) >= -1e-12) throw PreconditionError(std::string(who) + ": system is not Hurwitz stable");
  }
}

Eigen::Index padded_length(Eigen::Index L, int padding) {
  if (padding < 1) throw ParameterError("padding", padding, "padding factor must be at least 1");
  return L * padding;
}

std::vector<CMat> passive_bins(const PhysicalParams& p, const std::vector<double>& omegas) {
  std::vector<CMat> Xi(omegas.size());
  for (size_t b = 0; b < omegas.size(); ++b) Xi[b] = passive_transfer(p, kI * omegas[b]);
  return Xi;
}

double nyquist_dev(const std::vector<CMat>& Xi, const std::vector<double>& omegas, const CMat& D) {
  // the bin with the largest |omega|
  size_t best = 0;
  for (size_t b = 1; b < omegas.size(); ++b)
    if (std::abs(omegas[b]) > std::abs(omegas[best])) best = b;
  return opnorm(CMat(Xi[best] - D));
}

void same_grid(const PulseShape& a, const PulseShape& b, const char* who) {
  if (a.samples.size() != b.samples.size() || std::abs(a.dt - b.dt) > 1e-15 * std::abs(a.dt) ||
      std::abs(a.t0 - b.t0) > 1e-12 * std::max(1.0, std::abs(a.t0)))
    throw DimensionError(std::string(who) + ": pulses are not on a common time grid");
}

}  // namespace

double PulseShape::norm() const { return std::sqrt(samples.squaredNorm() * dt); }

void PulseShape::validate() const {
  if (samples.size() < 2) throw DimensionError("pulse needs at least 2 samples");
  if (!(dt > 0.0)) throw ParameterError("dt", dt, "pulse dt must be positive");
  if (!samples.allFinite()) throw ParameterError("samples", 0.0, "pulse samples are not finite");
}

std::vector<double> fft_frequencies(Eigen::Index L, double dt) {
  std::vector<double> w(L);
  for (Eigen::Index k = 0; k < L; ++k) {
    const Eigen::Index kk = k <= (L - 1) / 2 ? k : k - L;
    w[k] = 2.0 * M_PI * static_cast<double>(kk) / (static_cast<double>(L) * dt);
  }
  return w;
}

PulseResponse output_pulse_passive(const PhysicalParams& p, const std::vector<PulseShape>& mu, int padding) {
  require_passive_hurwitz(p, "output_pulse_passive");
  if (static_cast<int>(mu.size()) != p.m) throw DimensionError("output_pulse_passive: need one pulse per channel");
  PulseResponse r;
  if (p.m == 0) return r;
  for (const auto& s : mu) {
    s.validate();
    same_grid(mu[0], s, "output_pulse_passive");
  }
  const Eigen::Index L = mu[0].samples.size();
  const Eigen::Index Lp = padded_length(L, padding);
  const auto omegas = fft_frequencies(Lp, mu[0].dt);
  const auto Xi = passive_bins(p, omegas);
  r.nyquist_deviation = nyquist_dev(Xi, omegas, p.S);
  if (r.nyquist_deviation > 0.1) {
    std::ostringstream os;
    os << "transfer function at the Nyquist frequency still differs from S by " << r.nyquist_deviation
       << "; refine dt";
    r.warnings.push_back(os.str());
  }
  CMat X(p.m, L);
  for (int i = 0; i < p.m; ++i) X.row(i) = mu[i].samples.transpose();
  const FftPair fft(Lp);
  const CMat Y = filter_channels(fft, Xi, X);
  for (int i = 0; i < p.m; ++i) {
    PulseShape o = mu[i];
    o.samples = Y.row(i).transpose();
    r.pulses.push_back(o);
  }
  return r;
}

PhotonGaussianSpec photon_gaussian_transform(const StateSpace& ss, const PhotonGaussianSpec& in, int padding) {
  const int m = in.m;
  if (m != ss.m()) throw DimensionError("photon_gaussian_transform: channel count differs from the system");
  if (static_cast<int>(in.xi_minus.size()) != m * m || static_cast<int>(in.xi_plus.size()) != m * m)
    throw DimensionError("photon_gaussian_transform: pulse matrices must be m x m");
  if (in.R.size() != in.R_omegas.size()) throw DimensionError("photon_gaussian_transform: R grid mismatch");
  if (max_real_eig(ss.A) >= -1e-12) throw PreconditionError("photon_gaussian_transform: system is not Hurwitz stable");
  for (const auto& R : in.R)
    if (R.rows() != 2 * m || R.cols() != 2 * m) throw DimensionError("photon_gaussian_transform: R must be 2m x 2m");

  PhotonGaussianSpec out = in;
  for (size_t k = 0; k < in.R.size(); ++k) {
    const CMat Xi = transfer_function(ss, kI * in.R_omegas[k]).value;
    out.R[k] = Xi * in.R[k] * Xi.adjoint();
  }
  if (m == 0) return out;
  const PulseShape& ref = in.xi_minus[0];
  for (const auto& s : in.xi_minus) {
    s.validate();
    same_grid(ref, s, "photon_gaussian_transform");
  }
  for (const auto& s : in.xi_plus) {
    s.validate();
    same_grid(ref, s, "photon_gaussian_transform");
  }
  const Eigen::Index L = ref.samples.size();
  const Eigen::Index Lp = padded_length(L, padding);
  const auto omegas = fft_frequencies(Lp, ref.dt);
  std::vector<CMat> Xi(Lp);
  {
    const auto grid = transfer_grid(ss, omegas, Exec::parallel);
    for (Eigen::Index b = 0; b < Lp; ++b) Xi[b] = grid[b];
  }
  const FftPair fft(Lp);
  // full doubled-up pulse matrix, one 2m-channel signal per column
  std::vector<CMat> cols_out(2 * m);
  for (int j = 0; j < 2 * m; ++j) {
    CMat X(2 * m, L);
    for (int i = 0; i < 2 * m; ++i) {
      const bool top = i < m, left = j < m;
      const int ii = i % m, jj = j % m;
      const CVec& s = top ? (left ? in.xi_minus[ii * m + jj].samples : in.xi_plus[ii * m + jj].samples)
                          : (left ? in.xi_plus[ii * m + jj].samples : in.xi_minus[ii * m + jj].samples);
      if (top)
        X.row(i) = s.transpose();
      else
        X.row(i) = s.conjugate().transpose();
    }
    cols_out[j] = filter_channels(fft, Xi, X);
  }
  double res = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      out.xi_minus[i * m + j].samples = cols_out[j].row(i).transpose();
      out.xi_plus[i * m + j].samples = cols_out[m + j].row(i).transpose();
      // lower blocks must be the conjugates of the upper ones
      res = std::max(res, (cols_out[j].row(m + i) - cols_out[m + j].row(i).conjugate()).cwiseAbs().maxCoeff());
      res = std::max(res, (cols_out[m + j].row(m + i) - cols_out[j].row(i).conjugate()).cwiseAbs().maxCoeff());
    }
  out.structure_residual = res;
  return out;
}

Eigen::Index PhotonTensor::size() const {
  Eigen::Index s = 1;
  for (int k = 0; k < photons; ++k) s *= axis_size();
  return s;
}

void PhotonTensor::validate() const {
  if (photons < 1 || m < 1 || L < 2) throw DimensionError("photon tensor: need photons >= 1, m >= 1, L >= 2");
  if (m > 2 || photons > 2) throw ParameterError("photons", photons, "photon tensor: supported up to m = 2, 2 photons");
  if (!(dt > 0.0)) throw ParameterError("dt", dt, "photon tensor: dt must be positive");
  double total = 1.0;
  for (int k = 0; k < photons; ++k) total *= static_cast<double>(axis_size());
  if (total > static_cast<double>(kMaxTensorEntries))
    throw ResourceError("photon tensor: " + std::to_string(static_cast<long long>(total)) + " entries exceeds limit");
  if (data.size() != size()) throw DimensionError("photon tensor: data length does not match shape");
}

cplx& PhotonTensor::at(const std::vector<Eigen::Index>& idx) {
  Eigen::Index off = 0;
  for (Eigen::Index i : idx) off = off * axis_size() + i;
  return data(off);
}

cplx PhotonTensor::at(const std::vector<Eigen::Index>& idx) const {
  Eigen::Index off = 0;
  for (Eigen::Index i : idx) off = off * axis_size() + i;
  return data(off);
}

double PhotonTensor::norm() const { return std::sqrt(data.squaredNorm() * std::pow(dt, photons)); }

PhotonTensor separable_tensor(const std::vector<PulseShape>& f) {
  if (f.empty()) throw DimensionError("separable_tensor: need at least one factor");
  PhotonTensor t;
  t.photons = static_cast<int>(f.size());
  t.m = 1;
  t.L = f[0].samples.size();
  t.t0 = f[0].t0;
  t.dt = f[0].dt;
  for (const auto& s : f) same_grid(f[0], s, "separable_tensor");
  double total = 1.0;
  for (size_t k = 0; k < f.size(); ++k) total *= static_cast<double>(t.L);
  if (total > static_cast<double>(kMaxTensorEntries)) throw ResourceError("separable_tensor: tensor too large");
  t.data = CVec::Ones(1);
  for (const auto& s : f) {
    CVec nd(t.data.size() * t.L);
    for (Eigen::Index i = 0; i < t.data.size(); ++i) nd.segment(i * t.L, t.L) = t.data(i) * s.samples;
    t.data = nd;
  }
  return t;
}

PhotonTensor mode_product(const PhysicalParams& p, const PhotonTensor& psi, int axis, int padding, Exec exec) {
  require_passive_hurwitz(p, "mode_product");
  psi.validate();
  if (p.m != psi.m) throw DimensionError("mode_product: channel count differs from the system");
  if (axis < 0 || axis >= psi.photons) throw DimensionError("mode_product: axis out of range");
  const Eigen::Index A = psi.axis_size(), L = psi.L, m = psi.m;
  Eigen::Index stride = 1;
  for (int k = axis + 1; k < psi.photons; ++k) stride *= A;
  const Eigen::Index outer = psi.size() / (A * stride);
  const Eigen::Index fibers = outer * stride;
  const Eigen::Index Lp = padded_length(L, padding);
  const auto omegas = fft_frequencies(Lp, psi.dt);
  const auto Xi = passive_bins(p, omegas);
  const FftPair fft(Lp);
  PhotonTensor out = psi;

  auto run = [&](Eigen::Index f) {
    const Eigen::Index o = f / stride, s = f % stride;
    const Eigen::Index base = o * A * stride + s;
    CMat X(m, L);
    for (Eigen::Index c = 0; c < m; ++c)
      for (Eigen::Index j = 0; j < L; ++j) X(c, j) = psi.data(base + (c * L + j) * stride);
    const CMat Y = filter_channels(fft, Xi, X);
    for (Eigen::Index c = 0; c < m; ++c)
      for (Eigen::Index j = 0; j < L; ++j) out.data(base + (c * L + j) * stride) = Y(c, j);
  };
  if (exec == Exec::serial) {
    for (Eigen::Index f = 0; f < fibers; ++f) run(f);
  } else {
    std::exception_ptr err;
#pragma omp parallel for schedule(static)
    for (Eigen::Index f = 0; f < fibers; ++f) {
      try {
        run(f);
      } catch (...) {
#pragma omp critical
        err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  }
  return out;
}

PhotonTensor multiphoton_transform(const PhysicalParams& p, const PhotonTensor& psi, int padding, Exec exec) {
  PhotonTensor t = psi;
  for (int k = 0; k < psi.photons; ++k) t = mode_product(p, t, k, padding, exec);
  return t;
}

}  // namespace lqs
