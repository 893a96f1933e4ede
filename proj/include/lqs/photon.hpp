#pragma once

#include <string>
#include <vector>

#include "lqs/system.hpp"

namespace lqs {

struct PulseShape {
  double t0 = 0.0;
  double dt = 1.0;
  CVec samples;

  double norm() const;  // sqrt(sum |xi|^2 dt)
  double time(Eigen::Index k) const { return t0 + dt * static_cast<double>(k); }
  void validate() const;
};

inline constexpr int kDefaultPadding = 4;

struct PulseResponse {
  std::vector<PulseShape> pulses;
  double nyquist_deviation = 0.0;  // ||Xi(i w_max) - D|| on the padded grid
  std::vector<std::string> warnings;
};

// Steady-state single-photon output nu[iw] = Xi_{G-}[iw] mu[iw], one pulse per channel.
PulseResponse output_pulse_passive(const PhysicalParams& p, const std::vector<PulseShape>& mu,
                                   int padding = kDefaultPadding);

struct PhotonGaussianSpec {
  int m = 0;
  // m x m pulse matrices, row-major: xi_minus[i * m + j]
  std::vector<PulseShape> xi_minus, xi_plus;
  std::vector<double> R_omegas;  // frequencies at which R is sampled
  std::vector<CMat> R;           // 2m x 2m per frequency
  double structure_residual = 0.0;  // distance of the transformed pulse matrix from the doubled-up form
};

PhotonGaussianSpec photon_gaussian_transform(const StateSpace& ss, const PhotonGaussianSpec& in,
                                             int padding = kDefaultPadding);

// Tensor over l photon slots; each axis is (channel, time) of size m * L with the
// time index fastest. Storage is row-major over axes (last axis fastest).
struct PhotonTensor {
  int photons = 1;
  int m = 1;
  Eigen::Index L = 0;
  double t0 = 0.0;
  double dt = 1.0;
  CVec data;

  Eigen::Index axis_size() const { return m * L; }
  Eigen::Index size() const;
  cplx& at(const std::vector<Eigen::Index>& idx);
  cplx at(const std::vector<Eigen::Index>& idx) const;
  double norm() const;  // discrete L2 norm with dt^photons weight
  void validate() const;
};

inline constexpr Eigen::Index kMaxTensorEntries = 10000000;

PhotonTensor separable_tensor(const std::vector<PulseShape>& factors);  // m = 1 only

// Applies g_{G-} along one tensor axis or along every axis.
PhotonTensor mode_product(const PhysicalParams& p, const PhotonTensor& psi, int axis, int padding = kDefaultPadding,
                          Exec exec = Exec::parallel);
PhotonTensor multiphoton_transform(const PhysicalParams& p, const PhotonTensor& psi, int padding = kDefaultPadding,
                                   Exec exec = Exec::parallel);

// Frequencies of an FFT grid of length L and spacing dt, in FFT bin order.
std::vector<double> fft_frequencies(Eigen::Index L, double dt);

}  // namespace lqs
