#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lqs/system.hpp"

namespace lqs {

// as_published: gain V C1^T + M, innovation dnu ~ N(0, dt), dQ = dnu + C1 pi dt.
// normalized:   gain sqrt2 V C1^T + M with the same unit innovation, dQ = dnu / sqrt2 + C1 pi dt.
// The normalized form is the one consistent with vacuum covariance I/2.
enum class FilterForm { as_published, normalized };

struct FilterConfig {
  QuadratureSystem qs;
  RMat C1;  // m x 2n, first m rows of C
  RMat M;   // 2n x m, B [I; 0] / sqrt2
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  RVec initial_mean;
  RMat initial_cov;
  FilterForm form = FilterForm::as_published;

  void validate() const;
  long steps() const;
};

// Fills C1 and M from qs.
FilterConfig make_filter_config(const QuadratureSystem& qs, double dt, double horizon, std::uint64_t seed,
                                const RVec& initial_mean, const RMat& initial_cov,
                                FilterForm form = FilterForm::as_published);

// Single-mode oscillator, L = sqrt(kappa) a, H = omega a* a, homodyne on Q_out.
// as_published starts from V(0) = I (the example's own initial condition), normalized from I/2.
FilterConfig example_oscillator_filter(double kappa, double omega, FilterForm form = FilterForm::as_published);

RMat filter_gain(const RMat& C1, const RMat& M, const RMat& V, FilterForm form);
RMat riccati_rhs(const QuadratureSystem& qs, const RMat& C1, const RMat& M, const RMat& V,
                 FilterForm form = FilterForm::as_published);

struct RiccatiTrajectory {
  std::vector<double> times;
  std::vector<RMat> V;
  double min_validity_eig = std::numeric_limits<double>::infinity();  // of V + i/2 JJ, every 10th step
  double max_asymmetry = 0.0;
};

// RK4. Throws DivergenceError on blow-up; for the normalized form also when the
// covariance leaves the valid set by more than 1e-6.
RiccatiTrajectory integrate_riccati(const FilterConfig& cfg);

struct FilterTrajectory {
  std::vector<double> times;
  std::vector<RVec> mean;
  std::vector<RMat> cov;            // empty for ensemble runs (shared Riccati solution)
  std::vector<RVec> innovation;     // dnu per step
  std::vector<RVec> measurement_increments;  // dQ per step
  std::vector<RVec> measurement;    // cumulative Q_out, starts at 0
};

using DriveFn = std::function<RVec(double)>;

// Counter-based generator keyed by (seed, path).
class PathRng {
 public:
  using result_type = std::uint64_t;
  PathRng(std::uint64_t seed, std::uint64_t path);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

FilterTrajectory simulate_filter(const FilterConfig& cfg, std::uint64_t path = 0, const DriveFn& drive = nullptr);
FilterTrajectory simulate_filter(const FilterConfig& cfg, const RiccatiTrajectory& riccati, std::uint64_t path,
                                 const DriveFn& drive, bool keep_cov);

// Re-runs the filter from a stored measurement record; bit-exact with the run that produced it.
FilterTrajectory replay_filter(const FilterConfig& cfg, const std::vector<RVec>& dQ, const DriveFn& drive = nullptr);

struct Ensemble {
  RiccatiTrajectory riccati;
  std::vector<FilterTrajectory> paths;  // cov left empty
};

Ensemble simulate_ensemble(const FilterConfig& cfg, int n_paths, Exec exec = Exec::parallel,
                           const DriveFn& drive = nullptr);

}  // namespace lqs
