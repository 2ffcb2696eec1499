#ifndef H2R_METRICS_HPP
#define H2R_METRICS_HPP

// Spectral arc length smoothness and the DTW-based action distance between
// demonstration sets.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "h2r/alignment.hpp"
#include "h2r/core.hpp"
#include "h2r/distance.hpp"
#include "h2r/error.hpp"
#include "h2r/geometry.hpp"
#include "h2r/parallel.hpp"

namespace h2r {

/// Finite-difference translational speed: |x_{t+1} - x_t| / dt.
inline std::vector<double> speed_profile(const Trajectory& traj) {
  H2R_REQUIRE(traj.size() >= 2, ErrorKind::InsufficientData, "speed profile needs at least two frames");
  std::vector<double> s(traj.size() - 1);
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    s[t] = (traj[t + 1].translation - traj[t].translation).norm() / traj.dt();
  }
  return s;
}

struct SparcConfig {
  int pad_factor = 4;
  double omega_c_max = 15.0;  // hertz
  double amp_threshold = 0.05;

  void validate() const {
    H2R_REQUIRE(pad_factor >= 1, ErrorKind::InvalidInput, "pad factor must be >= 1");
    H2R_REQUIRE(std::isfinite(omega_c_max) && omega_c_max > 0.0, ErrorKind::InvalidInput, "cutoff ceiling must be positive");
    H2R_REQUIRE(amp_threshold > 0.0 && amp_threshold < 1.0, ErrorKind::InvalidInput, "amplitude threshold must lie in (0, 1)");
  }
};

struct SparcResult {
  double sparc = 0.0;
  double omega_c = 0.0;  // hertz
};

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Magnitude of the one-sided DFT of `x` zero-padded to `n` samples.
inline std::vector<double> padded_magnitude(std::span<const double> x, std::size_t n) {
  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };
  struct PlanFree {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
  };
  // The FFTW planner is not reentrant; execution of distinct plans is.
  static std::mutex planner_mutex;

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  H2R_REQUIRE(in && out, ErrorKind::NumericalFailure, "fft buffer allocation failed");
  std::unique_ptr<fftw_plan_s, PlanFree> plan;
  {
    std::lock_guard lock(planner_mutex);
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  H2R_REQUIRE(plan != nullptr, ErrorKind::NumericalFailure, "fft planning failed");
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = i < x.size() ? x[i] : 0.0;
  fftw_execute(plan.get());
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(out.get()[i][0], out.get()[i][1]);
  {
    std::lock_guard lock(planner_mutex);
    plan.reset();
  }
  return mag;
}

}  // namespace detail

/// Spectral arc length of a speed profile sampled every `dt` seconds.
///
/// The profile is zero-padded to pad_factor * next_pow2(T) samples and its
/// magnitude spectrum normalized by the DC bin. The cutoff is the highest
/// frequency bin at or below omega_c_max whose normalized magnitude is still
/// >= amp_threshold (at least the first non-DC bin). The result is minus the
/// length of the piecewise-linear curve (f / omega_c, S(f)) over [0, omega_c].
inline SparcResult sparc(std::span<const double> speed, double dt, const SparcConfig& cfg = {}) {
  cfg.validate();
  H2R_REQUIRE(speed.size() >= 4, ErrorKind::InsufficientData, "sparc needs at least 4 samples");
  H2R_REQUIRE(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidInput, "dt must be positive");
  bool any_nonzero = false;
  for (double v : speed) {
    H2R_REQUIRE(std::isfinite(v), ErrorKind::InvalidInput, "speed profile must be finite");
    any_nonzero = any_nonzero || v != 0.0;
  }
  H2R_REQUIRE(any_nonzero, ErrorKind::DegenerateProfile, "speed profile is identically zero");

  const std::size_t n = static_cast<std::size_t>(cfg.pad_factor) * detail::next_pow2(speed.size());
  std::vector<double> mag = detail::padded_magnitude(speed, n);
  H2R_REQUIRE(mag[0] > 0.0, ErrorKind::DegenerateProfile, "speed profile has zero DC component");
  const double dc = mag[0];
  for (double& m : mag) m /= dc;

  const double df = 1.0 / (static_cast<double>(n) * dt);
  std::size_t last = 0;
  while (last + 1 < mag.size() && static_cast<double>(last + 1) * df <= cfg.omega_c_max) ++last;
  std::size_t cut = 0;
  for (std::size_t m = last; m > 0; --m) {
    if (mag[m] >= cfg.amp_threshold) {
      cut = m;
      break;
    }
  }
  if (cut == 0) cut = 1;

  const double omega_c = static_cast<double>(cut) * df;
  double arc = 0.0;
  for (std::size_t m = 1; m <= cut; ++m) {
    const double dx = df / omega_c;
    const double dy = mag[m] - mag[m - 1];
    arc += std::sqrt(dx * dx + dy * dy);
  }
  return {-arc, omega_c};
}

inline SparcResult sparc(const Trajectory& traj, const SparcConfig& cfg = {}) {
  const auto s = speed_profile(traj);
  return sparc(s, traj.dt(), cfg);
}

namespace detail {

// Mean over the warp path of |t_a - t_b|_1 + lambda2 * rot_distance.
inline double pair_action_distance(const Trajectory& a, const Trajectory& b, const ActionDistanceWeights& w) {
  const WarpPath path = dtw(cost_matrix(a, b, ActionMetric{w}));
  double sum = 0.0;
  for (const auto& [i, j] : path.pairs) {
    sum += (a[i].translation - b[j].translation).lpNorm<1>() + w.lambda2 * rot_distance(a[i].orientation, b[j].orientation);
  }
  return sum / static_cast<double>(path.pairs.size());
}

inline double mean_over_pairs(const std::vector<std::pair<const Trajectory*, const Trajectory*>>& pairs,
                              const ActionDistanceWeights& w, unsigned threads) {
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), threads,
               [&](std::size_t i) { values[i] = pair_action_distance(*pairs[i].first, *pairs[i].second, w); });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace detail

/// Mean over every (a, b) cross pair of the per-step translation and
/// orientation distance along the DTW path (path found under d_act).
inline double action_distance(std::span<const Trajectory> set_a, std::span<const Trajectory> set_b,
                              const ActionDistanceWeights& weights = {}, unsigned threads = 1) {
  H2R_REQUIRE(!set_a.empty() && !set_b.empty(), ErrorKind::InvalidInput, "trajectory sets must be non-empty");
  weights.validate();
  std::vector<std::pair<const Trajectory*, const Trajectory*>> pairs;
  for (const auto& a : set_a) {
    for (const auto& b : set_b) pairs.emplace_back(&a, &b);
  }
  return detail::mean_over_pairs(pairs, weights, threads);
}

/// Same statistic over distinct pairs i < j within one set.
inline double intra_action_distance(std::span<const Trajectory> set, const ActionDistanceWeights& weights = {},
                                    unsigned threads = 1) {
  H2R_REQUIRE(set.size() >= 2, ErrorKind::InsufficientData, "intra-set distance needs at least two trajectories");
  weights.validate();
  std::vector<std::pair<const Trajectory*, const Trajectory*>> pairs;
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) pairs.emplace_back(&set[i], &set[j]);
  }
  return detail::mean_over_pairs(pairs, weights, threads);
}

}  // namespace h2r

#endif  // H2R_METRICS_HPP
