#ifndef H2R_DISTANCE_HPP
#define H2R_DISTANCE_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstddef>

#include "h2r/core.hpp"
#include "h2r/error.hpp"
#include "h2r/geometry.hpp"
#include "h2r/parallel.hpp"

namespace h2r {

struct ActionDistanceWeights {
  double lambda1 = 1.0;  // hand pose
  double lambda2 = 0.5;  // orientation

  void validate() const {
    H2R_REQUIRE(std::isfinite(lambda1) && std::isfinite(lambda2) && lambda1 >= 0.0 && lambda2 >= 0.0,
                ErrorKind::InvalidInput, "distance weights must be finite and non-negative");
  }
};

/// |t_h - t_r|_1 + lambda1 |p_h - p_r|_1 + lambda2 * rot_distance(o_h, o_r).
inline double d_act(const ActionFrame& h, const ActionFrame& r, const ActionDistanceWeights& w) {
  H2R_REQUIRE(h.joint_dim() == r.joint_dim(), ErrorKind::DimensionMismatch,
              "action frames have different joint dimensions");
  double d = (h.translation - r.translation).lpNorm<1>();
  if (h.joint_dim() > 0) d += w.lambda1 * (h.joints - r.joints).lpNorm<1>();
  d += w.lambda2 * rot_distance(h.orientation, r.orientation);
  return d;
}

template <typename A, typename B>
double d_vis(const Eigen::MatrixBase<A>& f1, const Eigen::MatrixBase<B>& f2) {
  H2R_REQUIRE(f1.size() == f2.size(), ErrorKind::DimensionMismatch, "feature vectors differ in length");
  return (f1 - f2).norm();
}

/// Metric tags for cost_matrix / alignment / retrieval.
struct ActionMetric {
  ActionDistanceWeights weights;
};
struct VisualMetric {};

/// Entry (i, j) = dist(i, j). Rows are filled independently so the result
/// is identical for any thread count.
template <typename Dist>
Eigen::MatrixXd cost_matrix(std::size_t rows, std::size_t cols, Dist&& dist, unsigned threads = 1) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  parallel_for(rows, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < cols; ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dist(i, j);
    }
  });
  H2R_REQUIRE(c.allFinite(), ErrorKind::NumericalFailure, "cost matrix has non-finite entries");
  return c;
}

inline Eigen::MatrixXd cost_matrix(std::span<const ActionFrame> a, std::span<const ActionFrame> b,
                                   const ActionMetric& metric, unsigned threads = 1) {
  metric.weights.validate();
  if (!a.empty() && !b.empty()) {
    H2R_REQUIRE(a.front().joint_dim() == b.front().joint_dim(), ErrorKind::DimensionMismatch,
                "sequences have different joint dimensions");
  }
  return cost_matrix(
      a.size(), b.size(), [&](std::size_t i, std::size_t j) { return d_act(a[i], b[j], metric.weights); },
      threads);
}

inline Eigen::MatrixXd cost_matrix(const Trajectory& a, const Trajectory& b, const ActionMetric& metric,
                                   unsigned threads = 1) {
  return cost_matrix(std::span<const ActionFrame>(a.frames()), std::span<const ActionFrame>(b.frames()), metric,
                     threads);
}

inline Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, VisualMetric,
                                   unsigned threads = 1) {
  H2R_REQUIRE(a.cols() == b.cols(), ErrorKind::DimensionMismatch, "feature dimensions differ");
  return cost_matrix(
      static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()),
      [&](std::size_t i, std::size_t j) {
        return d_vis(a.row(static_cast<Eigen::Index>(i)), b.row(static_cast<Eigen::Index>(j)));
      },
      threads);
}

inline Eigen::MatrixXd cost_matrix(const FeatureSequence& a, const FeatureSequence& b, VisualMetric m,
                                   unsigned threads = 1) {
  return cost_matrix(a.rows(), b.rows(), m, threads);
}

}  // namespace h2r

#endif  // H2R_DISTANCE_HPP
