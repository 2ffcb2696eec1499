#ifndef H2R_RETARGET_HPP
#define H2R_RETARGET_HPP

// Keypoint retargeting onto a serial kinematic chain. Both the position and
// the vector variants minimize
//
//   sum_i w_i |scale * target_i - g_i(q)|^2 + smooth * |q - q_prev|^2
//
// subject to q_lower <= q <= q_upper, where g_i is either the i-th keypoint
// position or the i-th link vector (optionally rotated into a target frame).

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "h2r/core.hpp"
#include "h2r/error.hpp"
#include "h2r/quaternion.hpp"

namespace h2r {

struct Link {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double length = 1.0;
};

/// Serial chain: joint i rotates about links[i].axis (in the frame left by
/// the previous link), then the chain advances links[i].length along the
/// local x axis. Keypoint i is the position after link i.
class KinematicChain {
 public:
  KinematicChain(std::vector<Link> links, Eigen::VectorXd q_lower, Eigen::VectorXd q_upper)
      : links_(std::move(links)), q_lower_(std::move(q_lower)), q_upper_(std::move(q_upper)) {
    const auto n = static_cast<Eigen::Index>(links_.size());
    H2R_REQUIRE(n >= 1, ErrorKind::InvalidInput, "chain needs at least one link");
    H2R_REQUIRE(q_lower_.size() == n && q_upper_.size() == n, ErrorKind::DimensionMismatch,
                "joint bounds must have one entry per link");
    for (auto& l : links_) {
      H2R_REQUIRE(l.axis.allFinite() && l.axis.norm() > 1e-12, ErrorKind::InvalidInput, "link axis must be non-zero");
      H2R_REQUIRE(std::isfinite(l.length) && l.length > 0.0, ErrorKind::InvalidInput, "link length must be positive");
      l.axis.normalize();
    }
    H2R_REQUIRE((q_lower_.array() <= q_upper_.array()).all(), ErrorKind::InvalidInput, "q_lower must not exceed q_upper");
  }

  std::size_t dof() const { return links_.size(); }
  const std::vector<Link>& links() const { return links_; }
  const Eigen::VectorXd& q_lower() const { return q_lower_; }
  const Eigen::VectorXd& q_upper() const { return q_upper_; }
  Eigen::VectorXd mid_range() const { return 0.5 * (q_lower_ + q_upper_); }
  Eigen::VectorXd clamp(const Eigen::VectorXd& q) const { return q.cwiseMax(q_lower_).cwiseMin(q_upper_); }
  bool within_bounds(const Eigen::VectorXd& q) const {
    return (q.array() >= q_lower_.array()).all() && (q.array() <= q_upper_.array()).all();
  }

 private:
  std::vector<Link> links_;
  Eigen::VectorXd q_lower_;
  Eigen::VectorXd q_upper_;
};

namespace detail {

inline std::vector<Eigen::Vector3d> chain_keypoints(const KinematicChain& chain, const Eigen::VectorXd& q) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(chain.dof());
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto& link = chain.links()[i];
    rot = rot * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], link.axis).toRotationMatrix();
    pos += rot.col(0) * link.length;
    out.push_back(pos);
  }
  return out;
}

}  // namespace detail

/// Keypoint positions for joint vector q. Out-of-bound joints are clamped
/// (with a warning on std::clog).
inline std::vector<Eigen::Vector3d> forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q) {
  H2R_REQUIRE(static_cast<std::size_t>(q.size()) == chain.dof(), ErrorKind::DimensionMismatch,
              "joint vector length differs from chain dof");
  H2R_REQUIRE(q.allFinite(), ErrorKind::InvalidInput, "joint vector must be finite");
  if (!chain.within_bounds(q)) {
    std::clog << "h2r: warning: forward_kinematics clamped joints to bounds\n";
    return detail::chain_keypoints(chain, chain.clamp(q));
  }
  return detail::chain_keypoints(chain, q);
}

/// Link vectors keypoint_i - keypoint_{i-1} (keypoint_{-1} is the base).
inline std::vector<Eigen::Vector3d> link_vectors(const std::vector<Eigen::Vector3d>& keypoints) {
  std::vector<Eigen::Vector3d> out(keypoints.size());
  Eigen::Vector3d prev = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    out[i] = keypoints[i] - prev;
    prev = keypoints[i];
  }
  return out;
}

struct RetargetConfig {
  double scale = 1.0;
  double smooth = 0.0;
  int max_iters = 100;
  double tol = 1e-10;
  /// Per-keypoint weights; empty means uniform weight 1.
  std::vector<double> keypoint_weights;
  /// Low-pass smoothing applied to keypoint trajectories before solving
  /// (1 disables filtering).
  double keypoint_smoothing = 0.2;

  void validate(std::size_t n) const {
    H2R_REQUIRE(std::isfinite(scale) && scale > 0.0, ErrorKind::InvalidInput, "scale must be positive");
    H2R_REQUIRE(std::isfinite(smooth) && smooth >= 0.0, ErrorKind::InvalidInput, "smooth must be non-negative");
    H2R_REQUIRE(max_iters >= 0 && std::isfinite(tol) && tol > 0.0, ErrorKind::InvalidInput,
                "max_iters must be >= 0 and tol positive");
    H2R_REQUIRE(keypoint_weights.empty() || keypoint_weights.size() == n, ErrorKind::DimensionMismatch,
                "keypoint weights must have one entry per keypoint");
    for (double w : keypoint_weights) {
      H2R_REQUIRE(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidInput, "keypoint weights must be non-negative");
    }
  }

  double weight(std::size_t i) const { return keypoint_weights.empty() ? 1.0 : keypoint_weights[i]; }
};

struct RetargetResult {
  Eigen::VectorXd q;
  double objective = 0.0;
  double initial_objective = 0.0;
  int iterations = 0;
};

namespace detail {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Projected Levenberg-Marquardt on a box. Joints sitting on a bound whose
// gradient points outward are frozen for the step, and no joint moves more
// than max_step radians per iteration so a long Gauss-Newton jump cannot
// land in a far joint-limit corner. Every accepted step lowers the
// objective, so the result never scores worse than the start. Jacobians come
// from central differences with h = 1e-6.
inline RetargetResult solve_box_least_squares(const KinematicChain& chain, const ResidualFn& residual,
                                              const Eigen::VectorXd& start, int max_iters, double tol) {
  constexpr double h = 1e-6;
  constexpr double max_step = 0.3;
  const auto n = static_cast<Eigen::Index>(chain.dof());
  Eigen::VectorXd q = chain.clamp(start);
  Eigen::VectorXd r = residual(q);
  double f = r.squaredNorm();
  H2R_REQUIRE(std::isfinite(f), ErrorKind::NumericalFailure, "retarget objective is not finite");
  RetargetResult res{q, f, f, 0};
  double lambda = 1e-3;

  for (int it = 0; it < max_iters; ++it) {
    res.iterations = it + 1;
    if (f == 0.0) break;
    Eigen::MatrixXd J(r.size(), n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      J.col(k) = (residual(qp) - residual(qm)) / (2.0 * h);
    }
    const Eigen::VectorXd g = J.transpose() * r;
    const Eigen::MatrixXd H = J.transpose() * J;

    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < n; ++k) {
      const bool at_lower = q[k] <= chain.q_lower()[k] && g[k] > 0.0;
      const bool at_upper = q[k] >= chain.q_upper()[k] && g[k] < 0.0;
      if (!at_lower && !at_upper) free.push_back(k);
    }
    if (free.empty()) break;
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd Hf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = g[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) Hf(a, b) = H(free[a], free[b]);
    }

    bool accepted = false;
    double step = 0.0;
    while (lambda < 1e12) {
      Eigen::MatrixXd A = Hf;
      A.diagonal().array() += lambda * (1.0 + Hf.diagonal().array());
      Eigen::VectorXd df = -A.ldlt().solve(gf);
      const double longest = df.lpNorm<Eigen::Infinity>();
      if (longest > max_step) df *= max_step / longest;
      Eigen::VectorXd cand = q;
      for (Eigen::Index a = 0; a < nf; ++a) cand[free[a]] += df[a];
      cand = chain.clamp(cand);
      const Eigen::VectorXd rc = residual(cand);
      const double fc = rc.squaredNorm();
      if (std::isfinite(fc) && fc <= f) {
        step = (cand - q).norm();
        q = cand;
        r = rc;
        f = fc;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || step < tol) break;
  }
  H2R_REQUIRE(std::isfinite(f), ErrorKind::NumericalFailure, "retarget objective is not finite");
  res.q = q;
  res.objective = f;
  return res;
}

inline void check_targets(const KinematicChain& chain, std::span<const Eigen::Vector3d> targets,
                          const Eigen::VectorXd& q_prev, const RetargetConfig& cfg) {
  H2R_REQUIRE(targets.size() == chain.dof(), ErrorKind::DimensionMismatch, "need one target per keypoint");
  H2R_REQUIRE(static_cast<std::size_t>(q_prev.size()) == chain.dof(), ErrorKind::DimensionMismatch,
              "q_prev length differs from chain dof");
  for (const auto& t : targets) H2R_REQUIRE(t.allFinite(), ErrorKind::InvalidInput, "targets must be finite");
  H2R_REQUIRE(q_prev.allFinite(), ErrorKind::InvalidInput, "q_prev must be finite");
  cfg.validate(chain.dof());
}

}  // namespace detail

/// Residual stack for position retargeting; its squared norm is the objective.
inline Eigen::VectorXd position_residual(const KinematicChain& chain, std::span<const Eigen::Vector3d> targets,
                                         const Eigen::VectorXd& q_prev, const RetargetConfig& cfg,
                                         const Eigen::VectorXd& q) {
  const auto n = chain.dof();
  Eigen::VectorXd r(static_cast<Eigen::Index>(3 * n + n));
  const auto kp = detail::chain_keypoints(chain, q);
  for (std::size_t i = 0; i < n; ++i) {
    r.segment<3>(static_cast<Eigen::Index>(3 * i)) = std::sqrt(cfg.weight(i)) * (cfg.scale * targets[i] - kp[i]);
  }
  r.tail(static_cast<Eigen::Index>(n)) = std::sqrt(cfg.smooth) * (q - q_prev);
  return r;
}

inline Eigen::VectorXd vector_residual(const KinematicChain& chain, std::span<const Eigen::Vector3d> targets,
                                       const Eigen::VectorXd& q_prev, const RetargetConfig& cfg,
                                       const Eigen::Quaterniond& frame_rotation, const Eigen::VectorXd& q) {
  const auto n = chain.dof();
  Eigen::VectorXd r(static_cast<Eigen::Index>(3 * n + n));
  const auto vecs = link_vectors(detail::chain_keypoints(chain, q));
  for (std::size_t i = 0; i < n; ++i) {
    r.segment<3>(static_cast<Eigen::Index>(3 * i)) =
        std::sqrt(cfg.weight(i)) * (cfg.scale * targets[i] - frame_rotation * vecs[i]);
  }
  r.tail(static_cast<Eigen::Index>(n)) = std::sqrt(cfg.smooth) * (q - q_prev);
  return r;
}

/// Joint angles whose keypoints track scale * targets, warm-started at q_prev.
inline RetargetResult retarget_position(const KinematicChain& chain, std::span<const Eigen::Vector3d> targets,
                                        const Eigen::VectorXd& q_prev, const RetargetConfig& cfg) {
  detail::check_targets(chain, targets, q_prev, cfg);
  return detail::solve_box_least_squares(
      chain, [&](const Eigen::VectorXd& q) { return position_residual(chain, targets, q_prev, cfg, q); }, q_prev,
      cfg.max_iters, cfg.tol);
}

/// Joint angles whose rotated link directions track scale * target_vectors.
inline RetargetResult retarget_vector(const KinematicChain& chain, std::span<const Eigen::Vector3d> target_vectors,
                                      const Eigen::VectorXd& q_prev, const RetargetConfig& cfg,
                                      const Eigen::Quaterniond& frame_rotation = Eigen::Quaterniond::Identity()) {
  detail::check_targets(chain, target_vectors, q_prev, cfg);
  const Eigen::Quaterniond rot = normalized_quat(frame_rotation);
  return detail::solve_box_least_squares(
      chain,
      [&](const Eigen::VectorXd& q) { return vector_residual(chain, target_vectors, q_prev, cfg, rot, q); },
      q_prev, cfg.max_iters, cfg.tol);
}

enum class RetargetMode { Position, Vector };

struct RetargetTrajectoryOptions {
  RetargetMode mode = RetargetMode::Position;
  double dt = 1.0 / 30.0;
  std::string demo_id = "retargeted";
  Eigen::Quaterniond frame_rotation = Eigen::Quaterniond::Identity();
  /// Optional wrist pose per frame; copied into translation/orientation.
  std::vector<ActionFrame> base;
};

/// Solves every frame in order, warm-starting each from the previous
/// solution (frame 0 starts at mid-range). Keypoints are low-pass filtered
/// first with cfg.keypoint_smoothing.
inline Trajectory retarget_trajectory(const KinematicChain& chain,
                                      const std::vector<std::vector<Eigen::Vector3d>>& keypoint_traj,
                                      const RetargetConfig& cfg, const RetargetTrajectoryOptions& opts = {}) {
  const std::size_t T = keypoint_traj.size();
  const std::size_t n = chain.dof();
  H2R_REQUIRE(T >= 1, ErrorKind::InvalidInput, "keypoint trajectory is empty");
  H2R_REQUIRE(opts.base.empty() || opts.base.size() == T, ErrorKind::DimensionMismatch,
              "base poses must have one entry per frame");
  Eigen::MatrixXd flat(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(3 * n));
  for (std::size_t t = 0; t < T; ++t) {
    H2R_REQUIRE(keypoint_traj[t].size() == n, ErrorKind::DimensionMismatch, "need one keypoint per link");
    for (std::size_t i = 0; i < n; ++i) {
      flat.block<1, 3>(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(3 * i)) = keypoint_traj[t][i].transpose();
    }
  }
  const Eigen::MatrixXd filtered = low_pass(flat, cfg.keypoint_smoothing);

  std::vector<ActionFrame> frames;
  frames.reserve(T);
  Eigen::VectorXd q_prev = chain.mid_range();
  std::vector<Eigen::Vector3d> targets(n);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      targets[i] = filtered.block<1, 3>(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(3 * i)).transpose();
    }
    const RetargetResult res = opts.mode == RetargetMode::Position
                                   ? retarget_position(chain, targets, q_prev, cfg)
                                   : retarget_vector(chain, targets, q_prev, cfg, opts.frame_rotation);
    if (opts.base.empty()) {
      frames.emplace_back(Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity(), res.q);
    } else {
      frames.emplace_back(opts.base[t].translation, opts.base[t].orientation, res.q);
    }
    q_prev = res.q;
  }
  return Trajectory(std::move(frames), opts.dt, Source::Human, opts.demo_id);
}

}  // namespace h2r

#endif  // H2R_RETARGET_HPP
