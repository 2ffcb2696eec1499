#ifndef H2R_GEOMETRY_HPP
#define H2R_GEOMETRY_HPP

// Rigid transforms, rotation distance, point-set calibration and
// perspective-n-point pose refinement.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "h2r/error.hpp"
#include "h2r/quaternion.hpp"

namespace h2r {

/// Geodesic angle between two rotations in [0, pi]; sign-flip invariant.
/// Evaluated as 2*atan2(|vec(q1^-1 q2)|, |w|), the numerically stable form
/// of 2*acos(|<q1, q2>|).
inline double rot_distance(const Eigen::Quaterniond& q1, const Eigen::Quaterniond& q2) {
  H2R_REQUIRE(all_finite(q1) && all_finite(q2), ErrorKind::InvalidInput,
              "rot_distance needs finite quaternions");
  const Eigen::Quaterniond rel = q1.conjugate() * q2;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// x -> R x + t.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Eigen::Quaterniond& rotation, Eigen::Vector3d translation)
      : rotation_(normalized_quat(rotation)), translation_(std::move(translation)) {
    H2R_REQUIRE(translation_.allFinite(), ErrorKind::InvalidInput, "translation must be finite");
  }

  static RigidTransform identity() { return {}; }

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation_ * x + translation_; }

  RigidTransform inverse() const {
    const Eigen::Quaterniond inv = rotation_.conjugate();
    return RigidTransform(inv, -(inv * translation_));
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

 private:
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// apply(compose(a, b), x) == apply(a, apply(b, x)).
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Eigen::Quaterniond q = a.rotation() * b.rotation();
  q.normalize();
  return RigidTransform(q, a.rotation() * b.translation() + a.translation());
}

struct PinholeCamera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  PinholeCamera() = default;
  PinholeCamera(double fx_, double fy_, double cx_, double cy_) : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
    H2R_REQUIRE(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0, ErrorKind::InvalidInput,
                "focal lengths must be positive");
    H2R_REQUIRE(std::isfinite(cx) && std::isfinite(cy), ErrorKind::InvalidInput,
                "principal point must be finite");
  }

  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

// ---------------------------------------------------------------------------
// Calibration

struct RigidFit {
  RigidTransform transform;
  double rmse = 0.0;
  int iterations = 0;
};

namespace detail {

inline double rigid_cost(const RigidTransform& T, std::span<const Eigen::Vector3d> cam,
                         std::span<const Eigen::Vector3d> rob) {
  double c = 0.0;
  for (std::size_t i = 0; i < cam.size(); ++i) c += (rob[i] - T.apply(cam[i])).squaredNorm();
  return c;
}

// Levenberg-damped Gauss-Newton over a left-multiplicative rotation
// increment and a translation increment; the quaternion is renormalized
// after every accepted step.
inline RigidFit refine_rigid(RigidTransform T, std::span<const Eigen::Vector3d> cam,
                             std::span<const Eigen::Vector3d> rob, int max_iters) {
  double cost = rigid_cost(T, cam, rob);
  double lambda = 1e-3;
  int it = 0;
  for (; it < max_iters; ++it) {
    Eigen::Matrix<double, 6, 6> JtJ = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> Jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t i = 0; i < cam.size(); ++i) {
      const Eigen::Vector3d rp = T.rotation() * cam[i];
      const Eigen::Vector3d r = rp + T.translation() - rob[i];
      Eigen::Matrix<double, 3, 6> J;
      J.leftCols<3>() = -skew(rp);
      J.rightCols<3>() = Eigen::Matrix3d::Identity();
      JtJ += J.transpose() * J;
      Jtr += J.transpose() * r;
    }
    if (Jtr.norm() < 1e-15 * (1.0 + cost)) break;

    bool accepted = false;
    double step_norm = 0.0;
    while (lambda < 1e12) {
      Eigen::Matrix<double, 6, 6> A = JtJ;
      A.diagonal().array() += lambda;
      const Eigen::Matrix<double, 6, 1> delta = -A.ldlt().solve(Jtr);
      step_norm = delta.norm();
      Eigen::Quaterniond q = quat_exp(delta.head<3>()) * T.rotation();
      q.normalize();
      const RigidTransform cand(q, T.translation() + delta.tail<3>());
      const double c = rigid_cost(cand, cam, rob);
      if (c <= cost) {
        T = cand;
        cost = c;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || step_norm < 1e-14) break;
  }
  return {T, std::sqrt(cost / static_cast<double>(cam.size())), it};
}

}  // namespace detail

/// Least-squares rigid transform mapping camera-frame points onto robot-frame
/// points, solved by damped Gauss-Newton over (unit quaternion, translation).
/// The solver is started from the identity and from the three half-turns
/// about the coordinate axes; the lowest-residual result is kept.
inline RigidFit fit_rigid(std::span<const Eigen::Vector3d> cam_points,
                          std::span<const Eigen::Vector3d> rob_points, int max_iters = 200) {
  H2R_REQUIRE(cam_points.size() == rob_points.size(), ErrorKind::DimensionMismatch,
              "point lists must have equal length");
  const std::size_t n = cam_points.size();
  H2R_REQUIRE(n >= 3, ErrorKind::InsufficientData, "fit_rigid needs at least 3 correspondences");

  Eigen::Vector3d cam_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d rob_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    H2R_REQUIRE(cam_points[i].allFinite() && rob_points[i].allFinite(), ErrorKind::InvalidInput,
                "points must be finite");
    cam_mean += cam_points[i];
    rob_mean += rob_points[i];
  }
  cam_mean /= static_cast<double>(n);
  rob_mean /= static_cast<double>(n);

  Eigen::MatrixXd centered(3, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) centered.col(static_cast<Eigen::Index>(i)) = cam_points[i] - cam_mean;
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::MatrixXd>(centered).singularValues();
  H2R_REQUIRE(sv[0] > 1e-12 && sv[1] > 1e-9 * sv[0], ErrorKind::Degenerate,
              "camera points are collinear or coincident");

  const std::array<Eigen::Quaterniond, 4> starts = {
      Eigen::Quaterniond::Identity(), Eigen::Quaterniond(0.0, 1.0, 0.0, 0.0),
      Eigen::Quaterniond(0.0, 0.0, 1.0, 0.0), Eigen::Quaterniond(0.0, 0.0, 0.0, 1.0)};
  RigidFit best;
  best.rmse = std::numeric_limits<double>::infinity();
  for (const auto& q0 : starts) {
    const RigidTransform init(q0, rob_mean - q0 * cam_mean);
    RigidFit fit = detail::refine_rigid(init, cam_points, rob_points, max_iters);
    if (fit.rmse < best.rmse) best = fit;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Perspective-n-point

struct PnpResult {
  RigidTransform pose;
  double rmse = 0.0;
  int iterations = 0;
};

/// Raised when the refinement runs out of iterations; carries the best pose.
class PnpNoConvergence : public Error {
 public:
  explicit PnpNoConvergence(PnpResult best)
      : Error(ErrorKind::NoConvergence, "pnp did not converge within the iteration budget"),
        best_(std::move(best)) {}
  const PnpResult& best() const { return best_; }

 private:
  PnpResult best_;
};

/// Root-mean-square pixel reprojection error, or +inf if any point lies on
/// or behind the image plane.
inline double reprojection_rmse(const RigidTransform& pose, std::span<const Eigen::Vector3d> object_points,
                                std::span<const Eigen::Vector2d> image_points, const PinholeCamera& camera) {
  double sum = 0.0;
  for (std::size_t i = 0; i < object_points.size(); ++i) {
    const Eigen::Vector3d p = pose.apply(object_points[i]);
    if (!(p.z() > 0.0)) return std::numeric_limits<double>::infinity();
    sum += (camera.project(p) - image_points[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(object_points.size()));
}

/// Refines a camera-from-object pose by Gauss-Newton on pixel reprojection
/// error. Steps are halved until the error does not increase and every point
/// stays in front of the camera, so the result never scores worse than
/// `initial`.
inline PnpResult solve_pnp(std::span<const Eigen::Vector3d> object_points,
                           std::span<const Eigen::Vector2d> image_points, const PinholeCamera& camera,
                           const RigidTransform& initial, int max_iters = 100, double step_tol = 1e-10) {
  H2R_REQUIRE(object_points.size() == image_points.size(), ErrorKind::DimensionMismatch,
              "object and image point counts differ");
  H2R_REQUIRE(object_points.size() >= 4, ErrorKind::InsufficientData, "pnp needs at least 4 points");
  for (std::size_t i = 0; i < object_points.size(); ++i) {
    H2R_REQUIRE(object_points[i].allFinite() && image_points[i].allFinite(), ErrorKind::InvalidInput,
                "points must be finite");
  }

  RigidTransform pose = initial;
  double err = reprojection_rmse(pose, object_points, image_points, camera);
  if (!std::isfinite(err)) throw Error(ErrorKind::BehindCamera, "a point lies behind the camera at the initial pose");

  for (int it = 0; it < max_iters; ++it) {
    Eigen::Matrix<double, 6, 6> JtJ = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> Jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t i = 0; i < object_points.size(); ++i) {
      const Eigen::Vector3d rp = pose.rotation() * object_points[i];
      const Eigen::Vector3d p = rp + pose.translation();
      const double iz = 1.0 / p.z();
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << camera.fx * iz, 0.0, -camera.fx * p.x() * iz * iz, 0.0, camera.fy * iz,
          -camera.fy * p.y() * iz * iz;
      Eigen::Matrix<double, 3, 6> dp;
      dp.leftCols<3>() = -skew(rp);
      dp.rightCols<3>() = Eigen::Matrix3d::Identity();
      const Eigen::Matrix<double, 2, 6> J = dproj * dp;
      const Eigen::Vector2d r = camera.project(p) - image_points[i];
      JtJ += J.transpose() * J;
      Jtr += J.transpose() * r;
    }
    Eigen::Matrix<double, 6, 6> A = JtJ;
    A.diagonal().array() += 1e-12 * (1.0 + JtJ.diagonal().maxCoeff());
    Eigen::Matrix<double, 6, 1> delta = -A.ldlt().solve(Jtr);
    if (!delta.allFinite()) throw Error(ErrorKind::NumericalFailure, "pnp normal equations are singular");
    if (delta.norm() < step_tol) return {pose, err, it};

    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      Eigen::Quaterniond q = quat_exp(delta.head<3>()) * pose.rotation();
      q.normalize();
      const RigidTransform cand(q, pose.translation() + delta.tail<3>());
      const double e = reprojection_rmse(cand, object_points, image_points, camera);
      if (e <= err) {
        pose = cand;
        err = e;
        accepted = true;
        break;
      }
      delta *= 0.5;
    }
    // No descent direction left at working precision.
    if (!accepted || delta.norm() < step_tol) return {pose, err, it + 1};
  }
  throw PnpNoConvergence(PnpResult{pose, err, max_iters});
}

}  // namespace h2r

#endif  // H2R_GEOMETRY_HPP
