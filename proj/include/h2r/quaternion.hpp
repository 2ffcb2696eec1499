#ifndef H2R_QUATERNION_HPP
#define H2R_QUATERNION_HPP

// Quaternion helpers shared by the trajectory and geometry code.
// Convention: [w, x, y, z], right-handed, active rotations.

#include <Eigen/Geometry>

#include <cmath>
#include <span>

#include "h2r/error.hpp"

namespace h2r {

inline bool all_finite(const Eigen::Quaterniond& q) { return q.coeffs().allFinite(); }

/// Returns q scaled to unit norm. Quaternions already within 1e-12 of unit
/// norm are returned untouched so repeated ingestion is bit-stable.
inline Eigen::Quaterniond normalized_quat(const Eigen::Quaterniond& q) {
  H2R_REQUIRE(all_finite(q), ErrorKind::InvalidInput, "quaternion has non-finite components");
  const double n2 = q.squaredNorm();
  H2R_REQUIRE(n2 > 1e-300, ErrorKind::InvalidInput, "quaternion has zero norm");
  if (std::abs(n2 - 1.0) <= 1e-12) return q;
  const double n = std::sqrt(n2);
  return Eigen::Quaterniond(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
}

/// Spherical linear interpolation along the shorter arc.
inline Eigen::Quaterniond slerp(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b, double u) {
  if (u == 0.0) return a;
  if (u == 1.0) return b;
  Eigen::Vector4d va = a.coeffs();
  Eigen::Vector4d vb = b.coeffs();
  double dot = va.dot(vb);
  if (dot < 0.0) {
    vb = -vb;
    dot = -dot;
  }
  Eigen::Vector4d out;
  if (dot > 1.0 - 1e-12) {
    out = (1.0 - u) * va + u * vb;
  } else {
    const double theta = std::acos(std::min(dot, 1.0));
    const double s = std::sin(theta);
    out = (std::sin((1.0 - u) * theta) / s) * va + (std::sin(u * theta) / s) * vb;
  }
  out.normalize();
  // coeffs() storage order is (x, y, z, w).
  return Eigen::Quaterniond(out[3], out[0], out[1], out[2]);
}

/// Weighted chordal mean. Each quaternion is flipped into the hemisphere of
/// the first one before averaging; weights need not be normalized.
inline Eigen::Quaterniond chordal_mean(std::span<const Eigen::Quaterniond> qs,
                                       std::span<const double> weights) {
  H2R_REQUIRE(!qs.empty() && qs.size() == weights.size(), ErrorKind::InvalidInput,
              "chordal_mean needs one weight per quaternion");
  const Eigen::Vector4d ref = qs.front().coeffs();
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    Eigen::Vector4d v = qs[i].coeffs();
    if (v.dot(ref) < 0.0) v = -v;
    acc += weights[i] * v;
  }
  const double n = acc.norm();
  H2R_REQUIRE(n > 1e-300, ErrorKind::NumericalFailure, "quaternion mean collapsed to zero");
  acc /= n;
  return Eigen::Quaterniond(acc[3], acc[0], acc[1], acc[2]);
}

/// Rotation by `angle` radians about `axis` (normalized internally).
inline Eigen::Quaterniond axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized()));
}

/// Exponential map from a rotation vector to a unit quaternion.
inline Eigen::Quaterniond quat_exp(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    q.normalize();
    return q;
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotvec / angle));
}

}  // namespace h2r

#endif  // H2R_QUATERNION_HPP
