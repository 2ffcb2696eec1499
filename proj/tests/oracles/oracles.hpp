#ifndef H2R_TESTS_ORACLES_HPP
#define H2R_TESTS_ORACLES_HPP

// Reference implementations used only by tests. Each is written directly
// from its definition, without the library's code paths.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// DTW by exhaustive enumeration of monotone paths.

struct PathBest {
  double cost = std::numeric_limits<double>::infinity();
  std::size_t length = 0;
};

namespace detail {
inline void walk(const Eigen::MatrixXd& c, Eigen::Index i, Eigen::Index j, Eigen::Index i_end, Eigen::Index j_end,
                 double acc, std::size_t len, PathBest& best) {
  acc += c(i, j);
  ++len;
  if (i == i_end && j == j_end) {
    if (acc < best.cost) best = {acc, len};
    return;
  }
  if (i < i_end && j < j_end) walk(c, i + 1, j + 1, i_end, j_end, acc, len, best);
  if (i < i_end) walk(c, i + 1, j, i_end, j_end, acc, len, best);
  if (j < j_end) walk(c, i, j + 1, i_end, j_end, acc, len, best);
}
}  // namespace detail

/// Minimum over every path from (0, j0) to (rows-1, j1) with unit steps.
inline PathBest brute_dtw(const Eigen::MatrixXd& c, Eigen::Index j0, Eigen::Index j1) {
  PathBest best;
  detail::walk(c, 0, j0, c.rows() - 1, j1, 0.0, 0, best);
  return best;
}

inline PathBest brute_dtw(const Eigen::MatrixXd& c) { return brute_dtw(c, 0, c.cols() - 1); }

inline std::size_t count_paths(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == 0 || j == 0) {
        d[i][j] = 1;
      } else {
        d[i][j] = d[i - 1][j] + d[i][j - 1] + d[i - 1][j - 1];
      }
    }
  }
  return d[n - 1][m - 1];
}

// ---------------------------------------------------------------------------
// Subsequence match by enumerating every robot span [a, b] and solving the
// full alignment of the query against it.

struct SpanBest {
  double raw = std::numeric_limits<double>::infinity();
  std::size_t length = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

inline SpanBest span_sdtw(const Eigen::MatrixXd& c) {
  SpanBest best;
  for (Eigen::Index b = 0; b < c.cols(); ++b) {
    for (Eigen::Index a = 0; a <= b; ++a) {
      const PathBest p = brute_dtw(c, a, b);
      if (p.cost < best.raw) best = {p.cost, p.length, static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Rigid fit in closed form (Kabsch / Umeyama without scale).

struct Kabsch {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
};

inline Kabsch kabsch(const std::vector<Eigen::Vector3d>& src, const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d ms = Eigen::Vector3d::Zero(), md = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    ms += src[i];
    md += dst[i];
  }
  ms /= static_cast<double>(src.size());
  md /= static_cast<double>(dst.size());
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) H += (src[i] - ms) * (dst[i] - md).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) D(2, 2) = -1.0;
  const Eigen::Matrix3d R = svd.matrixV() * D * svd.matrixU().transpose();
  return {R, md - R * ms};
}

// ---------------------------------------------------------------------------
// Rotations and homogeneous matrices.

/// Rodrigues' formula for a unit axis.
inline Eigen::Matrix3d rodrigues(Eigen::Vector3d axis, double angle) {
  axis.normalize();
  Eigen::Matrix3d K;
  K << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
}

/// Rotation matrix of a unit quaternion given as (w, x, y, z).
inline Eigen::Matrix3d quat_matrix(double w, double x, double y, double z) {
  Eigen::Matrix3d R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),    //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

inline Eigen::Matrix4d homogeneous(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  M.block<3, 3>(0, 0) = R;
  M.block<3, 1>(0, 3) = t;
  return M;
}

/// Serial chain as a product of 4x4 matrices: rotate about axis_i, then
/// translate length_i along local x. Returns the origin of each link frame
/// after its translation.
inline std::vector<Eigen::Vector3d> chain_points(const std::vector<Eigen::Vector3d>& axes,
                                                 const std::vector<double>& lengths, const Eigen::VectorXd& q) {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  std::vector<Eigen::Vector3d> out;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    M = M * homogeneous(rodrigues(axes[i], q[static_cast<Eigen::Index>(i)]), Eigen::Vector3d::Zero());
    M = M * homogeneous(Eigen::Matrix3d::Identity(), Eigen::Vector3d(lengths[i], 0, 0));
    out.push_back(M.block<3, 1>(0, 3));
  }
  return out;
}

/// Both elbow branches of the planar two-link inverse kinematics problem
/// (links along x, joints about z) for end point (x, y).
inline std::vector<Eigen::Vector2d> two_link_ik(double l1, double l2, double x, double y) {
  const double c2 = (x * x + y * y - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  std::vector<Eigen::Vector2d> out;
  if (c2 < -1.0 || c2 > 1.0) return out;
  for (double sign : {1.0, -1.0}) {
    const double q2 = sign * std::acos(c2);
    const double q1 = std::atan2(y, x) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
    out.emplace_back(std::remainder(q1, 2.0 * M_PI), q2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral arc length straight from the definition with a direct DFT sum.

inline double direct_sparc(const std::vector<double>& s, double dt, int pad = 4, double wmax = 15.0,
                           double thresh = 0.05) {
  std::size_t p = 1;
  while (p < s.size()) p <<= 1;
  const std::size_t n = static_cast<std::size_t>(pad) * p;
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t m = 0; m < mag.size(); ++m) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(m) * static_cast<double>(t) / static_cast<double>(n);
      re += s[t] * std::cos(ang);
      im += s[t] * std::sin(ang);
    }
    mag[m] = std::hypot(re, im);
  }
  const double dc = mag[0];
  for (double& v : mag) v /= dc;
  const double df = 1.0 / (static_cast<double>(n) * dt);
  std::size_t cut = 1;
  for (std::size_t m = 1; m < mag.size(); ++m) {
    if (static_cast<double>(m) * df <= wmax && mag[m] >= thresh) cut = m;
  }
  const double wc = static_cast<double>(cut) * df;
  double arc = 0.0;
  for (std::size_t m = 1; m <= cut; ++m) {
    arc += std::hypot(df / wc, mag[m] - mag[m - 1]);
  }
  return -arc;
}

}  // namespace oracle

#endif  // H2R_TESTS_ORACLES_HPP
