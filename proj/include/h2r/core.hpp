#ifndef H2R_CORE_HPP
#define H2R_CORE_HPP

// Trajectory data model and the time-base utilities shared by every other
// module: duration-ratio sample rates, uniform subsampling, interpolating
// upsampling, first-order low-pass filtering and temporal ensembling.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "h2r/error.hpp"
#include "h2r/quaternion.hpp"

namespace h2r {

/// One timestep of end-effector state.
struct ActionFrame {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::VectorXd joints;

  ActionFrame() = default;

  ActionFrame(Eigen::Vector3d t, const Eigen::Quaterniond& q, Eigen::VectorXd j = {})
      : translation(std::move(t)), orientation(normalized_quat(q)), joints(std::move(j)) {
    H2R_REQUIRE(translation.allFinite() && joints.allFinite(), ErrorKind::InvalidInput,
                "action frame has non-finite components");
  }

  std::size_t joint_dim() const { return static_cast<std::size_t>(joints.size()); }

  /// Flat layout [tx, ty, tz, qw, qx, qy, qz, joints...].
  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd v(7 + joints.size());
    v << translation, orientation.w(), orientation.x(), orientation.y(), orientation.z(), joints;
    return v;
  }

  static std::size_t vector_dim(std::size_t joint_dim) { return 7 + joint_dim; }
};

enum class Source { Human, Robot };

inline std::string to_string(Source s) { return s == Source::Human ? "human" : "robot"; }

inline Source source_from_string(const std::string& s) {
  if (s == "human") return Source::Human;
  if (s == "robot") return Source::Robot;
  throw Error(ErrorKind::InvalidInput, "unknown trajectory source '" + s + "'");
}

/// Uniformly sampled sequence of action frames.
class Trajectory {
 public:
  Trajectory(std::vector<ActionFrame> frames, double dt, Source source, std::string demo_id)
      : frames_(std::move(frames)), dt_(dt), source_(source), demo_id_(std::move(demo_id)) {
    H2R_REQUIRE(!frames_.empty(), ErrorKind::InvalidInput, "trajectory needs at least one frame");
    H2R_REQUIRE(std::isfinite(dt_) && dt_ > 0.0, ErrorKind::InvalidInput,
                "trajectory dt must be positive and finite");
    const std::size_t j = frames_.front().joint_dim();
    for (const auto& f : frames_) {
      H2R_REQUIRE(f.joint_dim() == j, ErrorKind::DimensionMismatch,
                  "all frames of a trajectory must share the joint dimension");
    }
  }

  const std::vector<ActionFrame>& frames() const { return frames_; }
  const ActionFrame& operator[](std::size_t i) const { return frames_[i]; }
  std::size_t size() const { return frames_.size(); }
  std::size_t joint_dim() const { return frames_.front().joint_dim(); }
  double dt() const { return dt_; }
  double duration() const { return dt_ * static_cast<double>(frames_.size() - 1); }
  Source source() const { return source_; }
  const std::string& demo_id() const { return demo_id_; }

 private:
  std::vector<ActionFrame> frames_;
  double dt_;
  Source source_;
  std::string demo_id_;
};

/// Per-frame visual feature vectors, one row per timestep.
class FeatureSequence {
 public:
  FeatureSequence(Eigen::MatrixXd rows, std::string demo_id)
      : rows_(std::move(rows)), demo_id_(std::move(demo_id)) {
    H2R_REQUIRE(rows_.rows() >= 1 && rows_.cols() >= 1, ErrorKind::InvalidInput,
                "feature sequence needs at least one row and one column");
    H2R_REQUIRE(rows_.allFinite(), ErrorKind::InvalidInput, "feature sequence has non-finite values");
  }

  const Eigen::MatrixXd& rows() const { return rows_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  const std::string& demo_id() const { return demo_id_; }

 private:
  Eigen::MatrixXd rows_;
  std::string demo_id_;
};

struct SampleRate {
  double gamma = 1.0;
  int k = 32;
};

inline const std::string& demo_id(const Trajectory& t) { return t.demo_id(); }
inline const std::string& demo_id(const FeatureSequence& f) { return f.demo_id(); }
inline std::size_t sequence_length(const Trajectory& t) { return t.size(); }
inline std::size_t sequence_length(const FeatureSequence& f) { return f.size(); }

/// Ratio of mean robot to mean human demonstration duration.
inline double compute_gamma(std::span<const double> human_durations,
                            std::span<const double> robot_durations) {
  H2R_REQUIRE(!human_durations.empty() && !robot_durations.empty(), ErrorKind::InvalidInput,
              "duration lists must be non-empty");
  auto mean_of = [](std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) {
      H2R_REQUIRE(std::isfinite(x) && x > 0.0, ErrorKind::InvalidInput,
                  "durations must be positive and finite");
      sum += x;
    }
    return sum / static_cast<double>(xs.size());
  };
  const double human = mean_of(human_durations);
  const double robot = mean_of(robot_durations);
  return robot / human;
}

/// Picks k frames at indices round(i * gamma); dt is scaled by gamma.
inline Trajectory subsample(const Trajectory& traj, double gamma, int k) {
  H2R_REQUIRE(std::isfinite(gamma) && gamma > 0.0, ErrorKind::InvalidInput, "gamma must be positive");
  H2R_REQUIRE(k >= 1, ErrorKind::InvalidInput, "k must be positive");
  const double last = std::round(gamma * static_cast<double>(k - 1));
  H2R_REQUIRE(last < static_cast<double>(traj.size()), ErrorKind::OutOfRange,
              "subsample window exceeds trajectory length");
  std::vector<ActionFrame> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    out.push_back(traj[static_cast<std::size_t>(std::round(static_cast<double>(i) * gamma))]);
  }
  return Trajectory(std::move(out), traj.dt() * gamma, traj.source(), traj.demo_id());
}

/// Linear blend of translation and joints, slerp of orientation.
inline ActionFrame interpolate(const ActionFrame& a, const ActionFrame& b, double u) {
  H2R_REQUIRE(a.joint_dim() == b.joint_dim(), ErrorKind::DimensionMismatch,
              "cannot interpolate frames with different joint dimensions");
  if (u == 0.0) return a;
  if (u == 1.0) return b;
  return ActionFrame((1.0 - u) * a.translation + u * b.translation, slerp(a.orientation, b.orientation, u),
                     (1.0 - u) * a.joints + u * b.joints);
}

/// Resamples a k-step chunk onto a grid `gamma` times denser. Output frame m
/// sits at input position m / gamma, clamped to the last input frame, so
/// input frames land exactly on output frames whenever m / gamma is integral.
inline std::vector<ActionFrame> upsample(std::span<const ActionFrame> actions, double gamma) {
  H2R_REQUIRE(actions.size() >= 2, ErrorKind::InvalidInput, "upsample needs at least two frames");
  H2R_REQUIRE(std::isfinite(gamma) && gamma >= 1.0, ErrorKind::InvalidInput, "upsample needs gamma >= 1");
  const std::size_t k = actions.size();
  const auto n = static_cast<std::size_t>(std::round(gamma * static_cast<double>(k)));
  const double last = static_cast<double>(k - 1);
  std::vector<ActionFrame> out;
  out.reserve(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double pos = std::min(static_cast<double>(m) / gamma, last);
    if (pos >= last) {
      out.push_back(actions[k - 1]);
      continue;
    }
    const auto i = static_cast<std::size_t>(std::floor(pos));
    out.push_back(interpolate(actions[i], actions[i + 1], pos - static_cast<double>(i)));
  }
  return out;
}

/// First-order recursive smoother over rows: y0 = x0,
/// y_t = y_{t-1} + smoothing * (x_t - y_{t-1}).
inline Eigen::MatrixXd low_pass(const Eigen::MatrixXd& seq, double smoothing) {
  H2R_REQUIRE(std::isfinite(smoothing) && smoothing > 0.0 && smoothing <= 1.0, ErrorKind::InvalidInput,
              "smoothing must lie in (0, 1]");
  H2R_REQUIRE(seq.rows() >= 1, ErrorKind::InvalidInput, "low_pass needs at least one row");
  if (smoothing == 1.0) return seq;
  Eigen::MatrixXd out(seq.rows(), seq.cols());
  out.row(0) = seq.row(0);
  for (Eigen::Index t = 1; t < seq.rows(); ++t) {
    out.row(t) = out.row(t - 1) + smoothing * (seq.row(t) - out.row(t - 1));
  }
  return out;
}

/// A predicted action chunk; actions[i] is the value for step start_step + i.
struct Prediction {
  long start_step = 0;
  std::vector<ActionFrame> actions;
};

/// Averages every prediction that covers `query_step`, weighting each by
/// exp(-decay * age) with age = query_step - start_step.
inline ActionFrame temporal_ensemble(std::span<const Prediction> predictions, long query_step,
                                     double decay = 0.1) {
  H2R_REQUIRE(std::isfinite(decay) && decay > 0.0, ErrorKind::InvalidInput, "decay must be positive");
  std::vector<const ActionFrame*> covering;
  std::vector<double> weights;
  for (const auto& p : predictions) {
    const long age = query_step - p.start_step;
    if (age < 0 || age >= static_cast<long>(p.actions.size())) continue;
    covering.push_back(&p.actions[static_cast<std::size_t>(age)]);
    weights.push_back(std::exp(-decay * static_cast<double>(age)));
  }
  if (covering.empty()) {
    throw Error(ErrorKind::NotCovered, "no prediction covers step " + std::to_string(query_step));
  }
  if (covering.size() == 1) return *covering.front();

  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const std::size_t j = covering.front()->joint_dim();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::VectorXd joints = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(j));
  std::vector<Eigen::Quaterniond> quats;
  for (std::size_t i = 0; i < covering.size(); ++i) {
    H2R_REQUIRE(covering[i]->joint_dim() == j, ErrorKind::DimensionMismatch,
                "ensembled predictions disagree on joint dimension");
    const double w = weights[i] / total;
    t += w * covering[i]->translation;
    joints += w * covering[i]->joints;
    quats.push_back(covering[i]->orientation);
  }
  return ActionFrame(t, chordal_mean(quats, weights), joints);
}

}  // namespace h2r

#endif  // H2R_CORE_HPP
