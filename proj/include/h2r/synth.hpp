#ifndef H2R_SYNTH_HPP
#define H2R_SYNTH_HPP

// Seeded synthetic data with known ground truth: minimum-jerk reaches,
// long sequences with planted copies of a query motion, rigid point scenes,
// clustered feature streams, mock visual features and demonstration sets.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "h2r/core.hpp"
#include "h2r/error.hpp"
#include "h2r/geometry.hpp"
#include "h2r/mixup.hpp"
#include "h2r/retrieval.hpp"

namespace h2r::synth {

using Rng = std::mt19937_64;

/// 10u^3 - 15u^4 + 6u^5.
inline double min_jerk_shape(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

struct MinJerk {
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d end = Eigen::Vector3d::UnitX();
  std::size_t frames = 100;
  double dt = 0.01;
};

/// Point-to-point reach; joints are empty and orientation is the identity.
inline Trajectory min_jerk(const MinJerk& spec, const std::string& demo_id = "minjerk") {
  H2R_REQUIRE(spec.frames >= 1, ErrorKind::InvalidInput, "min-jerk needs at least one frame");
  H2R_REQUIRE(spec.start.allFinite() && spec.end.allFinite(), ErrorKind::InvalidInput, "endpoints must be finite");
  std::vector<ActionFrame> frames;
  frames.reserve(spec.frames);
  for (std::size_t i = 0; i < spec.frames; ++i) {
    const double u = spec.frames == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(spec.frames - 1);
    const double s = min_jerk_shape(u);
    frames.emplace_back(spec.start + s * (spec.end - spec.start), Eigen::Quaterniond::Identity());
  }
  return Trajectory(std::move(frames), spec.dt, Source::Robot, demo_id);
}

// ---------------------------------------------------------------------------
// Planted segments

struct PlantedCopy {
  std::size_t offset = 0;
  double noise_sigma = 0.0;
};

struct PlantedSegments {
  std::size_t base_len = 600;
  std::size_t query_len = 40;
  std::vector<PlantedCopy> segments;
};

struct PlantedData {
  Trajectory human;
  Trajectory robot;
  std::vector<Interval> truth;
};

/// A robot-like reach with a lateral arc, a wrist twist and a closing
/// gripper joint, randomized by `rng`. Lives near the origin.
inline Trajectory task_motion(std::size_t len, Rng& rng, const std::string& demo_id, Source source, double dt = 1.0 / 30.0) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Eigen::Vector3d start(0.1 * uni(rng), 0.1 * uni(rng), 0.05 + 0.02 * uni(rng));
  const Eigen::Vector3d end(0.35 + 0.05 * uni(rng), 0.15 * uni(rng), 0.15 + 0.05 * uni(rng));
  const Eigen::Vector3d arc(0.0, 0.0, 0.12 + 0.03 * uni(rng));
  const double twist = 0.8 + 0.3 * uni(rng);
  std::vector<ActionFrame> frames;
  frames.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double u = len == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(len - 1);
    const double s = min_jerk_shape(u);
    const Eigen::Vector3d p = start + s * (end - start) + std::sin(std::numbers::pi * u) * arc;
    const Eigen::Quaterniond q = axis_angle(Eigen::Vector3d::UnitZ(), twist * s);
    Eigen::VectorXd joints(1);
    joints << 0.8 * min_jerk_shape(std::clamp(2.0 * u - 0.5, 0.0, 1.0));
    frames.emplace_back(p, q, joints);
  }
  return Trajectory(std::move(frames), dt, source, demo_id);
}

/// Filler motion: smooth min-jerk moves between random waypoints in a box
/// away from the task region, with a tilted wrist and a half-open gripper.
inline std::vector<ActionFrame> background_motion(std::size_t len, Rng& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> seg_len(15, 40);
  auto waypoint = [&] { return Eigen::Vector3d(1.2 + 0.3 * uni(rng), 0.6 + 0.3 * uni(rng), 0.6 + 0.2 * uni(rng)); };
  const Eigen::Quaterniond tilt = axis_angle(Eigen::Vector3d::UnitX(), std::numbers::pi / 2.0);
  std::vector<ActionFrame> out;
  out.reserve(len);
  Eigen::Vector3d from = waypoint();
  while (out.size() < len) {
    const Eigen::Vector3d to = waypoint();
    const int n = seg_len(rng);
    for (int i = 0; i < n && out.size() < len; ++i) {
      const double s = min_jerk_shape(static_cast<double>(i) / static_cast<double>(n));
      Eigen::VectorXd joints(1);
      joints << 0.4 + 0.1 * std::sin(0.3 * static_cast<double>(out.size()));
      out.emplace_back((1.0 - s) * from + s * to, tilt, joints);
    }
    from = to;
  }
  return out;
}

/// Long human sequence with copies of a robot query motion planted at the
/// given offsets; each copy gets i.i.d. Gaussian translation noise.
inline PlantedData planted_segments(const PlantedSegments& spec, std::uint64_t seed) {
  H2R_REQUIRE(spec.base_len >= 1 && spec.query_len >= 1, ErrorKind::InvalidInput, "lengths must be positive");
  Rng rng(seed);
  Trajectory robot = task_motion(spec.query_len, rng, "robot_query", Source::Robot);
  std::vector<ActionFrame> frames = background_motion(spec.base_len, rng);
  std::vector<Interval> truth;
  std::size_t prev_end = 0;
  for (const auto& seg : spec.segments) {
    H2R_REQUIRE(seg.noise_sigma >= 0.0 && std::isfinite(seg.noise_sigma), ErrorKind::InvalidInput,
                "noise sigma must be non-negative");
    H2R_REQUIRE(seg.offset + spec.query_len <= spec.base_len, ErrorKind::InvalidInput, "planted copy overruns the sequence");
    H2R_REQUIRE(truth.empty() || seg.offset > prev_end, ErrorKind::InvalidInput,
                "planted copies must be sorted and disjoint");
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < spec.query_len; ++i) {
      ActionFrame f = robot[i];
      if (seg.noise_sigma > 0.0) {
        f.translation += seg.noise_sigma * Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
      }
      frames[seg.offset + i] = f;
    }
    truth.push_back({seg.offset, seg.offset + spec.query_len - 1});
    prev_end = truth.back().end;
  }
  return {Trajectory(std::move(frames), robot.dt(), Source::Human, "human_long"), std::move(robot), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Rigid scenes

struct RigidScene {
  std::size_t n_points = 20;
  double rotation_angle = 0.5;  // radians; axis is random
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double noise_sigma = 0.0;
};

struct RigidSceneData {
  std::vector<Eigen::Vector3d> cam_points;
  std::vector<Eigen::Vector3d> rob_points;
  RigidTransform truth;
};

/// Camera-frame points uniform in [-1, 1]^3 and their robot-frame images
/// under the true transform, plus optional Gaussian noise.
inline RigidSceneData rigid_scene(const RigidScene& spec, std::uint64_t seed) {
  H2R_REQUIRE(spec.n_points >= 1 && spec.noise_sigma >= 0.0, ErrorKind::InvalidInput, "invalid rigid scene");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  if (axis.norm() < 1e-9) axis = Eigen::Vector3d::UnitZ();
  RigidSceneData out{{}, {}, RigidTransform(axis_angle(axis, spec.rotation_angle), spec.translation)};
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const Eigen::Vector3d p(uni(rng), uni(rng), uni(rng));
    out.cam_points.push_back(p);
    out.rob_points.push_back(out.truth.apply(p) +
                             spec.noise_sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Features

struct FeatureBlob {
  std::size_t frames = 100;
  std::size_t dim = 16;
  std::size_t clusters = 4;
};

struct FeatureBlobData {
  FeatureSequence features;
  std::vector<std::size_t> labels;
};

/// Contiguous phases of equal length, each a random unit-scale centroid
/// plus 0.05-sigma jitter.
inline FeatureBlobData feature_blob(const FeatureBlob& spec, std::uint64_t seed) {
  H2R_REQUIRE(spec.frames >= 1 && spec.dim >= 1 && spec.clusters >= 1, ErrorKind::InvalidInput, "invalid feature blob");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(spec.clusters), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index i = 0; i < centroids.size(); ++i) centroids.data()[i] = gauss(rng);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(spec.frames), static_cast<Eigen::Index>(spec.dim));
  std::vector<std::size_t> labels(spec.frames);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    labels[t] = std::min(spec.clusters - 1, t * spec.clusters / spec.frames);
    for (std::size_t c = 0; c < spec.dim; ++c) {
      rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
          centroids(static_cast<Eigen::Index>(labels[t]), static_cast<Eigen::Index>(c)) + 0.05 * gauss(rng);
    }
  }
  return {FeatureSequence(std::move(rows), "blob"), std::move(labels)};
}

/// Mock encoder: tanh(W [translation; quaternion; joints] + b) with a
/// seeded random W and b. The same seed gives the same encoder.
inline FeatureSequence render_features(const Trajectory& traj, std::size_t dim, std::uint64_t encoder_seed) {
  H2R_REQUIRE(dim >= 1, ErrorKind::InvalidInput, "feature dimension must be positive");
  Rng rng(encoder_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto in_dim = static_cast<Eigen::Index>(ActionFrame::vector_dim(traj.joint_dim()));
  Eigen::MatrixXd W(static_cast<Eigen::Index>(dim), in_dim);
  Eigen::VectorXd b(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = 2.0 * gauss(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.5 * gauss(rng);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(traj.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t t = 0; t < traj.size(); ++t) {
    rows.row(static_cast<Eigen::Index>(t)) = (W * traj[t].to_vector() + b).array().tanh().transpose();
  }
  return FeatureSequence(std::move(rows), traj.demo_id());
}

/// Adds N(0, sigma^2) to every feature entry.
inline FeatureSequence disturb_features(const FeatureSequence& fs, double sigma, std::uint64_t seed) {
  H2R_REQUIRE(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::InvalidInput, "sigma must be non-negative");
  if (sigma == 0.0) return fs;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::MatrixXd rows = fs.rows();
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] += gauss(rng);
  return FeatureSequence(std::move(rows), fs.demo_id());
}

/// Adds N(0, sigma^2) to translation and joint channels.
inline Trajectory disturb_actions(const Trajectory& traj, double sigma, std::uint64_t seed) {
  H2R_REQUIRE(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::InvalidInput, "sigma must be non-negative");
  if (sigma == 0.0) return traj;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<ActionFrame> frames = traj.frames();
  for (auto& f : frames) {
    for (int c = 0; c < 3; ++c) f.translation[c] += gauss(rng);
    for (Eigen::Index c = 0; c < f.joints.size(); ++c) f.joints[c] += gauss(rng);
  }
  return Trajectory(std::move(frames), traj.dt(), traj.source(), traj.demo_id());
}

// ---------------------------------------------------------------------------
// Demonstration sets

struct DemoSet {
  std::size_t humans = 3;
  std::size_t robots = 2;
  std::size_t human_len = 40;
  std::size_t robot_len = 60;
  std::size_t agent_dim = 8;
  std::size_t wrist_dim = 4;
  double action_noise = 0.005;
};

struct DemoSetData {
  std::vector<Demo> humans;
  std::vector<Demo> robots;
};

/// Task-motion demonstrations from one shared task: humans are faster (fewer
/// frames) and slightly noisier. Agent features come from a shared mock
/// encoder; robots also get wrist features from a second encoder.
inline DemoSetData demo_set(const DemoSet& spec, std::uint64_t seed) {
  H2R_REQUIRE(spec.humans >= 1 && spec.robots >= 1 && spec.human_len >= 1 && spec.robot_len >= 1,
              ErrorKind::InvalidInput, "demo set sizes must be positive");
  Rng rng(seed);
  const std::uint64_t agent_encoder = rng();
  const std::uint64_t wrist_encoder = rng();
  DemoSetData out;
  for (std::size_t i = 0; i < spec.robots; ++i) {
    Rng local(rng());
    Trajectory traj = task_motion(spec.robot_len, local, "robot_" + std::to_string(i), Source::Robot);
    FeatureSequence agent = render_features(traj, spec.agent_dim, agent_encoder);
    FeatureSequence wrist = render_features(traj, spec.wrist_dim, wrist_encoder);
    out.robots.push_back(Demo{std::move(traj), std::move(agent), std::move(wrist)});
  }
  for (std::size_t i = 0; i < spec.humans; ++i) {
    Rng local(rng());
    Trajectory clean = task_motion(spec.human_len, local, "human_" + std::to_string(i), Source::Human);
    Trajectory traj = disturb_actions(clean, spec.action_noise, rng());
    FeatureSequence agent = render_features(traj, spec.agent_dim, agent_encoder);
    out.humans.push_back(Demo{std::move(traj), std::move(agent), std::nullopt});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tagged entry point

struct SynthSpec {
  std::variant<MinJerk, PlantedSegments, RigidScene, FeatureBlob> kind;
  std::uint64_t seed = 0;
};

using SynthOutput = std::variant<Trajectory, PlantedData, RigidSceneData, FeatureBlobData>;

inline SynthOutput generate(const SynthSpec& spec) {
  return std::visit(
      [&](const auto& k) -> SynthOutput {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, MinJerk>) return min_jerk(k);
        else if constexpr (std::is_same_v<K, PlantedSegments>) return planted_segments(k, spec.seed);
        else if constexpr (std::is_same_v<K, RigidScene>) return rigid_scene(k, spec.seed);
        else return feature_blob(k, spec.seed);
      },
      spec.kind);
}

}  // namespace h2r::synth

#endif  // H2R_SYNTH_HPP
