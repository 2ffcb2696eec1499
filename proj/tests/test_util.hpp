#ifndef H2R_TESTS_TEST_UTIL_HPP
#define H2R_TESTS_TEST_UTIL_HPP

#include <Eigen/Geometry>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "h2r/core.hpp"

namespace testutil {

using Rng = std::mt19937_64;

inline Eigen::Quaterniond random_quat(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q;
}

inline Eigen::Vector3d random_vec(Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline h2r::ActionFrame random_frame(Rng& rng, std::size_t joints) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd j(static_cast<Eigen::Index>(joints));
  for (auto& v : j) v = u(rng);
  return h2r::ActionFrame(random_vec(rng), random_quat(rng), j);
}

inline h2r::Trajectory random_traj(Rng& rng, std::size_t len, std::size_t joints, const std::string& id,
                                   h2r::Source src = h2r::Source::Robot, double dt = 0.05) {
  std::vector<h2r::ActionFrame> frames;
  for (std::size_t i = 0; i < len; ++i) frames.push_back(random_frame(rng, joints));
  return h2r::Trajectory(std::move(frames), dt, src, id);
}

/// Fresh empty directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("h2r_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil

#endif  // H2R_TESTS_TEST_UTIL_HPP
