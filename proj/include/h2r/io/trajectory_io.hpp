#ifndef H2R_IO_TRAJECTORY_IO_HPP
#define H2R_IO_TRAJECTORY_IO_HPP

// Trajectory JSON:
//   {"dt": s, "source": "human"|"robot", "demo_id": str,
//    "frames": [{"translation": [x,y,z], "quaternion": [w,x,y,z], "joints": [...]}, ...]}
//
// FeatureSequence binary ("TRJF"), little-endian:
//   magic "TRJF", u32 version = 1, u32 rows, u32 dim, rows*dim binary32 row-major.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "h2r/core.hpp"
#include "h2r/io/common.hpp"

namespace h2r::io {

inline ordered_json frame_to_json(const ActionFrame& f) {
  ordered_json j;
  j["translation"] = {f.translation.x(), f.translation.y(), f.translation.z()};
  j["quaternion"] = {f.orientation.w(), f.orientation.x(), f.orientation.y(), f.orientation.z()};
  j["joints"] = std::vector<double>(f.joints.data(), f.joints.data() + f.joints.size());
  return j;
}

inline ActionFrame frame_from_json(const nlohmann::json& j, const std::string& context) {
  const auto t = json_get<std::vector<double>>(j, "translation", context);
  const auto q = json_get<std::vector<double>>(j, "quaternion", context);
  const auto joints = j.contains("joints") ? json_get<std::vector<double>>(j, "joints", context) : std::vector<double>{};
  if (t.size() != 3) throw Error(ErrorKind::InvalidInput, context + ": translation needs 3 values");
  if (q.size() != 4) throw Error(ErrorKind::InvalidInput, context + ": quaternion needs 4 values [w,x,y,z]");
  return ActionFrame(Eigen::Vector3d(t[0], t[1], t[2]), Eigen::Quaterniond(q[0], q[1], q[2], q[3]),
                     Eigen::Map<const Eigen::VectorXd>(joints.data(), static_cast<Eigen::Index>(joints.size())));
}

inline ordered_json trajectory_to_json(const Trajectory& traj) {
  ordered_json j;
  j["dt"] = traj.dt();
  j["source"] = to_string(traj.source());
  j["demo_id"] = traj.demo_id();
  ordered_json frames = ordered_json::array();
  for (const auto& f : traj.frames()) frames.push_back(frame_to_json(f));
  j["frames"] = std::move(frames);
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j, const std::string& context = "trajectory") {
  const double dt = json_get<double>(j, "dt", context);
  const Source source = source_from_string(json_get<std::string>(j, "source", context));
  const std::string id = json_get<std::string>(j, "demo_id", context);
  if (!j.contains("frames") || !j.at("frames").is_array()) {
    throw Error(ErrorKind::InvalidInput, context + ": 'frames' must be an array");
  }
  std::vector<ActionFrame> frames;
  std::size_t i = 0;
  for (const auto& f : j.at("frames")) frames.push_back(frame_from_json(f, context + " frame " + std::to_string(i++)));
  return Trajectory(std::move(frames), dt, source, id);
}

inline std::string dump_trajectory(const Trajectory& traj) { return trajectory_to_json(traj).dump(2) + "\n"; }

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  write_text(path, dump_trajectory(traj));
}

inline Trajectory read_trajectory(const std::filesystem::path& path) {
  return trajectory_from_json(parse_json(read_text(path), path.string()), path.string());
}

inline void write_features(std::ostream& out, const FeatureSequence& fs) {
  out.write("TRJF", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(fs.size()));
  put_u32(out, static_cast<std::uint32_t>(fs.dim()));
  for (Eigen::Index r = 0; r < fs.rows().rows(); ++r) {
    for (Eigen::Index c = 0; c < fs.rows().cols(); ++c) put_f32(out, static_cast<float>(fs.rows()(r, c)));
  }
}

inline FeatureSequence read_features(std::istream& in, const std::string& demo_id, const std::string& context) {
  expect_magic(in, "TRJF", context);
  const auto version = get_u32(in, context);
  if (version != 1) throw Error(ErrorKind::InvalidInput, context + ": unsupported version " + std::to_string(version));
  const auto rows = get_u32(in, context);
  const auto dim = get_u32(in, context);
  Eigen::MatrixXd m(rows, dim);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) m(r, c) = get_f32(in, context);
  }
  return FeatureSequence(std::move(m), demo_id);
}

inline void write_features(const std::filesystem::path& path, const FeatureSequence& fs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_features(out, fs);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

/// The demo id is taken from the file stem (up to its first '.').
inline FeatureSequence read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::string id = path.filename().string();
  id = id.substr(0, id.find('.'));
  return read_features(in, id, path.string());
}

}  // namespace h2r::io

#endif  // H2R_IO_TRAJECTORY_IO_HPP
