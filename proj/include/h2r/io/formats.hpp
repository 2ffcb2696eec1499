#ifndef H2R_IO_FORMATS_HPP
#define H2R_IO_FORMATS_HPP

// Text formats: mapping tables and segments as JSON lines, kinematic chains,
// rigid transforms, keypoint streams, ground-truth spans and CSV point lists.

#include <Eigen/Core>

#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "h2r/alignment.hpp"
#include "h2r/geometry.hpp"
#include "h2r/io/common.hpp"
#include "h2r/io/trajectory_io.hpp"
#include "h2r/retarget.hpp"
#include "h2r/retrieval.hpp"

namespace h2r::io {

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

inline Eigen::Vector3d vec3(const nlohmann::json& j, const char* key, const std::string& context) {
  const auto v = json_get<std::vector<double>>(j, key, context);
  if (v.size() != 3) throw Error(ErrorKind::InvalidInput, context + ": '" + key + "' needs 3 values");
  return {v[0], v[1], v[2]};
}

inline Eigen::Quaterniond quat(const nlohmann::json& j, const char* key, const std::string& context) {
  const auto v = json_get<std::vector<double>>(j, key, context);
  if (v.size() != 4) throw Error(ErrorKind::InvalidInput, context + ": '" + key + "' needs 4 values [w,x,y,z]");
  return Eigen::Quaterniond(v[0], v[1], v[2], v[3]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mapping table: one record per human timestep
//   {"human_demo": id, "t": int, "pairs": [{"robot_demo": id, "t_prime": int}, ...]}

inline std::string dump_mapping(const MappingTable& table) {
  std::string out;
  for (const auto& [key, refs] : table.entries()) {
    ordered_json rec;
    rec["human_demo"] = key.first;
    rec["t"] = key.second;
    ordered_json pairs = ordered_json::array();
    for (const auto& r : refs) {
      ordered_json p;
      p["robot_demo"] = r.robot_demo;
      p["t_prime"] = r.t_prime;
      pairs.push_back(std::move(p));
    }
    rec["pairs"] = std::move(pairs);
    out += rec.dump() + "\n";
  }
  return out;
}

inline MappingTable parse_mapping(const std::string& text, const std::string& context = "mapping") {
  MappingTable table;
  std::size_t n = 0;
  for (const auto& line : detail::split_lines(text)) {
    const std::string where = context + " line " + std::to_string(++n);
    const auto rec = parse_json(line, where);
    const auto human = json_get<std::string>(rec, "human_demo", where);
    const auto t = json_get<std::size_t>(rec, "t", where);
    if (!rec.contains("pairs") || !rec.at("pairs").is_array() || rec.at("pairs").empty()) {
      throw Error(ErrorKind::InvalidInput, where + ": 'pairs' must be a non-empty array");
    }
    if (table.contains(human, t)) throw Error(ErrorKind::InvalidInput, where + ": duplicate human timestep");
    for (const auto& p : rec.at("pairs")) {
      table.insert(human, t, RobotRef{json_get<std::string>(p, "robot_demo", where), json_get<std::size_t>(p, "t_prime", where)});
    }
  }
  return table;
}

inline void write_mapping(const std::filesystem::path& path, const MappingTable& table) {
  write_text(path, dump_mapping(table));
}

inline MappingTable read_mapping(const std::filesystem::path& path) {
  return parse_mapping(read_text(path), path.string());
}

// ---------------------------------------------------------------------------
// Segments (JSON lines) and ground truth (JSON array of {"start","end"})

inline std::string dump_segments(const std::vector<Segment>& segs) {
  std::string out;
  for (const auto& s : segs) {
    ordered_json j;
    j["h_start"] = s.h_start;
    j["h_end"] = s.h_end;
    j["r_start"] = s.r_start;
    j["r_end"] = s.r_end;
    j["cost"] = s.cost;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::vector<Segment> parse_segments(const std::string& text, const std::string& context = "segments") {
  std::vector<Segment> out;
  std::size_t n = 0;
  for (const auto& line : detail::split_lines(text)) {
    const std::string where = context + " line " + std::to_string(++n);
    const auto j = parse_json(line, where);
    out.push_back(Segment{json_get<std::size_t>(j, "h_start", where), json_get<std::size_t>(j, "h_end", where),
                          json_get<std::size_t>(j, "r_start", where), json_get<std::size_t>(j, "r_end", where),
                          json_get<double>(j, "cost", where)});
  }
  return out;
}

inline std::string dump_intervals(const std::vector<Interval>& spans) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : spans) {
    ordered_json j;
    j["start"] = s.start;
    j["end"] = s.end;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

inline std::vector<Interval> parse_intervals(const std::string& text, const std::string& context = "truth") {
  const auto j = parse_json(text, context);
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, context + ": expected a JSON array of {start, end}");
  std::vector<Interval> out;
  for (const auto& s : j) out.push_back({json_get<std::size_t>(s, "start", context), json_get<std::size_t>(s, "end", context)});
  return out;
}

// ---------------------------------------------------------------------------
// Kinematic chain
//   {"links": [{"axis": [x,y,z], "length": m}, ...], "q_lower": [...], "q_upper": [...]}

inline KinematicChain chain_from_json(const nlohmann::json& j, const std::string& context = "chain") {
  if (!j.contains("links") || !j.at("links").is_array()) throw Error(ErrorKind::InvalidInput, context + ": 'links' must be an array");
  std::vector<Link> links;
  for (const auto& l : j.at("links")) links.push_back(Link{detail::vec3(l, "axis", context), json_get<double>(l, "length", context)});
  const auto lo = json_get<std::vector<double>>(j, "q_lower", context);
  const auto hi = json_get<std::vector<double>>(j, "q_upper", context);
  return KinematicChain(std::move(links), Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                        Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

inline ordered_json chain_to_json(const KinematicChain& chain) {
  ordered_json j;
  ordered_json links = ordered_json::array();
  for (const auto& l : chain.links()) {
    ordered_json lj;
    lj["axis"] = {l.axis.x(), l.axis.y(), l.axis.z()};
    lj["length"] = l.length;
    links.push_back(std::move(lj));
  }
  j["links"] = std::move(links);
  j["q_lower"] = std::vector<double>(chain.q_lower().data(), chain.q_lower().data() + chain.q_lower().size());
  j["q_upper"] = std::vector<double>(chain.q_upper().data(), chain.q_upper().data() + chain.q_upper().size());
  return j;
}

inline KinematicChain read_chain(const std::filesystem::path& path) {
  return chain_from_json(parse_json(read_text(path), path.string()), path.string());
}

// ---------------------------------------------------------------------------
// Keypoint stream: one JSON object per frame
//   {"keypoints": [[x,y,z], ...], "translation": [..]?, "quaternion": [w,x,y,z]?}

struct KeypointFrames {
  std::vector<std::vector<Eigen::Vector3d>> keypoints;
  std::vector<ActionFrame> base;  // empty unless every frame carries a wrist pose
};

inline KeypointFrames parse_keypoints(const std::string& text, const std::string& context = "keypoints") {
  KeypointFrames out;
  bool all_base = true;
  std::vector<ActionFrame> base;
  std::size_t n = 0;
  for (const auto& line : detail::split_lines(text)) {
    const std::string where = context + " line " + std::to_string(++n);
    const auto j = parse_json(line, where);
    const auto pts = json_get<std::vector<std::vector<double>>>(j, "keypoints", where);
    std::vector<Eigen::Vector3d> frame;
    for (const auto& p : pts) {
      if (p.size() != 3) throw Error(ErrorKind::InvalidInput, where + ": keypoints need 3 coordinates");
      frame.emplace_back(p[0], p[1], p[2]);
    }
    out.keypoints.push_back(std::move(frame));
    if (j.contains("translation") && j.contains("quaternion")) {
      base.emplace_back(detail::vec3(j, "translation", where), detail::quat(j, "quaternion", where));
    } else {
      all_base = false;
    }
  }
  if (all_base && !base.empty()) out.base = std::move(base);
  return out;
}

// ---------------------------------------------------------------------------
// Rigid transform {"quaternion": [w,x,y,z], "translation": [x,y,z], "rmse": r}
// The quaternion is written with w >= 0.

inline ordered_json transform_to_json(const RigidTransform& T, double rmse) {
  ordered_json j;
  Eigen::Quaterniond q = T.rotation();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  j["quaternion"] = {q.w(), q.x(), q.y(), q.z()};
  j["translation"] = {T.translation().x(), T.translation().y(), T.translation().z()};
  j["rmse"] = rmse;
  return j;
}

inline RigidTransform transform_from_json(const nlohmann::json& j, const std::string& context = "transform") {
  return RigidTransform(detail::quat(j, "quaternion", context), detail::vec3(j, "translation", context));
}

// ---------------------------------------------------------------------------
// CSV

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Numeric CSV with a required header; returns the data rows.
inline std::vector<std::vector<double>> parse_numeric_csv(const std::string& text, std::string_view expected_header,
                                                          const std::string& context) {
  const auto lines = detail::split_lines(text);
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }), s.end());
    return s;
  };
  if (lines.empty() || strip(lines.front()) != expected_header) {
    throw Error(ErrorKind::InvalidInput, context + ": expected header '" + std::string(expected_header) + "'");
  }
  const auto width = static_cast<std::size_t>(std::count(expected_header.begin(), expected_header.end(), ',') + 1);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<double> row;
    std::istringstream ls(lines[i]);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (strip(cell.substr(used)).size() != 0) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidInput, context + " line " + std::to_string(i + 1) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != width) {
      throw Error(ErrorKind::InvalidInput, context + " line " + std::to_string(i + 1) + ": expected " +
                                               std::to_string(width) + " columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace h2r::io

#endif  // H2R_IO_FORMATS_HPP
