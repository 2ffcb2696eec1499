#ifndef H2R_ALIGNMENT_HPP
#define H2R_ALIGNMENT_HPP

// Full-sequence dynamic time warping and the human-to-robot timestep
// mapping table built from it.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "h2r/distance.hpp"
#include "h2r/error.hpp"
#include "h2r/parallel.hpp"

namespace h2r {

struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

namespace detail {

// Picks the cheapest predecessor of (i, j), i, j >= 1, preferring the
// diagonal, then the vertical (i-1, j), then the horizontal (i, j-1) step.
inline std::pair<std::size_t, std::size_t> best_predecessor(const Eigen::MatrixXd& acc, std::size_t i,
                                                            std::size_t j) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  const double diag = acc(ii - 1, jj - 1);
  const double vert = acc(ii - 1, jj);
  const double horiz = acc(ii, jj - 1);
  if (diag <= vert && diag <= horiz) return {i - 1, j - 1};
  if (vert <= horiz) return {i - 1, j};
  return {i, j - 1};
}

}  // namespace detail

/// Minimal cumulative-cost monotone path from (0, 0) to (rows-1, cols-1)
/// with steps (1,0), (0,1), (1,1). An optional Sakoe-Chiba band restricts
/// cells to |j - i*(cols-1)/(rows-1)| <= band.
inline WarpPath dtw(const Eigen::MatrixXd& cost, std::optional<std::size_t> band = std::nullopt) {
  H2R_REQUIRE(cost.rows() > 0 && cost.cols() > 0, ErrorKind::InvalidInput, "dtw needs a non-empty cost matrix");
  H2R_REQUIRE(cost.allFinite(), ErrorKind::InvalidInput, "dtw cost matrix must be finite");
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();

  auto outside = [&](Eigen::Index i, Eigen::Index j) {
    if (!band || n == 1 || m == 1) return false;
    const double centre = static_cast<double>(i) * static_cast<double>(m - 1) / static_cast<double>(n - 1);
    return std::abs(static_cast<double>(j) - centre) > static_cast<double>(*band);
  };

  Eigen::MatrixXd acc(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (outside(i, j)) {
        acc(i, j) = inf;
        continue;
      }
      double prev;
      if (i == 0 && j == 0) {
        acc(i, j) = cost(i, j);
        continue;
      } else if (i == 0) {
        prev = acc(i, j - 1);
      } else if (j == 0) {
        prev = acc(i - 1, j);
      } else {
        prev = std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
      }
      acc(i, j) = prev + cost(i, j);
    }
  }
  H2R_REQUIRE(std::isfinite(acc(n - 1, m - 1)), ErrorKind::InvalidInput, "band too narrow to connect the corners");

  WarpPath path;
  path.total_cost = acc(n - 1, m - 1);
  std::size_t i = static_cast<std::size_t>(n - 1);
  std::size_t j = static_cast<std::size_t>(m - 1);
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      std::tie(i, j) = detail::best_predecessor(acc, i, j);
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

/// A robot timestep matched to a human timestep.
struct RobotRef {
  std::string robot_demo;
  std::size_t t_prime = 0;

  friend bool operator==(const RobotRef&, const RobotRef&) = default;
};

/// For each (human demo, timestep), the robot (demo, timestep) pairs it was
/// aligned with. Iteration order is sorted by demo id then timestep.
class MappingTable {
 public:
  using Key = std::pair<std::string, std::size_t>;

  void insert(const std::string& human_demo, std::size_t t, RobotRef ref) {
    entries_[{human_demo, t}].push_back(std::move(ref));
  }

  bool contains(const std::string& human_demo, std::size_t t) const {
    return entries_.find({human_demo, t}) != entries_.end();
  }

  const std::vector<RobotRef>& at(const std::string& human_demo, std::size_t t) const {
    auto it = entries_.find({human_demo, t});
    if (it == entries_.end()) {
      throw Error(ErrorKind::UnmappedTimestep,
                  "human demo '" + human_demo + "' timestep " + std::to_string(t) + " has no mapping");
    }
    return it->second;
  }

  /// Total number of (t, t') pairs.
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [k, v] : entries_) n += v.size();
    return n;
  }
  std::size_t timesteps() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<Key, std::vector<RobotRef>>& entries() const { return entries_; }

  friend bool operator==(const MappingTable&, const MappingTable&) = default;

 private:
  std::map<Key, std::vector<RobotRef>> entries_;
};

struct MappingOptions {
  std::optional<std::size_t> top_k;  // keep only the k cheapest robot demos per human demo
  std::optional<std::size_t> band;
  unsigned threads = 1;
};

/// DTW between every (human, robot) demo pair; every path pair of the
/// selected demo pairs lands in the table. Sequences are Trajectory with an
/// ActionMetric or FeatureSequence with a VisualMetric.
template <typename Seq, typename Metric>
MappingTable build_mapping(std::span<const Seq> humans, std::span<const Seq> robots, const Metric& metric,
                           const MappingOptions& opts = {}) {
  H2R_REQUIRE(!humans.empty() && !robots.empty(), ErrorKind::InvalidInput, "demo sets must be non-empty");
  H2R_REQUIRE(!opts.top_k || *opts.top_k >= 1, ErrorKind::InvalidInput, "top_k must be at least 1");
  auto check_unique = [](auto seqs, const char* what) {
    std::set<std::string> ids;
    for (const auto& s : seqs) {
      H2R_REQUIRE(ids.insert(demo_id(s)).second, ErrorKind::InvalidInput,
                  std::string("duplicate ") + what + " demo id '" + demo_id(s) + "'");
    }
  };
  check_unique(humans, "human");
  check_unique(robots, "robot");

  const std::size_t nr = robots.size();
  std::vector<WarpPath> paths(humans.size() * nr);
  parallel_for(paths.size(), opts.threads, [&](std::size_t idx) {
    const auto& h = humans[idx / nr];
    const auto& r = robots[idx % nr];
    paths[idx] = dtw(cost_matrix(h, r, metric), opts.band);
  });

  MappingTable table;
  for (std::size_t hi = 0; hi < humans.size(); ++hi) {
    std::vector<std::size_t> chosen(nr);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (opts.top_k && *opts.top_k < nr) {
      std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        return paths[hi * nr + a].total_cost < paths[hi * nr + b].total_cost;
      });
      chosen.resize(*opts.top_k);
      std::sort(chosen.begin(), chosen.end());
    }
    const std::string& hid = demo_id(humans[hi]);
    for (std::size_t ri : chosen) {
      for (const auto& [t, tp] : paths[hi * nr + ri].pairs) {
        table.insert(hid, t, RobotRef{demo_id(robots[ri]), tp});
      }
    }
  }
  return table;
}

}  // namespace h2r

#endif  // H2R_ALIGNMENT_HPP
