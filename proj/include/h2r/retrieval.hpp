#ifndef H2R_RETRIEVAL_HPP
#define H2R_RETRIEVAL_HPP

// Subsequence DTW and greedy multi-segment retrieval of robot-like spans
// from long, unsegmented human sequences.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "h2r/alignment.hpp"
#include "h2r/distance.hpp"
#include "h2r/error.hpp"

namespace h2r {

/// Open-ended match of a whole query against a contiguous robot span.
struct SubsequenceMatch {
  double cost = 0.0;      // raw_cost / path length
  double raw_cost = 0.0;  // cumulative cost at the chosen end cell
  std::size_t j_start = 0;
  std::size_t j_end = 0;
  std::size_t path_length = 0;
  WarpPath path;
};

namespace detail {

// Subsequence DP over the first `rows` rows of `cost` starting at row
// `row0`. Row 0 of the block is free to start at any column; the first
// column accumulates. Besides the cumulative cost, each cell carries the
// start column and length of the path that reaches it, chosen with the same
// predecessor preference as backtracking.
class SubsequenceTable {
 public:
  SubsequenceTable(const Eigen::MatrixXd& cost, Eigen::Index row0, Eigen::Index rows)
      : acc_(rows, cost.cols()), start_(rows, cost.cols()), len_(rows, cost.cols()) {
    const Eigen::Index m = cost.cols();
    for (Eigen::Index j = 0; j < m; ++j) {
      acc_(0, j) = cost(row0, j);
      start_(0, j) = static_cast<std::int64_t>(j);
      len_(0, j) = 1;
    }
    for (Eigen::Index i = 1; i < rows; ++i) {
      acc_(i, 0) = acc_(i - 1, 0) + cost(row0 + i, 0);
      start_(i, 0) = 0;
      len_(i, 0) = len_(i - 1, 0) + 1;
      for (Eigen::Index j = 1; j < m; ++j) {
        const auto [pi, pj] = best_predecessor(acc_, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        const auto a = static_cast<Eigen::Index>(pi);
        const auto b = static_cast<Eigen::Index>(pj);
        acc_(i, j) = acc_(a, b) + cost(row0 + i, j);
        start_(i, j) = start_(a, b);
        len_(i, j) = len_(a, b) + 1;
      }
    }
  }

  /// Best end column for a query made of the first `length` block rows.
  SubsequenceMatch best_end(Eigen::Index length) const {
    const Eigen::Index i = length - 1;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < acc_.cols(); ++j) {
      if (acc_(i, j) < acc_(i, best)) best = j;
    }
    SubsequenceMatch m;
    m.raw_cost = acc_(i, best);
    m.path_length = static_cast<std::size_t>(len_(i, best));
    m.cost = m.raw_cost / static_cast<double>(m.path_length);
    m.j_start = static_cast<std::size_t>(start_(i, best));
    m.j_end = static_cast<std::size_t>(best);
    return m;
  }

  WarpPath backtrack(Eigen::Index length, std::size_t j_end) const {
    WarpPath path;
    std::size_t i = static_cast<std::size_t>(length - 1);
    std::size_t j = j_end;
    path.total_cost = acc_(length - 1, static_cast<Eigen::Index>(j_end));
    path.pairs.emplace_back(i, j);
    while (i > 0) {
      if (j == 0) {
        --i;
      } else {
        std::tie(i, j) = best_predecessor(acc_, i, j);
      }
      path.pairs.emplace_back(i, j);
    }
    std::reverse(path.pairs.begin(), path.pairs.end());
    return path;
  }

 private:
  Eigen::MatrixXd acc_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> start_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> len_;
};

}  // namespace detail

/// Matches the full query (rows) against the best contiguous span of the
/// candidate (columns). The end column minimizes the cumulative cost of the
/// last row (first index on ties); the start is recovered by backtracking.
inline SubsequenceMatch sdtw(const Eigen::MatrixXd& query_cost) {
  H2R_REQUIRE(query_cost.rows() > 0 && query_cost.cols() > 0, ErrorKind::InvalidInput,
              "sdtw needs a non-empty cost matrix");
  H2R_REQUIRE(query_cost.allFinite(), ErrorKind::InvalidInput, "sdtw cost matrix must be finite");
  const detail::SubsequenceTable table(query_cost, 0, query_cost.rows());
  SubsequenceMatch m = table.best_end(query_cost.rows());
  m.path = table.backtrack(query_cost.rows(), m.j_end);
  return m;
}

/// A retrieved match; indices are inclusive.
struct Segment {
  std::size_t h_start = 0;
  std::size_t h_end = 0;
  std::size_t r_start = 0;
  std::size_t r_end = 0;
  double cost = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct GmsConfig {
  std::size_t l_min = 1;
  std::size_t l_max = 1;
  double epsilon = 1.0;

  void validate() const {
    H2R_REQUIRE(l_min >= 1 && l_min <= l_max, ErrorKind::InvalidInput, "window bounds need 1 <= l_min <= l_max");
    H2R_REQUIRE(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::InvalidInput, "epsilon must be positive");
  }
};

/// Greedy multi-segment subsequence DTW over a precomputed human x robot
/// cost matrix. At each start t every window length in [l_min, l_max] is
/// scored by path-length-normalized subsequence cost; the best window is
/// emitted when its cost is below epsilon and the scan jumps past it,
/// otherwise t advances by one. Equal costs favour the longer window.
///
/// All window lengths at a given t share one dynamic-programming table, since
/// the table for a window is a prefix of the table for any longer window.
inline std::vector<Segment> gms_sdtw(const Eigen::MatrixXd& cost, const GmsConfig& cfg) {
  cfg.validate();
  H2R_REQUIRE(cost.cols() > 0, ErrorKind::InvalidInput, "robot sequence is empty");
  H2R_REQUIRE(cost.allFinite(), ErrorKind::InvalidInput, "cost matrix must be finite");
  const auto th = static_cast<std::size_t>(cost.rows());
  H2R_REQUIRE(cfg.l_min <= th, ErrorKind::InvalidInput, "l_min exceeds the human sequence length");

  std::vector<Segment> out;
  std::size_t t = 0;
  while (t + cfg.l_min <= th) {
    const std::size_t hi = std::min(cfg.l_max, th - t);
    const detail::SubsequenceTable table(cost, static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(hi));
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_len = 0;
    SubsequenceMatch best;
    for (std::size_t len = cfg.l_min; len <= hi; ++len) {
      const SubsequenceMatch m = table.best_end(static_cast<Eigen::Index>(len));
      if (m.cost <= best_cost) {
        best_cost = m.cost;
        best_len = len;
        best = m;
      }
    }
    if (best_cost < cfg.epsilon) {
      out.push_back(Segment{t, t + best_len - 1, best.j_start, best.j_end, best_cost});
      t += best_len;
    } else {
      ++t;
    }
  }
  return out;
}

template <typename Seq, typename Metric>
std::vector<Segment> gms_sdtw(const Seq& human, const Seq& robot, const Metric& metric, const GmsConfig& cfg,
                              unsigned threads = 1) {
  cfg.validate();
  H2R_REQUIRE(cfg.l_min <= sequence_length(human), ErrorKind::InvalidInput,
              "l_min exceeds the human sequence length");
  return gms_sdtw(cost_matrix(human, robot, metric, threads), cfg);
}

/// Inclusive integer interval.
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;
};

inline double interval_iou(const Interval& a, const Interval& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  const double inter = hi >= lo ? static_cast<double>(hi - lo + 1) : 0.0;
  const double uni = static_cast<double>(a.end - a.start + 1) + static_cast<double>(b.end - b.start + 1) - inter;
  return inter / uni;
}

struct RetrievalScore {
  double miou = 0.0;
  double acc_at_half = 0.0;
};

/// One-to-one greedy matching of predictions to ground truth by descending
/// IoU (ties by truth index, then prediction index). Unmatched truths count
/// as IoU 0.
inline RetrievalScore eval_retrieval(std::span<const Interval> predicted, std::span<const Interval> truth) {
  H2R_REQUIRE(!truth.empty(), ErrorKind::InvalidInput, "ground truth must be non-empty");
  for (const auto& s : predicted) H2R_REQUIRE(s.end >= s.start, ErrorKind::InvalidInput, "segment end before start");
  for (const auto& s : truth) H2R_REQUIRE(s.end >= s.start, ErrorKind::InvalidInput, "segment end before start");

  struct Candidate {
    double iou;
    std::size_t truth;
    std::size_t pred;
  };
  std::vector<Candidate> cands;
  for (std::size_t ti = 0; ti < truth.size(); ++ti) {
    for (std::size_t pi = 0; pi < predicted.size(); ++pi) {
      const double iou = interval_iou(predicted[pi], truth[ti]);
      if (iou > 0.0) cands.push_back({iou, ti, pi});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.iou > b.iou; });

  std::vector<double> matched(truth.size(), 0.0);
  std::vector<bool> truth_used(truth.size(), false);
  std::vector<bool> pred_used(predicted.size(), false);
  for (const auto& c : cands) {
    if (truth_used[c.truth] || pred_used[c.pred]) continue;
    truth_used[c.truth] = true;
    pred_used[c.pred] = true;
    matched[c.truth] = c.iou;
  }
  RetrievalScore s;
  for (double iou : matched) {
    s.miou += iou;
    if (iou >= 0.5) s.acc_at_half += 1.0;
  }
  s.miou /= static_cast<double>(truth.size());
  s.acc_at_half /= static_cast<double>(truth.size());
  return s;
}

inline RetrievalScore eval_retrieval(std::span<const Segment> predicted, std::span<const Interval> truth) {
  std::vector<Interval> spans;
  spans.reserve(predicted.size());
  for (const auto& s : predicted) spans.push_back({s.h_start, s.h_end});
  return eval_retrieval(std::span<const Interval>(spans), truth);
}

}  // namespace h2r

#endif  // H2R_RETRIEVAL_HPP
