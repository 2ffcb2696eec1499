#include <gtest/gtest.h>

#include "h2r/distance.hpp"
#include "h2r/retrieval.hpp"
#include "h2r/synth.hpp"
#include "oracles/oracles.hpp"
#include "test_util.hpp"

using namespace h2r;
using namespace h2r::synth;
using testutil::Rng;

namespace {

Eigen::MatrixXd random_costs(Rng& rng, Eigen::Index n, Eigen::Index m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd c(n, m);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return c;
}

}  // namespace

TEST(Sdtw, EmbeddedCopyFound) {
  Rng rng(41);
  Eigen::MatrixXd robot = Eigen::MatrixXd::Random(12, 3) * 5.0;
  const Eigen::MatrixXd query = robot.middleRows(3, 5);
  const SubsequenceMatch m = sdtw(cost_matrix(query, robot, VisualMetric{}));
  EXPECT_EQ(m.j_start, 3u);
  EXPECT_EQ(m.j_end, 7u);
  EXPECT_DOUBLE_EQ(m.cost, 0.0);
  EXPECT_EQ(m.path_length, 5u);
  EXPECT_EQ(m.path.pairs.size(), m.path_length);
}

TEST(Sdtw, MatchesSpanOracle) {
  Rng rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::MatrixXd c = random_costs(rng, 4, 10);
    const SubsequenceMatch m = sdtw(c);
    const oracle::SpanBest o = oracle::span_sdtw(c);
    EXPECT_NEAR(m.raw_cost, o.raw, 1e-12);
    EXPECT_EQ(m.j_start, o.start);
    EXPECT_EQ(m.j_end, o.end);
    EXPECT_EQ(m.path_length, o.length);
    EXPECT_NEAR(m.cost, o.raw / static_cast<double>(o.length), 1e-12);
    EXPECT_EQ(m.path.pairs.front().second, m.j_start);
    EXPECT_EQ(m.path.pairs.back().second, m.j_end);
  }
}

TEST(Sdtw, SingleColumn) {
  const Eigen::MatrixXd c = (Eigen::MatrixXd(3, 1) << 1, 2, 3).finished();
  const SubsequenceMatch m = sdtw(c);
  EXPECT_EQ(m.j_start, 0u);
  EXPECT_EQ(m.j_end, 0u);
  EXPECT_DOUBLE_EQ(m.raw_cost, 6.0);
  EXPECT_DOUBLE_EQ(m.cost, 2.0);
}

TEST(GmsSdtw, FindsPlantedCopies) {
  Rng rng(43);
  const Eigen::MatrixXd robot = Eigen::MatrixXd::Random(20, 4) * 3.0;
  Eigen::MatrixXd human = Eigen::MatrixXd::Random(90, 4) * 3.0 + Eigen::MatrixXd::Constant(90, 4, 50.0);
  human.middleRows(10, 20) = robot;
  human.middleRows(55, 20) = robot;
  const GmsConfig cfg{16, 24, 1e-6};
  const auto segs = gms_sdtw(cost_matrix(human, robot, VisualMetric{}), cfg);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].h_start, 10u);
  EXPECT_EQ(segs[0].h_end, 29u);
  EXPECT_EQ(segs[1].h_start, 55u);
  EXPECT_EQ(segs[1].h_end, 74u);
  EXPECT_EQ(segs[0].r_start, 0u);
  EXPECT_EQ(segs[0].r_end, 19u);
}

TEST(GmsSdtw, EmptyWhenNothingBelowEpsilon) {
  Rng rng(44);
  const Eigen::MatrixXd c = random_costs(rng, 30, 8).array() + 1.0;
  EXPECT_TRUE(gms_sdtw(c, GmsConfig{3, 6, 1.0}).empty());
}

TEST(GmsSdtw, SegmentsDoNotOverlapAndRespectBounds) {
  Rng rng(45);
  const Eigen::MatrixXd c = random_costs(rng, 80, 15);
  const GmsConfig cfg{4, 9, 0.4};
  const auto segs = gms_sdtw(c, cfg);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::size_t len = segs[k].h_end - segs[k].h_start + 1;
    EXPECT_GE(len, cfg.l_min);
    EXPECT_LE(len, cfg.l_max);
    EXPECT_LT(segs[k].cost, cfg.epsilon);
    if (k > 0) {
      EXPECT_GT(segs[k].h_start, segs[k - 1].h_end);
    }
    // Each segment cost equals the oracle over its human rows.
    const oracle::SpanBest o = oracle::span_sdtw(
        c.middleRows(static_cast<Eigen::Index>(segs[k].h_start), static_cast<Eigen::Index>(len)));
    EXPECT_LE(segs[k].cost, o.raw / static_cast<double>(o.length) + 1e-12);
  }
}

TEST(GmsSdtw, ConfigValidation) {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Ones(5, 5);
  EXPECT_THROW(gms_sdtw(c, GmsConfig{0, 3, 1.0}), Error);
  EXPECT_THROW(gms_sdtw(c, GmsConfig{4, 3, 1.0}), Error);
  EXPECT_THROW(gms_sdtw(c, GmsConfig{1, 3, 0.0}), Error);
  EXPECT_THROW(gms_sdtw(c, GmsConfig{6, 8, 1.0}), Error);
}

TEST(GmsSdtw, PlantedSyntheticNoiseFree) {
  PlantedSegments spec;
  spec.base_len = 300;
  spec.query_len = 40;
  spec.segments = {{30, 0.0}, {140, 0.0}, {230, 0.0}};
  const PlantedData d = planted_segments(spec, 5);
  const GmsConfig cfg{32, 48, 1e-6};
  const auto segs = gms_sdtw(d.human, d.robot, ActionMetric{}, cfg);
  const RetrievalScore s = eval_retrieval(std::span<const Segment>(segs), std::span<const Interval>(d.truth));
  EXPECT_EQ(s.miou, 1.0);
  EXPECT_EQ(s.acc_at_half, 1.0);
}

TEST(EvalRetrieval, WorkedExample) {
  const std::vector<Interval> pred{{0, 9}}, truth{{5, 14}};
  const RetrievalScore s = eval_retrieval(std::span<const Interval>(pred), std::span<const Interval>(truth));
  EXPECT_DOUBLE_EQ(s.miou, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.acc_at_half, 0.0);
}

TEST(EvalRetrieval, OneToOneMatching) {
  // One prediction cannot be credited to two truths.
  const std::vector<Interval> pred{{0, 19}}, truth{{0, 9}, {10, 19}};
  const RetrievalScore s = eval_retrieval(std::span<const Interval>(pred), std::span<const Interval>(truth));
  EXPECT_DOUBLE_EQ(s.miou, 0.25);
  const std::vector<Interval> none;
  EXPECT_DOUBLE_EQ(eval_retrieval(std::span<const Interval>(none), std::span<const Interval>(truth)).miou, 0.0);
  EXPECT_THROW(eval_retrieval(std::span<const Interval>(pred), std::span<const Interval>(none)), Error);
  const std::vector<Interval> bad{{5, 2}};
  EXPECT_THROW(eval_retrieval(std::span<const Interval>(bad), std::span<const Interval>(truth)), Error);
}

TEST(IntervalIou, Basics) {
  EXPECT_DOUBLE_EQ(interval_iou({0, 9}, {0, 9}), 1.0);
  EXPECT_DOUBLE_EQ(interval_iou({0, 4}, {5, 9}), 0.0);
  EXPECT_DOUBLE_EQ(interval_iou({3, 3}, {3, 3}), 1.0);
}
