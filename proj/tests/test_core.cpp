#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>

#include "h2r/core.hpp"
#include "h2r/geometry.hpp"
#include "test_util.hpp"

using namespace h2r;
using testutil::Rng;

namespace {

ActionFrame at(double x, std::size_t joints = 0, double jv = 0.0) {
  return ActionFrame(Eigen::Vector3d(x, 0, 0), Eigen::Quaterniond::Identity(),
                     Eigen::VectorXd::Constant(static_cast<Eigen::Index>(joints), jv));
}

Trajectory line_traj(std::size_t n) {
  std::vector<ActionFrame> f;
  for (std::size_t i = 0; i < n; ++i) f.push_back(at(static_cast<double>(i)));
  return Trajectory(std::move(f), 0.1, Source::Robot, "line");
}

}  // namespace

TEST(ActionFrame, NormalizesQuaternionOnIngest) {
  ActionFrame f(Eigen::Vector3d::Zero(), Eigen::Quaterniond(2.0, 0.0, 0.0, 0.0));
  EXPECT_NEAR(f.orientation.norm(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.orientation.w(), 1.0);
}

TEST(ActionFrame, RejectsNonFinite) {
  EXPECT_THROW(ActionFrame(Eigen::Vector3d(NAN, 0, 0), Eigen::Quaterniond::Identity()), Error);
  EXPECT_THROW(ActionFrame(Eigen::Vector3d::Zero(), Eigen::Quaterniond(0, 0, 0, 0)), Error);
}

TEST(ActionFrame, VectorLayout) {
  ActionFrame f(Eigen::Vector3d(1, 2, 3), Eigen::Quaterniond(0, 1, 0, 0), Eigen::Vector2d(7, 8));
  const Eigen::VectorXd v = f.to_vector();
  ASSERT_EQ(v.size(), 9);
  EXPECT_EQ(v[0], 1);
  EXPECT_EQ(v[2], 3);
  EXPECT_EQ(v[3], 0);  // w
  EXPECT_EQ(v[4], 1);  // x
  EXPECT_EQ(v[8], 8);
}

TEST(Trajectory, Invariants) {
  EXPECT_THROW(Trajectory({}, 0.1, Source::Human, "x"), Error);
  EXPECT_THROW(Trajectory({at(0)}, 0.0, Source::Human, "x"), Error);
  EXPECT_THROW(Trajectory({at(0)}, INFINITY, Source::Human, "x"), Error);
  try {
    Trajectory({at(0, 1), at(1, 2)}, 0.1, Source::Human, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(FeatureSequence, Invariants) {
  EXPECT_THROW(FeatureSequence(Eigen::MatrixXd(0, 3), "x"), Error);
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = NAN;
  EXPECT_THROW(FeatureSequence(m, "x"), Error);
}

TEST(ComputeGamma, Examples) {
  const std::vector<double> h{1, 3}, r{4, 4};
  EXPECT_DOUBLE_EQ(compute_gamma(h, r), 2.0);
  const std::vector<double> same{2.0, 5.0};
  EXPECT_DOUBLE_EQ(compute_gamma(same, same), 1.0);
}

TEST(ComputeGamma, ReportedTeleopDurations) {
  const std::vector<double> h{2.66}, r{8.33};
  EXPECT_NEAR(compute_gamma(h, r), 3.13, 0.005);
}

TEST(ComputeGamma, Errors) {
  const std::vector<double> empty, ok{1.0}, bad{1.0, 0.0};
  EXPECT_THROW(compute_gamma(empty, ok), Error);
  EXPECT_THROW(compute_gamma(ok, bad), Error);
}

TEST(Subsample, Indices) {
  const Trajectory t = line_traj(10);
  const Trajectory s = subsample(t, 2.0, 4);
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(s[i].translation.x(), 2.0 * static_cast<double>(i));
  EXPECT_DOUBLE_EQ(s.dt(), 0.2);
}

TEST(Subsample, IdentityAtGammaOne) {
  const Trajectory t = line_traj(7);
  const Trajectory s = subsample(t, 1.0, 7);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(s[i].translation, t[i].translation);
}

TEST(Subsample, FullDemoWithTableWindow) {
  // A 100-frame demo with a 100-frame window over k = 32 steps.
  const Trajectory t = line_traj(100);
  const double gamma = 100.0 / 32.0;
  const Trajectory s = subsample(t, gamma, 32);
  ASSERT_EQ(s.size(), 32u);
  EXPECT_EQ(s[0].translation.x(), 0.0);
  EXPECT_EQ(s[31].translation.x(), std::round(31 * gamma));
  EXPECT_GE(s[31].translation.x(), 96.0);
}

TEST(Subsample, OutOfRange) {
  try {
    subsample(line_traj(5), 2.0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
}

TEST(Upsample, GammaOneIsIdentity) {
  Rng rng(1);
  std::vector<ActionFrame> a;
  for (int i = 0; i < 5; ++i) a.push_back(testutil::random_frame(rng, 2));
  const auto u = upsample(a, 1.0);
  ASSERT_EQ(u.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(u[i].translation, a[i].translation);
    EXPECT_EQ(u[i].orientation.coeffs(), a[i].orientation.coeffs());
    EXPECT_EQ(u[i].joints, a[i].joints);
  }
}

TEST(Upsample, TwoFramesDoubled) {
  const ActionFrame a(Eigen::Vector3d(0, 0, 0), Eigen::Quaterniond::Identity(), Eigen::VectorXd::Constant(1, 0.0));
  const ActionFrame b(Eigen::Vector3d(2, 4, 6), axis_angle(Eigen::Vector3d::UnitZ(), 1.0),
                      Eigen::VectorXd::Constant(1, 1.0));
  const std::vector<ActionFrame> in{a, b};
  const auto u = upsample(in, 2.0);
  ASSERT_EQ(u.size(), 4u);
  EXPECT_EQ(u[0].translation, a.translation);
  EXPECT_TRUE(u[1].translation.isApprox(Eigen::Vector3d(1, 2, 3), 1e-15));
  EXPECT_NEAR(u[1].joints[0], 0.5, 1e-15);
  EXPECT_NEAR(rot_distance(u[1].orientation, axis_angle(Eigen::Vector3d::UnitZ(), 0.5)), 0.0, 1e-12);
  EXPECT_EQ(u[2].translation, b.translation);
  EXPECT_EQ(u[3].translation, b.translation);
}

TEST(Upsample, MatchesDenseInterpolantOracle) {
  Rng rng(7);
  std::vector<ActionFrame> a;
  for (int i = 0; i < 5; ++i) a.push_back(testutil::random_frame(rng, 3));
  const double gamma = 3.0;
  const auto u = upsample(a, gamma);
  ASSERT_EQ(u.size(), 15u);
  for (std::size_t m = 0; m < u.size(); ++m) {
    // Oracle: the piecewise interpolant evaluated at time m / gamma.
    const double pos = std::min(static_cast<double>(m) / gamma, 4.0);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), 3);
    const double w = pos - static_cast<double>(i);
    const Eigen::Vector3d t = (1 - w) * a[i].translation + w * a[i + 1].translation;
    const Eigen::VectorXd j = (1 - w) * a[i].joints + w * a[i + 1].joints;
    Eigen::Quaterniond qb = a[i + 1].orientation;
    if (a[i].orientation.dot(qb) < 0) qb.coeffs() = -qb.coeffs();
    const double theta = std::acos(std::clamp(a[i].orientation.dot(qb), -1.0, 1.0));
    Eigen::Vector4d qv = a[i].orientation.coeffs();
    if (theta > 1e-9) {
      qv = (std::sin((1 - w) * theta) * a[i].orientation.coeffs() + std::sin(w * theta) * qb.coeffs()) / std::sin(theta);
    }
    const Eigen::Quaterniond q(qv[3], qv[0], qv[1], qv[2]);
    EXPECT_LT((u[m].translation - t).norm(), 1e-9);
    EXPECT_LT((u[m].joints - j).norm(), 1e-9);
    EXPECT_LT(rot_distance(u[m].orientation, q.normalized()), 1e-9);
  }
}

TEST(Upsample, SubsampleThenUpsampleKeepsAnchors) {
  Rng rng(3);
  const Trajectory t = testutil::random_traj(rng, 40, 2, "d");
  const double gamma = 3.0;
  const Trajectory s = subsample(t, gamma, 12);
  const auto u = upsample(s.frames(), gamma);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t m = static_cast<std::size_t>(std::round(static_cast<double>(i) * gamma));
    EXPECT_EQ(u[m].translation, t[m].translation);
    EXPECT_EQ(u[m].orientation.coeffs(), t[m].orientation.coeffs());
    EXPECT_EQ(u[m].joints, t[m].joints);
  }
}

TEST(Upsample, Errors) {
  const std::vector<ActionFrame> one{at(0)};
  EXPECT_THROW(upsample(one, 2.0), Error);
  const std::vector<ActionFrame> two{at(0), at(1)};
  EXPECT_THROW(upsample(two, 0.5), Error);
}

TEST(LowPass, Examples) {
  Eigen::MatrixXd step(3, 1);
  step << 0, 1, 1;
  const Eigen::MatrixXd y = low_pass(step, 0.2);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.0);
  EXPECT_NEAR(y(1, 0), 0.2, 1e-15);
  EXPECT_NEAR(y(2, 0), 0.36, 1e-15);

  const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(5, 2, 0.7);
  EXPECT_EQ(low_pass(c, 0.2), c);
  EXPECT_EQ(low_pass(step, 1.0), step);
}

TEST(LowPass, BoundedByInputRange) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  Eigen::MatrixXd x(50, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const Eigen::MatrixXd y = low_pass(x, 0.2);
  for (Eigen::Index c = 0; c < 3; ++c) {
    EXPECT_LE(y.col(c).maxCoeff(), x.col(c).maxCoeff() + 1e-12);
    EXPECT_GE(y.col(c).minCoeff(), x.col(c).minCoeff() - 1e-12);
  }
}

TEST(LowPass, RejectsBadSmoothing) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(low_pass(x, 0.0), Error);
  EXPECT_THROW(low_pass(x, 1.5), Error);
}

TEST(TemporalEnsemble, SingleCoverUnchanged) {
  Rng rng(2);
  Prediction p{3, {testutil::random_frame(rng, 2), testutil::random_frame(rng, 2)}};
  const std::vector<Prediction> ps{p};
  const ActionFrame f = temporal_ensemble(ps, 4);
  EXPECT_EQ(f.translation, p.actions[1].translation);
  EXPECT_EQ(f.orientation.coeffs(), p.actions[1].orientation.coeffs());
}

TEST(TemporalEnsemble, IdenticalPredictions) {
  Rng rng(4);
  const ActionFrame a = testutil::random_frame(rng, 1);
  const std::vector<Prediction> ps{{0, {a, a, a}}, {1, {a, a}}};
  const ActionFrame f = temporal_ensemble(ps, 1);
  EXPECT_LT((f.translation - a.translation).norm(), 1e-12);
  EXPECT_LT(rot_distance(f.orientation, a.orientation), 1e-7);
}

TEST(TemporalEnsemble, DecayWeightsFormula) {
  const int k = 8;
  const double decay = 0.1;
  // Value 1 comes from a prediction issued k steps earlier; value 0 is fresh.
  std::vector<ActionFrame> old_chunk(k + 1, at(1.0));
  const std::vector<Prediction> ps{{10, {at(0.0)}}, {10 - k, old_chunk}};
  const ActionFrame f = temporal_ensemble(ps, 10, decay);
  const double w = std::exp(-decay * k);
  EXPECT_NEAR(f.translation.x(), (0.0 * 1.0 + 1.0 * w) / (1.0 + w), 1e-14);
}

TEST(TemporalEnsemble, ConvexHullOfTranslations) {
  Rng rng(8);
  std::vector<Prediction> ps;
  for (int s = 0; s < 5; ++s) {
    std::vector<ActionFrame> chunk;
    for (int i = 0; i < 6; ++i) chunk.push_back(testutil::random_frame(rng, 0));
    ps.push_back({s, chunk});
  }
  const ActionFrame f = temporal_ensemble(ps, 5);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : ps) {
    const double v = p.actions[static_cast<std::size_t>(5 - p.start_step)].translation.x();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(f.translation.x(), lo - 1e-12);
  EXPECT_LE(f.translation.x(), hi + 1e-12);
  EXPECT_NEAR(f.orientation.norm(), 1.0, 1e-12);
}

TEST(TemporalEnsemble, NotCovered) {
  const std::vector<Prediction> ps{{0, {at(0), at(1)}}};
  try {
    temporal_ensemble(ps, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCovered);
  }
  EXPECT_THROW(temporal_ensemble(ps, -1), Error);
}
