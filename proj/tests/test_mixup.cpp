#include <gtest/gtest.h>

#include <map>

#include "h2r/alignment.hpp"
#include "h2r/mixup.hpp"
#include "h2r/synth.hpp"
#include "test_util.hpp"

using namespace h2r;
using testutil::Rng;

namespace {

TrainingSample random_sample(Rng& rng, const ConditionLayout& layout, Eigen::Index k, Eigen::Index dim) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd c(static_cast<Eigen::Index>(layout.flat_dim()));
  for (auto& v : c) v = u(rng);
  Eigen::MatrixXd a(k, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  return {Condition(layout, c), a, 0.0, {}};
}

struct Fixture {
  synth::DemoSetData demos;
  MappingTable mapping;
};

Fixture fixture(std::uint64_t seed = 9) {
  Fixture f;
  f.demos = synth::demo_set({}, seed);
  std::vector<Trajectory> h, r;
  for (const auto& d : f.demos.humans) h.push_back(d.traj);
  for (const auto& d : f.demos.robots) r.push_back(d.traj);
  f.mapping = build_mapping<Trajectory>(h, r, ActionMetric{});
  return f;
}

}  // namespace

TEST(Condition, LayoutAndBlocks) {
  const ConditionLayout layout{2, 4, 2, 3};
  EXPECT_EQ(layout.flat_dim(), 18u);
  Eigen::MatrixXd agent(2, 4), wrist(2, 2), prop(2, 3);
  agent << 1, 2, 3, 4, 5, 6, 7, 8;
  wrist << 9, 10, 11, 12;
  prop << 13, 14, 15, 16, 17, 18;
  const Condition c = Condition::from_blocks(agent, wrist, prop);
  EXPECT_EQ(c.layout(), layout);
  Eigen::VectorXd expect(18);
  expect << 1, 2, 3, 4, 9, 10, 13, 14, 15, 5, 6, 7, 8, 11, 12, 16, 17, 18;
  EXPECT_EQ(c.flattened(), expect);
  EXPECT_EQ(c.agent(), agent);
  EXPECT_EQ(c.wrist(), wrist);
  EXPECT_EQ(c.proprio(), prop);
  EXPECT_THROW(Condition(layout, Eigen::VectorXd::Zero(17)), Error);
}

TEST(AssembleCondition, RobotAndHuman) {
  const auto f = fixture();
  const Demo& r = f.demos.robots[0];
  const Condition c = assemble_condition(r, 5, 2, Source::Robot, 4);
  EXPECT_EQ(c.agent().row(0), r.agent.rows().row(4));
  EXPECT_EQ(c.agent().row(1), r.agent.rows().row(5));
  EXPECT_EQ(c.wrist().row(1), r.wrist->rows().row(5));
  EXPECT_EQ(c.proprio().row(1), r.traj[5].to_vector().transpose());

  const Demo& h = f.demos.humans[1];
  const Condition ch = assemble_condition(h, 3, 2, Source::Human, 4);
  EXPECT_TRUE(ch.wrist().isZero(0));
  EXPECT_EQ(ch.layout(), c.layout());
  EXPECT_EQ(ch.proprio().row(0), h.traj[2].to_vector().transpose());

  try {
    assemble_condition(h, 0, 2, Source::Human, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientHistory);
  }
  EXPECT_THROW(assemble_condition(h, 0, 2, Source::Robot, 4), Error);
}

TEST(ActionChunk, EdgePadded) {
  Rng rng(61);
  const Trajectory t = testutil::random_traj(rng, 5, 1, "x");
  const Eigen::MatrixXd c = action_chunk(t, 3, 4);
  ASSERT_EQ(c.rows(), 4);
  ASSERT_EQ(c.cols(), 8);
  EXPECT_EQ(c.row(0), t[3].to_vector().transpose());
  EXPECT_EQ(c.row(1), t[4].to_vector().transpose());
  EXPECT_EQ(c.row(3), t[4].to_vector().transpose());
  EXPECT_THROW(action_chunk(t, 5, 2), Error);
}

TEST(AlphaSchedule, LinearAnneal) {
  const AlphaSchedule s = LinearAnneal{300, 0.0};
  EXPECT_EQ(alpha_at(s, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(alpha_at(s, 150, 1), 0.5);
  EXPECT_EQ(alpha_at(s, 300, 1), 0.0);
  EXPECT_EQ(alpha_at(s, 450, 1), 0.0);
  EXPECT_DOUBLE_EQ(alpha_at(AlphaSchedule(LinearAnneal{100, 0.2}), 90, 1), 0.2);
  EXPECT_THROW(validate(AlphaSchedule(LinearAnneal{0, 0.0})), Error);
}

TEST(AlphaSchedule, BetaMoments) {
  const AlphaSchedule s = BetaDist{1.0, 1.0};
  std::mt19937_64 rng(62);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = alpha_at(s, 0, rng);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
    sum += a;
    sq += a * a;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0 / 12.0, 0.005);

  const AlphaSchedule skew = BetaDist{2.0, 5.0};
  sum = 0.0;
  for (int i = 0; i < n; ++i) sum += alpha_at(skew, 0, rng);
  EXPECT_NEAR(sum / n, 2.0 / 7.0, 0.01);
  EXPECT_THROW(validate(AlphaSchedule(BetaDist{0.0, 1.0})), Error);
}

TEST(Mix, EndpointsExactAndLinear) {
  Rng rng(63);
  const ConditionLayout layout{2, 3, 2, 4};
  const TrainingSample h = random_sample(rng, layout, 5, 4);
  const TrainingSample r = random_sample(rng, layout, 5, 4);
  const TrainingSample m1 = mix(h, r, 1.0);
  EXPECT_EQ(m1.condition, h.condition);
  EXPECT_EQ(m1.actions, h.actions);
  const TrainingSample m0 = mix(h, r, 0.0);
  EXPECT_EQ(m0.condition, r.condition);
  EXPECT_EQ(m0.actions, r.actions);
  const TrainingSample mh = mix(h, r, 0.25);
  EXPECT_LT((mh.condition.flattened() - (0.25 * h.condition.flattened() + 0.75 * r.condition.flattened())).norm(), 1e-15);
  EXPECT_LT((mh.actions - (0.25 * h.actions + 0.75 * r.actions)).norm(), 1e-15);
  EXPECT_EQ(mh.domain_alpha, 0.25);
  EXPECT_THROW(mix(h, r, 1.5), Error);
  const TrainingSample other = random_sample(rng, ConditionLayout{2, 3, 2, 5}, 5, 4);
  EXPECT_THROW(mix(h, other, 0.5), Error);
}

TEST(EmitBatches, CompositionAndMixOracle) {
  const auto f = fixture();
  BatchConfig cfg;
  cfg.batch_size = 16;
  cfg.k = 8;
  cfg.seed = 5;
  cfg.schedule = BetaDist{1.0, 1.0};
  const auto batches = emit_batches(f.demos.humans, f.demos.robots, f.mapping, cfg, 0);
  std::size_t eligible = 0;
  for (const auto& d : f.demos.humans) {
    for (std::size_t t = 1; t < d.traj.size(); ++t) {
      const auto& refs = f.mapping.at(d.id(), t);
      eligible += std::any_of(refs.begin(), refs.end(), [](const RobotRef& r) { return r.t_prime >= 1; }) ? 1 : 0;
    }
  }
  EXPECT_EQ(batches.size(), (eligible + 7) / 8);

  std::map<std::string, const Demo*> humans, robots;
  for (const auto& d : f.demos.humans) humans[d.id()] = &d;
  for (const auto& d : f.demos.robots) robots[d.id()] = &d;
  std::map<std::pair<std::string, std::size_t>, int> visits;
  for (const auto& batch : batches) {
    ASSERT_EQ(batch.size(), 16u);
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_EQ(batch[i].domain_alpha, 0.0);
      ASSERT_TRUE(batch[i].provenance.robot.has_value());
      EXPECT_FALSE(batch[i].provenance.human.has_value());
    }
    for (std::size_t i = 8; i < 16; ++i) {
      const auto& s = batch[i];
      ASSERT_TRUE(s.provenance.human && s.provenance.robot);
      const auto& [hid, t] = *s.provenance.human;
      const auto& ref = *s.provenance.robot;
      ++visits[{hid, t}];
      // The pair must come from the mapping table.
      const auto& refs = f.mapping.at(hid, t);
      EXPECT_NE(std::find(refs.begin(), refs.end(), ref), refs.end());
      EXPECT_GE(ref.t_prime + 1, cfg.tau);
      // Recompute the mixed sample from its provenance.
      const Demo& hd = *humans.at(hid);
      const Demo& rd = *robots.at(ref.robot_demo);
      const Eigen::VectorXd hc = assemble_condition(hd, t, cfg.tau, Source::Human, 4).flattened();
      const Eigen::VectorXd rc = assemble_condition(rd, ref.t_prime, cfg.tau, Source::Robot, 4).flattened();
      const double a = s.domain_alpha;
      EXPECT_LT((s.condition.flattened() - (a * hc + (1 - a) * rc)).lpNorm<Eigen::Infinity>(), 1e-12);
      const Eigen::MatrixXd ha = action_chunk(hd.traj, t, cfg.k), ra = action_chunk(rd.traj, ref.t_prime, cfg.k);
      EXPECT_LT((s.actions - (a * ha + (1 - a) * ra)).lpNorm<Eigen::Infinity>(), 1e-12);
    }
  }
  // Every eligible human timestep appears; only wrap-around fill repeats.
  EXPECT_EQ(visits.size(), eligible);
  int total = 0;
  for (const auto& [k, v] : visits) total += v;
  EXPECT_EQ(static_cast<std::size_t>(total), batches.size() * 8);
}

TEST(EmitBatches, DeterministicPerEpoch) {
  const auto f = fixture();
  BatchConfig cfg;
  cfg.batch_size = 8;
  cfg.k = 4;
  cfg.seed = 11;
  const auto a = emit_batches(f.demos.humans, f.demos.robots, f.mapping, cfg, 3);
  const auto b = emit_batches(f.demos.humans, f.demos.robots, f.mapping, cfg, 3);
  const auto c = emit_batches(f.demos.humans, f.demos.robots, f.mapping, cfg, 4);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      EXPECT_EQ(a[i][j].condition, b[i][j].condition);
      EXPECT_EQ(a[i][j].actions, b[i][j].actions);
      EXPECT_EQ(a[i][j].domain_alpha, b[i][j].domain_alpha);
      differs = differs || !(a[i][j].condition == c[i][j].condition);
    }
  }
  EXPECT_TRUE(differs);
  // Linear schedule: epoch 3 of 300 gives alpha 0.99 for every mixed sample.
  for (const auto& batch : a) {
    for (std::size_t j = 4; j < 8; ++j) EXPECT_DOUBLE_EQ(batch[j].domain_alpha, 0.99);
  }
}

TEST(EmitBatches, RandomModeIgnoresMapping) {
  const auto f = fixture();
  BatchConfig cfg;
  cfg.batch_size = 8;
  cfg.k = 4;
  cfg.mapping_mode = MappingMode::Random;
  const auto batches = emit_batches(f.demos.humans, f.demos.robots, MappingTable{}, cfg, 0);
  EXPECT_FALSE(batches.empty());
}

TEST(EmitBatches, Validation) {
  const auto f = fixture();
  BatchConfig cfg;
  cfg.batch_size = 7;
  EXPECT_THROW(emit_batches(f.demos.humans, f.demos.robots, f.mapping, cfg, 0), Error);
  cfg.batch_size = 8;
  try {
    emit_batches(f.demos.humans, f.demos.robots, MappingTable{}, cfg, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnmappedTimestep);
  }
}

TEST(EmitBatches, DefaultBatchIsHalfRobotHalfMixed) {
  const auto f = fixture();
  BatchConfig cfg;
  cfg.k = 4;
  const auto batches = emit_batches(f.demos.humans, f.demos.robots, f.mapping, cfg, 0);
  ASSERT_FALSE(batches.empty());
  std::size_t robot = 0, mixed = 0;
  for (const auto& s : batches[0]) (s.provenance.human ? mixed : robot)++;
  EXPECT_EQ(robot, 64u);
  EXPECT_EQ(mixed, 64u);
}
