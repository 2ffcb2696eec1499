#ifndef H2R_MIXUP_HPP
#define H2R_MIXUP_HPP

// Observation conditions, mapping-guided MixUp and equal-proportion
// co-training batch emission.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "h2r/alignment.hpp"
#include "h2r/core.hpp"
#include "h2r/error.hpp"

namespace h2r {

struct ConditionLayout {
  std::size_t tau = 2;
  std::size_t d_agent = 0;
  std::size_t d_wrist = 0;
  std::size_t d_proprio = 0;

  std::size_t step_dim() const { return d_agent + d_wrist + d_proprio; }
  std::size_t flat_dim() const { return tau * step_dim(); }
  friend bool operator==(const ConditionLayout&, const ConditionLayout&) = default;
};

/// Observation history. Stored flattened as, per timestep (oldest first),
/// [agent | wrist | proprio].
class Condition {
 public:
  Condition(const ConditionLayout& layout, Eigen::VectorXd flat) : layout_(layout), flat_(std::move(flat)) {
    H2R_REQUIRE(static_cast<std::size_t>(flat_.size()) == layout_.flat_dim(), ErrorKind::DimensionMismatch,
                "flattened condition length does not match its layout");
  }

  static Condition from_blocks(const Eigen::MatrixXd& agent, const Eigen::MatrixXd& wrist,
                               const Eigen::MatrixXd& proprio) {
    H2R_REQUIRE(agent.rows() == wrist.rows() && agent.rows() == proprio.rows(), ErrorKind::DimensionMismatch,
                "condition blocks must share the history length");
    const ConditionLayout layout{static_cast<std::size_t>(agent.rows()), static_cast<std::size_t>(agent.cols()),
                                 static_cast<std::size_t>(wrist.cols()), static_cast<std::size_t>(proprio.cols())};
    Eigen::VectorXd flat(static_cast<Eigen::Index>(layout.flat_dim()));
    Eigen::Index o = 0;
    for (Eigen::Index s = 0; s < agent.rows(); ++s) {
      flat.segment(o, agent.cols()) = agent.row(s).transpose();
      o += agent.cols();
      flat.segment(o, wrist.cols()) = wrist.row(s).transpose();
      o += wrist.cols();
      flat.segment(o, proprio.cols()) = proprio.row(s).transpose();
      o += proprio.cols();
    }
    return Condition(layout, std::move(flat));
  }

  const ConditionLayout& layout() const { return layout_; }
  const Eigen::VectorXd& flattened() const { return flat_; }

  Eigen::MatrixXd agent() const { return block(0, layout_.d_agent); }
  Eigen::MatrixXd wrist() const { return block(layout_.d_agent, layout_.d_wrist); }
  Eigen::MatrixXd proprio() const { return block(layout_.d_agent + layout_.d_wrist, layout_.d_proprio); }

  friend bool operator==(const Condition& a, const Condition& b) {
    return a.layout_ == b.layout_ && a.flat_ == b.flat_;
  }

 private:
  Eigen::MatrixXd block(std::size_t offset, std::size_t width) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(layout_.tau), static_cast<Eigen::Index>(width));
    for (std::size_t s = 0; s < layout_.tau; ++s) {
      out.row(static_cast<Eigen::Index>(s)) =
          flat_.segment(static_cast<Eigen::Index>(s * layout_.step_dim() + offset), static_cast<Eigen::Index>(width))
              .transpose();
    }
    return out;
  }

  ConditionLayout layout_;
  Eigen::VectorXd flat_;
};

/// Where a sample came from; mixed samples carry both sides.
struct Provenance {
  std::optional<std::pair<std::string, std::size_t>> human;
  std::optional<RobotRef> robot;
};

struct TrainingSample {
  Condition condition;
  Eigen::MatrixXd actions;  // k x action_dim
  double domain_alpha = 0.0;  // 1 = pure human, 0 = pure robot
  Provenance provenance;
};

/// A demonstration with its per-frame features. For human demos the
/// trajectory holds retargeted actions and `wrist` is absent.
struct Demo {
  Trajectory traj;
  FeatureSequence agent;
  std::optional<FeatureSequence> wrist;

  const std::string& id() const { return traj.demo_id(); }
};

/// Stacks history rows [t - tau + 1, t]. Robot conditions use agent and
/// wrist features with proprioception from the trajectory; human conditions
/// use agent features, a zero wrist block of width `wrist_dim`, and the
/// retargeted actions as proprioception.
inline Condition assemble_condition(const Demo& demo, std::size_t t, std::size_t tau, Source source,
                                    std::size_t wrist_dim) {
  H2R_REQUIRE(tau >= 1, ErrorKind::InvalidInput, "history length must be positive");
  H2R_REQUIRE(t + 1 >= tau, ErrorKind::InsufficientHistory,
              "timestep " + std::to_string(t) + " has fewer than " + std::to_string(tau) + " frames of history");
  H2R_REQUIRE(t < demo.traj.size(), ErrorKind::OutOfRange, "timestep beyond trajectory end");
  H2R_REQUIRE(demo.agent.size() == demo.traj.size(), ErrorKind::DimensionMismatch,
              "agent features and trajectory differ in length");
  const auto ti = static_cast<Eigen::Index>(tau);
  const auto first = static_cast<Eigen::Index>(t + 1 - tau);
  const Eigen::MatrixXd agent = demo.agent.rows().middleRows(first, ti);
  Eigen::MatrixXd wrist;
  if (source == Source::Robot) {
    H2R_REQUIRE(demo.wrist.has_value(), ErrorKind::InvalidInput, "robot demo '" + demo.id() + "' has no wrist features");
    H2R_REQUIRE(demo.wrist->size() == demo.traj.size(), ErrorKind::DimensionMismatch,
                "wrist features and trajectory differ in length");
    H2R_REQUIRE(demo.wrist->dim() == wrist_dim, ErrorKind::DimensionMismatch, "wrist feature width mismatch");
    wrist = demo.wrist->rows().middleRows(first, ti);
  } else {
    wrist = Eigen::MatrixXd::Zero(ti, static_cast<Eigen::Index>(wrist_dim));
  }
  const std::size_t dp = ActionFrame::vector_dim(demo.traj.joint_dim());
  Eigen::MatrixXd proprio(ti, static_cast<Eigen::Index>(dp));
  for (Eigen::Index s = 0; s < ti; ++s) {
    proprio.row(s) = demo.traj[static_cast<std::size_t>(first + s)].to_vector().transpose();
  }
  return Condition::from_blocks(agent, wrist, proprio);
}

/// Action vectors for steps t .. t+k-1; steps past the end repeat the last frame.
inline Eigen::MatrixXd action_chunk(const Trajectory& traj, std::size_t t, std::size_t k) {
  H2R_REQUIRE(t < traj.size(), ErrorKind::OutOfRange, "timestep beyond trajectory end");
  const std::size_t dim = ActionFrame::vector_dim(traj.joint_dim());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < k; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = traj[std::min(t + i, traj.size() - 1)].to_vector().transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpolation coefficient schedules

struct LinearAnneal {
  int epochs_to_zero = 300;
  double alpha_min = 0.0;
};

struct BetaDist {
  double a = 1.0;
  double b = 1.0;
};

using AlphaSchedule = std::variant<LinearAnneal, BetaDist>;

inline void validate(const AlphaSchedule& s) {
  if (const auto* lin = std::get_if<LinearAnneal>(&s)) {
    H2R_REQUIRE(lin->epochs_to_zero > 0, ErrorKind::InvalidInput, "epochs_to_zero must be positive");
    H2R_REQUIRE(lin->alpha_min >= 0.0 && lin->alpha_min <= 1.0, ErrorKind::InvalidInput, "alpha_min must lie in [0, 1]");
  } else {
    const auto& beta = std::get<BetaDist>(s);
    H2R_REQUIRE(std::isfinite(beta.a) && std::isfinite(beta.b) && beta.a > 0.0 && beta.b > 0.0,
                ErrorKind::InvalidInput, "beta parameters must be positive");
  }
}

/// LinearAnneal: max(alpha_min, 1 - epoch / epochs_to_zero), no randomness.
/// BetaDist: one Beta(a, b) draw from `rng`, as X / (X + Y) with gamma
/// variates X ~ G(a), Y ~ G(b).
template <typename Rng>
double alpha_at(const AlphaSchedule& schedule, int epoch, Rng& rng) {
  H2R_REQUIRE(epoch >= 0, ErrorKind::InvalidInput, "epoch must be non-negative");
  if (const auto* lin = std::get_if<LinearAnneal>(&schedule)) {
    return std::max(lin->alpha_min, 1.0 - static_cast<double>(epoch) / static_cast<double>(lin->epochs_to_zero));
  }
  const auto& beta = std::get<BetaDist>(schedule);
  std::gamma_distribution<double> ga(beta.a, 1.0);
  std::gamma_distribution<double> gb(beta.b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return (x + y) > 0.0 ? x / (x + y) : 0.5;
}

inline double alpha_at(const AlphaSchedule& schedule, int epoch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return alpha_at(schedule, epoch, rng);
}

/// alpha * human + (1 - alpha) * robot over the flattened condition and the
/// action chunk. alpha == 1 and alpha == 0 return exact copies.
inline TrainingSample mix(const TrainingSample& human, const TrainingSample& robot, double alpha) {
  H2R_REQUIRE(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, ErrorKind::InvalidInput, "alpha must lie in [0, 1]");
  H2R_REQUIRE(human.condition.layout() == robot.condition.layout(), ErrorKind::DimensionMismatch,
              "condition layouts differ");
  H2R_REQUIRE(human.actions.rows() == robot.actions.rows() && human.actions.cols() == robot.actions.cols(),
              ErrorKind::DimensionMismatch, "action chunks differ in shape");
  Provenance prov{human.provenance.human, robot.provenance.robot};
  if (alpha == 1.0) return {human.condition, human.actions, 1.0, prov};
  if (alpha == 0.0) return {robot.condition, robot.actions, 0.0, prov};
  Eigen::VectorXd flat = alpha * human.condition.flattened() + (1.0 - alpha) * robot.condition.flattened();
  Eigen::MatrixXd actions = alpha * human.actions + (1.0 - alpha) * robot.actions;
  return {Condition(human.condition.layout(), std::move(flat)), std::move(actions), alpha, prov};
}

// ---------------------------------------------------------------------------
// Batch emission

enum class MappingMode { Table, Random };

struct BatchConfig {
  std::size_t batch_size = 128;
  std::size_t tau = 2;
  std::size_t k = 32;
  std::uint64_t seed = 0;
  AlphaSchedule schedule = LinearAnneal{};
  MappingMode mapping_mode = MappingMode::Table;

  void validate() const {
    H2R_REQUIRE(batch_size >= 2 && batch_size % 2 == 0, ErrorKind::InvalidInput, "batch size must be even and >= 2");
    H2R_REQUIRE(tau >= 1 && k >= 1, ErrorKind::InvalidInput, "tau and k must be positive");
    h2r::validate(schedule);
  }
};

using Batch = std::vector<TrainingSample>;

/// Shapes shared by every sample produced from a demo set.
inline ConditionLayout dataset_layout(std::span<const Demo> humans, std::span<const Demo> robots, std::size_t tau) {
  H2R_REQUIRE(!humans.empty() && !robots.empty(), ErrorKind::InvalidInput, "demo sets must be non-empty");
  H2R_REQUIRE(robots.front().wrist.has_value(), ErrorKind::InvalidInput, "robot demos need wrist features");
  ConditionLayout layout{tau, robots.front().agent.dim(), robots.front().wrist->dim(),
                         ActionFrame::vector_dim(robots.front().traj.joint_dim())};
  for (const auto& d : humans) {
    H2R_REQUIRE(d.agent.dim() == layout.d_agent, ErrorKind::DimensionMismatch, "agent feature widths differ");
    H2R_REQUIRE(ActionFrame::vector_dim(d.traj.joint_dim()) == layout.d_proprio, ErrorKind::DimensionMismatch,
                "action dimensions differ between demos");
  }
  for (const auto& d : robots) {
    H2R_REQUIRE(d.agent.dim() == layout.d_agent, ErrorKind::DimensionMismatch, "agent feature widths differ");
    H2R_REQUIRE(ActionFrame::vector_dim(d.traj.joint_dim()) == layout.d_proprio, ErrorKind::DimensionMismatch,
                "action dimensions differ between demos");
  }
  return layout;
}

/// One epoch of co-training batches. Each batch holds batch_size/2 raw robot
/// samples followed by batch_size/2 mixed samples. Every eligible human
/// timestep (t >= tau - 1) is visited once per epoch in shuffled order; the
/// last batch wraps around to stay full. The paired robot timestep is drawn
/// uniformly from the mapped timesteps that have a full history (Table mode)
/// or from all robot timesteps (Random mode). Output depends only on
/// (inputs, cfg, epoch).
inline std::vector<Batch> emit_batches(std::span<const Demo> humans, std::span<const Demo> robots,
                                       const MappingTable& mapping, const BatchConfig& cfg, int epoch) {
  cfg.validate();
  H2R_REQUIRE(epoch >= 0, ErrorKind::InvalidInput, "epoch must be non-negative");
  const ConditionLayout layout = dataset_layout(humans, robots, cfg.tau);

  std::map<std::string, std::size_t> robot_index;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    H2R_REQUIRE(robot_index.emplace(robots[i].id(), i).second, ErrorKind::InvalidInput,
                "duplicate robot demo id '" + robots[i].id() + "'");
  }

  struct HumanDraw {
    std::size_t demo;
    std::size_t t;
    std::vector<RobotRef> eligible;
  };
  std::vector<HumanDraw> pool;
  for (std::size_t h = 0; h < humans.size(); ++h) {
    for (std::size_t t = cfg.tau - 1; t < humans[h].traj.size(); ++t) {
      HumanDraw draw{h, t, {}};
      if (cfg.mapping_mode == MappingMode::Table) {
        for (const auto& ref : mapping.at(humans[h].id(), t)) {
          auto it = robot_index.find(ref.robot_demo);
          H2R_REQUIRE(it != robot_index.end(), ErrorKind::InvalidInput,
                      "mapping references unknown robot demo '" + ref.robot_demo + "'");
          H2R_REQUIRE(ref.t_prime < robots[it->second].traj.size(), ErrorKind::OutOfRange,
                      "mapping references a robot timestep beyond the demo");
          if (ref.t_prime + 1 >= cfg.tau) draw.eligible.push_back(ref);
        }
        if (draw.eligible.empty()) continue;
      }
      pool.push_back(std::move(draw));
    }
  }
  std::vector<RobotRef> robot_pool;
  for (const auto& r : robots) {
    for (std::size_t t = cfg.tau - 1; t < r.traj.size(); ++t) robot_pool.push_back({r.id(), t});
  }
  H2R_REQUIRE(!pool.empty(), ErrorKind::InvalidInput, "no human timestep has a usable mapping");
  H2R_REQUIRE(!robot_pool.empty(), ErrorKind::InvalidInput, "robot demos are shorter than the history length");

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  std::mt19937_64 rng(seq);
  std::shuffle(pool.begin(), pool.end(), rng);

  auto robot_sample = [&](const RobotRef& ref) {
    const Demo& d = robots[robot_index.at(ref.robot_demo)];
    return TrainingSample{assemble_condition(d, ref.t_prime, cfg.tau, Source::Robot, layout.d_wrist),
                          action_chunk(d.traj, ref.t_prime, cfg.k), 0.0, Provenance{std::nullopt, ref}};
  };

  const std::size_t half = cfg.batch_size / 2;
  const std::size_t n_batches = (pool.size() + half - 1) / half;
  std::vector<Batch> batches;
  batches.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    Batch batch;
    batch.reserve(cfg.batch_size);
    for (std::size_t s = 0; s < half; ++s) {
      std::uniform_int_distribution<std::size_t> pick(0, robot_pool.size() - 1);
      batch.push_back(robot_sample(robot_pool[pick(rng)]));
    }
    for (std::size_t s = 0; s < half; ++s) {
      const HumanDraw& draw = pool[(b * half + s) % pool.size()];
      const Demo& hd = humans[draw.demo];
      RobotRef ref;
      if (cfg.mapping_mode == MappingMode::Table) {
        std::uniform_int_distribution<std::size_t> pick(0, draw.eligible.size() - 1);
        ref = draw.eligible[pick(rng)];
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, robot_pool.size() - 1);
        ref = robot_pool[pick(rng)];
      }
      const double alpha = alpha_at(cfg.schedule, epoch, rng);
      TrainingSample human{assemble_condition(hd, draw.t, cfg.tau, Source::Human, layout.d_wrist),
                           action_chunk(hd.traj, draw.t, cfg.k), 1.0,
                           Provenance{std::make_pair(hd.id(), draw.t), std::nullopt}};
      batch.push_back(mix(human, robot_sample(ref), alpha));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace h2r

#endif  // H2R_MIXUP_HPP
