// h2r: command-line front end over the library.
//
// Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
// Option precedence: command-line flags > --config JSON file > built-in defaults.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "h2r/alignment.hpp"
#include "h2r/core.hpp"
#include "h2r/distance.hpp"
#include "h2r/geometry.hpp"
#include "h2r/io/batch_io.hpp"
#include "h2r/io/formats.hpp"
#include "h2r/io/trajectory_io.hpp"
#include "h2r/metrics.hpp"
#include "h2r/mixup.hpp"
#include "h2r/retarget.hpp"
#include "h2r/retrieval.hpp"
#include "h2r/synth.hpp"

namespace fs = std::filesystem;
using namespace h2r;

namespace {

// ---------------------------------------------------------------------------
// Output helpers

/// Shortest round-trip decimal form.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorKind::Io, "write to standard output failed");
  } else {
    io::write_text(out_path, text);
  }
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += io::csv_field(cells[i]);
  }
  return line + "\r\n";
}

// ---------------------------------------------------------------------------
// Demo directories: <id>.traj.json, optional <id>.agent.trjf and <id>.wrist.trjf

std::vector<std::string> demo_ids(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::Io, "'" + dir.string() + "' is not a readable directory");
  const std::string suffix = ".traj.json";
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw Error(ErrorKind::InvalidInput, "no *.traj.json files in '" + dir.string() + "'");
  return ids;
}

Trajectory load_traj(const fs::path& dir, const std::string& id) {
  Trajectory t = io::read_trajectory(dir / (id + ".traj.json"));
  if (t.demo_id() != id) {
    throw Error(ErrorKind::InvalidInput,
                "demo id '" + t.demo_id() + "' does not match file name '" + id + ".traj.json'");
  }
  return t;
}

std::vector<Trajectory> load_trajectories(const fs::path& dir) {
  std::vector<Trajectory> out;
  for (const auto& id : demo_ids(dir)) out.push_back(load_traj(dir, id));
  return out;
}

std::vector<FeatureSequence> load_agent_features(const fs::path& dir) {
  std::vector<FeatureSequence> out;
  for (const auto& id : demo_ids(dir)) out.push_back(io::read_features(dir / (id + ".agent.trjf")));
  return out;
}

std::vector<Demo> load_demos(const fs::path& dir, bool with_wrist) {
  std::vector<Demo> out;
  for (const auto& id : demo_ids(dir)) {
    Trajectory traj = load_traj(dir, id);
    FeatureSequence agent = io::read_features(dir / (id + ".agent.trjf"));
    std::optional<FeatureSequence> wrist;
    if (with_wrist) wrist = io::read_features(dir / (id + ".wrist.trjf"));
    out.push_back(Demo{std::move(traj), std::move(agent), std::move(wrist)});
  }
  return out;
}

void write_demo(const fs::path& dir, const Demo& d) {
  io::write_trajectory(dir / (d.id() + ".traj.json"), d.traj);
  io::write_features(dir / (d.id() + ".agent.trjf"), d.agent);
  if (d.wrist) io::write_features(dir / (d.id() + ".wrist.trjf"), *d.wrist);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------------------
// Shared option values

struct Globals {
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string config;
};

unsigned thread_count(const Globals& g) { return g.threads == 0 ? default_threads() : g.threads; }

struct MetricOpts {
  std::string metric = "action";
  double lambda1 = 1.0;
  double lambda2 = 0.5;
};

void add_metric_opts(CLI::App* sub, MetricOpts& m) {
  sub->add_option("--metric", m.metric, "Frame distance")->check(CLI::IsMember({"action", "visual"}));
  sub->add_option("--lambda1", m.lambda1, "Joint (hand pose) weight of the action distance");
  sub->add_option("--lambda2", m.lambda2, "Orientation weight of the action distance");
}

struct ScheduleOpts {
  std::string kind = "linear";
  int epochs_to_zero = 300;
  double alpha_min = 0.0;
  double beta_a = 1.0;
  double beta_b = 1.0;

  AlphaSchedule schedule() const {
    if (kind == "beta") return BetaDist{beta_a, beta_b};
    return LinearAnneal{epochs_to_zero, alpha_min};
  }
};

void add_schedule_opts(CLI::App* sub, ScheduleOpts& s) {
  sub->add_option("--schedule", s.kind, "Alpha schedule")->check(CLI::IsMember({"linear", "beta"}));
  sub->add_option("--epochs-to-zero", s.epochs_to_zero, "Linear schedule: epochs until alpha reaches its floor");
  sub->add_option("--alpha-min", s.alpha_min, "Linear schedule: alpha floor");
  sub->add_option("--beta-a", s.beta_a, "Beta schedule: first shape parameter");
  sub->add_option("--beta-b", s.beta_b, "Beta schedule: second shape parameter");
}

// ---------------------------------------------------------------------------
// Config file: a flat JSON object whose keys are long option names (dashes
// or underscores). Values become option defaults, so explicit flags win.

std::optional<std::string> find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

std::string json_scalar_string(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return num(v.get<double>());
  throw Error(ErrorKind::InvalidInput, "config key '" + key + "' must be a scalar");
}

void apply_config(CLI::App& app, const std::string& path) {
  const auto j = io::parse_json(io::read_text(path), path);
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, path + ": config must be a JSON object");
  std::set<std::string> used;
  auto visit = [&](CLI::App* a) {
    for (CLI::Option* opt : a->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "config" || name == "help") continue;
      std::string under = name;
      std::replace(under.begin(), under.end(), '-', '_');
      for (const std::string& key : {name, under}) {
        if (j.contains(key)) {
          opt->default_val(json_scalar_string(j.at(key), key));
          used.insert(key);
          break;
        }
      }
    }
  };
  visit(&app);
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) visit(sub);
  for (const auto& [key, value] : j.items()) {
    if (!used.count(key)) throw Error(ErrorKind::InvalidInput, path + ": unknown config key '" + key + "'");
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct AlignOpts {
  std::string humans, robots, out = "-";
  MetricOpts metric;
  std::size_t top_k = 0;
  long band = -1;
};

void run_align(const AlignOpts& o, const Globals& g) {
  MappingOptions mo;
  if (o.top_k > 0) mo.top_k = o.top_k;
  if (o.band >= 0) mo.band = static_cast<std::size_t>(o.band);
  mo.threads = thread_count(g);
  MappingTable table;
  if (o.metric.metric == "action") {
    const auto h = load_trajectories(o.humans);
    const auto r = load_trajectories(o.robots);
    table = build_mapping<Trajectory>(h, r, ActionMetric{{o.metric.lambda1, o.metric.lambda2}}, mo);
  } else {
    const auto h = load_agent_features(o.humans);
    const auto r = load_agent_features(o.robots);
    table = build_mapping<FeatureSequence>(h, r, VisualMetric{}, mo);
  }
  emit(o.out, io::dump_mapping(table));
}

struct RetrieveOpts {
  std::string human, robot, out = "-";
  MetricOpts metric;
  std::size_t l_min = 20;
  std::size_t l_max = 60;
  double epsilon = 0.05;
};

void run_retrieve(const RetrieveOpts& o, const Globals& g) {
  const GmsConfig cfg{o.l_min, o.l_max, o.epsilon};
  std::vector<Segment> segs;
  if (o.metric.metric == "action") {
    segs = gms_sdtw(io::read_trajectory(o.human), io::read_trajectory(o.robot),
                    ActionMetric{{o.metric.lambda1, o.metric.lambda2}}, cfg, thread_count(g));
  } else {
    segs = gms_sdtw(io::read_features(fs::path(o.human)), io::read_features(fs::path(o.robot)), VisualMetric{}, cfg,
                    thread_count(g));
  }
  emit(o.out, io::dump_segments(segs));
}

struct EvalOpts {
  std::string segments, truth, out = "-";
};

void run_retrieve_eval(const EvalOpts& o) {
  const auto segs = io::parse_segments(io::read_text(o.segments), o.segments);
  const auto truth = io::parse_intervals(io::read_text(o.truth), o.truth);
  const RetrievalScore s = eval_retrieval(std::span<const Segment>(segs), std::span<const Interval>(truth));
  emit(o.out, csv_row({"miou", "acc_at_0.5", "predicted", "truth"}) +
                  csv_row({num(s.miou), num(s.acc_at_half), std::to_string(segs.size()), std::to_string(truth.size())}));
}

struct MixupOpts {
  ScheduleOpts schedule;
  int epochs = 300;
  std::size_t draws = 1;
  std::string out = "-";
};

/// Alpha per epoch as CSV. Beta draws use one generator seeded by --seed.
void run_mixup(const MixupOpts& o, const Globals& g) {
  const AlphaSchedule s = o.schedule.schedule();
  validate(s);
  if (o.epochs < 1) throw Error(ErrorKind::InvalidInput, "--epochs must be positive");
  if (o.draws < 1) throw Error(ErrorKind::InvalidInput, "--draws must be positive");
  std::mt19937_64 rng(g.seed);
  std::string text = csv_row({"epoch", "draw", "alpha"});
  for (int e = 0; e < o.epochs; ++e) {
    const std::size_t n = std::holds_alternative<LinearAnneal>(s) ? 1 : o.draws;
    for (std::size_t d = 0; d < n; ++d) {
      text += csv_row({std::to_string(e), std::to_string(d), num(alpha_at(s, e, rng))});
    }
  }
  emit(o.out, text);
}

struct BatchOpts {
  std::string humans, robots, mapping, mapping_mode = "table", out;
  ScheduleOpts schedule;
  std::size_t batch_size = 128;
  std::size_t tau = 2;
  std::size_t k = 32;
  std::size_t epochs = 1;
};

void run_batch(const BatchOpts& o, const Globals& g) {
  const auto humans = load_demos(o.humans, false);
  const auto robots = load_demos(o.robots, true);
  BatchConfig cfg;
  cfg.batch_size = o.batch_size;
  cfg.tau = o.tau;
  cfg.k = o.k;
  cfg.seed = g.seed;
  cfg.schedule = o.schedule.schedule();
  cfg.mapping_mode = o.mapping_mode == "random" ? MappingMode::Random : MappingMode::Table;
  MappingTable mapping;
  if (cfg.mapping_mode == MappingMode::Table) {
    if (o.mapping.empty()) throw Error(ErrorKind::InvalidInput, "--mapping is required in table mode");
    mapping = io::read_mapping(o.mapping);
  }
  const auto m = io::export_dataset(humans, robots, mapping, cfg, o.epochs, o.out);
  std::cout << csv_row({"batches", "records", "condition_len", "k", "action_dim"})
            << csv_row({std::to_string(m.batches), std::to_string(m.records), std::to_string(m.layout.flat_dim()),
                        std::to_string(m.k), std::to_string(m.action_dim)});
}

struct RetargetOpts {
  std::string chain, keypoints, mode = "position", demo_id = "retargeted", out = "-";
  double scale = 1.0;
  double smooth = 0.0;
  double keypoint_smoothing = 0.2;
  double dt = 1.0 / 30.0;
  int max_iters = 100;
};

void run_retarget(const RetargetOpts& o) {
  const KinematicChain chain = io::read_chain(o.chain);
  const auto kp = io::parse_keypoints(io::read_text(o.keypoints), o.keypoints);
  RetargetConfig cfg;
  cfg.scale = o.scale;
  cfg.smooth = o.smooth;
  cfg.keypoint_smoothing = o.keypoint_smoothing;
  cfg.max_iters = o.max_iters;
  RetargetTrajectoryOptions opts;
  opts.mode = o.mode == "vector" ? RetargetMode::Vector : RetargetMode::Position;
  opts.dt = o.dt;
  opts.demo_id = o.demo_id;
  opts.base = kp.base;
  emit(o.out, io::dump_trajectory(retarget_trajectory(chain, kp.keypoints, cfg, opts)));
}

struct SparcOpts {
  std::string input, out = "-";
  SparcConfig cfg;
};

void run_sparc(const SparcOpts& o) {
  const SparcResult r = sparc(io::read_trajectory(o.input), o.cfg);
  io::ordered_json j;
  j["sparc"] = r.sparc;
  j["omega_c"] = r.omega_c;
  emit(o.out, j.dump() + "\n");
}

struct AdOpts {
  std::string a, b, out = "-";
  double lambda2 = 0.5;
};

void run_ad(const AdOpts& o, const Globals& g) {
  const auto a = load_trajectories(o.a);
  const auto b = load_trajectories(o.b);
  const ActionDistanceWeights w{1.0, o.lambda2};
  const unsigned th = thread_count(g);
  std::string text = csv_row({"statistic", "value"});
  text += csv_row({"mean", num(action_distance(a, b, w, th))});
  text += csv_row({"intra_a", a.size() >= 2 ? num(intra_action_distance(a, w, th)) : ""});
  text += csv_row({"intra_b", b.size() >= 2 ? num(intra_action_distance(b, w, th)) : ""});
  emit(o.out, text);
}

struct CalibrateOpts {
  std::string input, out = "-";
  int max_iters = 200;
};

void run_calibrate(const CalibrateOpts& o) {
  const auto rows = io::parse_numeric_csv(io::read_text(o.input), "cx,cy,cz,rx,ry,rz", o.input);
  std::vector<Eigen::Vector3d> cam, rob;
  for (const auto& r : rows) {
    cam.emplace_back(r[0], r[1], r[2]);
    rob.emplace_back(r[3], r[4], r[5]);
  }
  const RigidFit fit = fit_rigid(cam, rob, o.max_iters);
  emit(o.out, io::transform_to_json(fit.transform, fit.rmse).dump(2) + "\n");
}

struct PnpOpts {
  std::string input, init, out = "-";
  PinholeCamera camera{500.0, 500.0, 320.0, 240.0};
  int max_iters = 100;
};

void run_pnp(const PnpOpts& o) {
  const auto rows = io::parse_numeric_csv(io::read_text(o.input), "X,Y,Z,u,v", o.input);
  std::vector<Eigen::Vector3d> obj;
  std::vector<Eigen::Vector2d> img;
  for (const auto& r : rows) {
    obj.emplace_back(r[0], r[1], r[2]);
    img.emplace_back(r[3], r[4]);
  }
  const RigidTransform initial = io::transform_from_json(io::parse_json(io::read_text(o.init), o.init), o.init);
  const PnpResult res = solve_pnp(obj, img, o.camera, initial, o.max_iters);
  emit(o.out, io::transform_to_json(res.pose, res.rmse).dump(2) + "\n");
}

struct SynthOpts {
  std::string kind = "minjerk", out = ".";
  std::size_t frames = 100;
  double dt = 0.01;
  std::size_t base_len = 600;
  std::size_t query_len = 40;
  std::size_t segments = 3;
  double noise = 0.0;
  std::size_t feature_dim = 16;
  std::size_t n_points = 20;
  double angle = 0.5;
  std::size_t dim = 16;
  std::size_t clusters = 4;
  synth::DemoSet demos;
};

/// Chain and keypoint stream to exercise `retarget`: a 3-link finger
/// following smooth seeded joint motion.
void write_retarget_inputs(const fs::path& dir, std::size_t frames, std::uint64_t seed) {
  const KinematicChain chain({Link{Eigen::Vector3d::UnitZ(), 0.05}, Link{Eigen::Vector3d::UnitY(), 0.04},
                              Link{Eigen::Vector3d::UnitY(), 0.03}},
                             Eigen::Vector3d::Constant(-1.5), Eigen::Vector3d::Constant(1.5));
  io::write_text(dir / "chain.json", io::chain_to_json(chain).dump(2) + "\n");
  synth::Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const Eigen::Vector3d ph(phase(rng), phase(rng), phase(rng));
  std::string text;
  for (std::size_t t = 0; t < frames; ++t) {
    const double s = 0.1 * static_cast<double>(t);
    const Eigen::Vector3d q(0.6 * std::sin(s + ph[0]), 0.5 + 0.4 * std::sin(0.7 * s + ph[1]),
                            0.4 + 0.3 * std::sin(1.3 * s + ph[2]));
    io::ordered_json j;
    io::ordered_json pts = io::ordered_json::array();
    for (const auto& p : forward_kinematics(chain, q)) pts.push_back({p.x(), p.y(), p.z()});
    j["keypoints"] = std::move(pts);
    text += j.dump() + "\n";
  }
  io::write_text(dir / "keypoints.jsonl", text);
}

void run_synth(const SynthOpts& o, const Globals& g) {
  const fs::path dir(o.out);
  ensure_dir(dir);
  if (o.kind == "minjerk") {
    synth::MinJerk spec;
    spec.frames = o.frames;
    spec.dt = o.dt;
    spec.end = Eigen::Vector3d(0.3, 0.2, 0.1);
    io::write_trajectory(dir / "minjerk.traj.json", std::get<Trajectory>(synth::generate({spec, g.seed})));
  } else if (o.kind == "planted") {
    if (o.segments < 1 || o.base_len / o.segments <= o.query_len) {
      throw Error(ErrorKind::InvalidInput, "--segments copies of --query-len frames do not fit in --base-len");
    }
    synth::PlantedSegments spec;
    spec.base_len = o.base_len;
    spec.query_len = o.query_len;
    const std::size_t stride = o.base_len / o.segments;
    for (std::size_t i = 0; i < o.segments; ++i) {
      spec.segments.push_back({i * stride + (stride - o.query_len) / 2, o.noise});
    }
    const auto data = std::get<synth::PlantedData>(synth::generate({spec, g.seed}));
    io::write_trajectory(dir / "human_long.traj.json", data.human);
    io::write_trajectory(dir / "robot_query.traj.json", data.robot);
    io::write_features(dir / "human_long.agent.trjf", synth::render_features(data.human, o.feature_dim, g.seed + 1));
    io::write_features(dir / "robot_query.agent.trjf", synth::render_features(data.robot, o.feature_dim, g.seed + 1));
    io::write_text(dir / "truth.json", io::dump_intervals(data.truth));
  } else if (o.kind == "rigid") {
    synth::RigidScene spec;
    spec.n_points = o.n_points;
    spec.rotation_angle = o.angle;
    spec.translation = Eigen::Vector3d(0.2, -0.1, 0.3);
    spec.noise_sigma = o.noise;
    const auto data = std::get<synth::RigidSceneData>(synth::generate({spec, g.seed}));
    std::string csv = csv_row({"cx", "cy", "cz", "rx", "ry", "rz"});
    for (std::size_t i = 0; i < data.cam_points.size(); ++i) {
      const auto& c = data.cam_points[i];
      const auto& r = data.rob_points[i];
      csv += csv_row({num(c.x()), num(c.y()), num(c.z()), num(r.x()), num(r.y()), num(r.z())});
    }
    io::write_text(dir / "calibration.csv", csv);
    io::write_text(dir / "truth.json", io::transform_to_json(data.truth, 0.0).dump(2) + "\n");

    // The same points seen by a pinhole camera 4 m in front of them.
    const PinholeCamera cam{500.0, 500.0, 320.0, 240.0};
    const RigidTransform pose(data.truth.rotation(), Eigen::Vector3d(0.1, -0.05, 4.0));
    std::string pnp = csv_row({"X", "Y", "Z", "u", "v"});
    for (const auto& p : data.cam_points) {
      const Eigen::Vector2d uv = cam.project(pose.apply(p));
      pnp += csv_row({num(p.x()), num(p.y()), num(p.z()), num(uv.x()), num(uv.y())});
    }
    io::write_text(dir / "pnp.csv", pnp);
    const RigidTransform init(data.truth.rotation() * axis_angle(Eigen::Vector3d(1.0, 1.0, 0.0), 0.05),
                              pose.translation() + Eigen::Vector3d(0.05, 0.05, -0.1));
    io::write_text(dir / "pnp_init.json", io::transform_to_json(init, 0.0).dump(2) + "\n");
  } else if (o.kind == "features") {
    synth::FeatureBlob spec{o.frames, o.dim, o.clusters};
    const auto data = std::get<synth::FeatureBlobData>(synth::generate({spec, g.seed}));
    io::write_features(dir / "blob.agent.trjf", data.features);
    std::string csv = csv_row({"frame", "cluster"});
    for (std::size_t t = 0; t < data.labels.size(); ++t) csv += csv_row({std::to_string(t), std::to_string(data.labels[t])});
    io::write_text(dir / "labels.csv", csv);
  } else {
    const auto data = synth::demo_set(o.demos, g.seed);
    ensure_dir(dir / "humans");
    ensure_dir(dir / "robots");
    for (const auto& d : data.humans) write_demo(dir / "humans", d);
    for (const auto& d : data.robots) write_demo(dir / "robots", d);
    write_retarget_inputs(dir, o.demos.human_len, g.seed);
  }
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::Io ? 2 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-to-robot co-training data pipeline tools", "h2r"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--config", g.config, "JSON file of option defaults (flags take precedence)");

  AlignOpts align;
  auto* s_align = app.add_subcommand("align", "DTW mapping table between human and robot demo directories");
  s_align->add_option("--humans", align.humans, "Directory of human demos")->required();
  s_align->add_option("--robots", align.robots, "Directory of robot demos")->required();
  add_metric_opts(s_align, align.metric);
  s_align->add_option("--top-k", align.top_k, "Keep only the k cheapest robot demos per human demo (0 = all)");
  s_align->add_option("--band", align.band, "Sakoe-Chiba band half-width (-1 = none)");
  s_align->add_option("--out", align.out, "Mapping JSON-lines output (- = stdout)");

  RetrieveOpts ret;
  auto* s_ret = app.add_subcommand("retrieve", "Greedy multi-segment subsequence retrieval");
  s_ret->add_option("--human", ret.human, "Long human sequence (trajectory JSON, or .trjf for --metric visual)")->required();
  s_ret->add_option("--robot", ret.robot, "Robot query (trajectory JSON, or .trjf for --metric visual)")->required();
  add_metric_opts(s_ret, ret.metric);
  s_ret->add_option("--l-min", ret.l_min, "Shortest window length");
  s_ret->add_option("--l-max", ret.l_max, "Longest window length");
  s_ret->add_option("--epsilon", ret.epsilon, "Acceptance threshold on path-normalized cost");
  s_ret->add_option("--out", ret.out, "Segment JSON-lines output (- = stdout)");

  EvalOpts ev;
  auto* s_ev = app.add_subcommand("retrieve-eval", "Score retrieved segments against ground truth");
  s_ev->add_option("--segments", ev.segments, "Segment JSON-lines file")->required();
  s_ev->add_option("--truth", ev.truth, "Ground-truth JSON array of {start, end}")->required();
  s_ev->add_option("--out", ev.out, "CSV output (- = stdout)");

  MixupOpts mx;
  auto* s_mx = app.add_subcommand("mixup", "Tabulate the MixUp alpha schedule as CSV");
  add_schedule_opts(s_mx, mx.schedule);
  s_mx->add_option("--epochs", mx.epochs, "Number of epochs to tabulate");
  s_mx->add_option("--draws", mx.draws, "Draws per epoch for the beta schedule");
  s_mx->add_option("--out", mx.out, "CSV output (- = stdout)");

  BatchOpts bt;
  auto* s_bt = app.add_subcommand("batch", "Emit co-training batches to a binary file plus manifest");
  s_bt->add_option("--humans", bt.humans, "Directory of human demos")->required();
  s_bt->add_option("--robots", bt.robots, "Directory of robot demos")->required();
  s_bt->add_option("--mapping", bt.mapping, "Mapping JSON-lines file (table mode)");
  s_bt->add_option("--mapping-mode", bt.mapping_mode, "Robot timestep selection")
      ->check(CLI::IsMember({"table", "random"}));
  add_schedule_opts(s_bt, bt.schedule);
  s_bt->add_option("--batch-size", bt.batch_size, "Samples per batch (even)");
  s_bt->add_option("--tau", bt.tau, "Observation history length");
  s_bt->add_option("--k", bt.k, "Action chunk length");
  s_bt->add_option("--epochs", bt.epochs, "Epochs to emit (0 = manifest only)");
  s_bt->add_option("--out", bt.out, "Batch binary output path")->required();

  RetargetOpts rt;
  auto* s_rt = app.add_subcommand("retarget", "Retarget keypoint JSON-lines onto a kinematic chain");
  s_rt->add_option("--chain", rt.chain, "Chain JSON")->required();
  s_rt->add_option("--keypoints", rt.keypoints, "Keypoint JSON-lines")->required();
  s_rt->add_option("--mode", rt.mode, "Objective")->check(CLI::IsMember({"position", "vector"}));
  s_rt->add_option("--scale", rt.scale, "Human-to-robot scale factor");
  s_rt->add_option("--smooth", rt.smooth, "Temporal smoothness weight");
  s_rt->add_option("--keypoint-smoothing", rt.keypoint_smoothing, "Keypoint low-pass factor (1 = off)");
  s_rt->add_option("--max-iters", rt.max_iters, "Solver iteration cap per frame");
  s_rt->add_option("--dt", rt.dt, "Output time step (s)");
  s_rt->add_option("--demo-id", rt.demo_id, "Output demo id");
  s_rt->add_option("--out", rt.out, "Trajectory JSON output (- = stdout)");

  SparcOpts sp;
  auto* s_sp = app.add_subcommand("sparc", "SPARC smoothness of a trajectory");
  s_sp->add_option("--input", sp.input, "Trajectory JSON")->required();
  s_sp->add_option("--pad-factor", sp.cfg.pad_factor, "Zero-padding factor");
  s_sp->add_option("--omega-c-max", sp.cfg.omega_c_max, "Cutoff ceiling (Hz)");
  s_sp->add_option("--amp-threshold", sp.cfg.amp_threshold, "Normalized amplitude threshold");
  s_sp->add_option("--out", sp.out, "JSON output (- = stdout)");

  AdOpts ad;
  auto* s_ad = app.add_subcommand("ad", "Action distance between two trajectory directories");
  s_ad->add_option("--a", ad.a, "First directory")->required();
  s_ad->add_option("--b", ad.b, "Second directory")->required();
  s_ad->add_option("--lambda2", ad.lambda2, "Orientation weight");
  s_ad->add_option("--out", ad.out, "CSV output (- = stdout)");

  CalibrateOpts cal;
  auto* s_cal = app.add_subcommand("calibrate", "Rigid camera-to-robot transform from point pairs");
  s_cal->add_option("--input", cal.input, "CSV with header cx,cy,cz,rx,ry,rz")->required();
  s_cal->add_option("--max-iters", cal.max_iters, "Iteration cap per start");
  s_cal->add_option("--out", cal.out, "Transform JSON output (- = stdout)");

  PnpOpts pnp;
  auto* s_pnp = app.add_subcommand("pnp", "Camera pose from 3D-2D correspondences");
  s_pnp->add_option("--input", pnp.input, "CSV with header X,Y,Z,u,v")->required();
  s_pnp->add_option("--init", pnp.init, "Initial pose (transform JSON)")->required();
  s_pnp->add_option("--fx", pnp.camera.fx, "Focal length x (px)");
  s_pnp->add_option("--fy", pnp.camera.fy, "Focal length y (px)");
  s_pnp->add_option("--cx", pnp.camera.cx, "Principal point x (px)");
  s_pnp->add_option("--cy", pnp.camera.cy, "Principal point y (px)");
  s_pnp->add_option("--max-iters", pnp.max_iters, "Iteration cap");
  s_pnp->add_option("--out", pnp.out, "Transform JSON output (- = stdout)");

  SynthOpts sy;
  auto* s_sy = app.add_subcommand("synth", "Write seeded synthetic data");
  s_sy->add_option("--kind", sy.kind, "What to generate")
      ->check(CLI::IsMember({"minjerk", "planted", "rigid", "features", "demos"}));
  s_sy->add_option("--out", sy.out, "Output directory");
  s_sy->add_option("--frames", sy.frames, "minjerk/features: frame count");
  s_sy->add_option("--dt", sy.dt, "minjerk: time step (s)");
  s_sy->add_option("--base-len", sy.base_len, "planted: long sequence length");
  s_sy->add_option("--query-len", sy.query_len, "planted: query length");
  s_sy->add_option("--segments", sy.segments, "planted: number of planted copies");
  s_sy->add_option("--noise", sy.noise, "planted: translation noise; rigid: point noise");
  s_sy->add_option("--feature-dim", sy.feature_dim, "planted: mock feature width");
  s_sy->add_option("--n-points", sy.n_points, "rigid: point count");
  s_sy->add_option("--angle", sy.angle, "rigid: rotation angle (rad)");
  s_sy->add_option("--dim", sy.dim, "features: width");
  s_sy->add_option("--clusters", sy.clusters, "features: phase count");
  s_sy->add_option("--humans", sy.demos.humans, "demos: human demo count");
  s_sy->add_option("--robots", sy.demos.robots, "demos: robot demo count");
  s_sy->add_option("--human-len", sy.demos.human_len, "demos: human demo length");
  s_sy->add_option("--robot-len", sy.demos.robot_len, "demos: robot demo length");
  s_sy->add_option("--agent-dim", sy.demos.agent_dim, "demos: agent feature width");
  s_sy->add_option("--wrist-dim", sy.demos.wrist_dim, "demos: wrist feature width");
  s_sy->add_option("--action-noise", sy.demos.action_noise, "demos: human action noise");

  try {
    if (auto cfg = find_config_arg(argc, argv)) apply_config(app, *cfg);
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    std::cerr << "h2r: " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    if (*s_align) run_align(align, g);
    else if (*s_ret) run_retrieve(ret, g);
    else if (*s_ev) run_retrieve_eval(ev);
    else if (*s_mx) run_mixup(mx, g);
    else if (*s_bt) run_batch(bt, g);
    else if (*s_rt) run_retarget(rt);
    else if (*s_sp) run_sparc(sp);
    else if (*s_ad) run_ad(ad, g);
    else if (*s_cal) run_calibrate(cal);
    else if (*s_pnp) run_pnp(pnp);
    else if (*s_sy) run_synth(sy, g);
  } catch (const Error& e) {
    std::cerr << "h2r: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "h2r: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "h2r: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
