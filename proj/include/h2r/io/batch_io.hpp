#ifndef H2R_IO_BATCH_IO_HPP
#define H2R_IO_BATCH_IO_HPP

// Batch record binary ("TRJB"), little-endian:
//   magic "TRJB", u32 version = 1, then per record:
//   u32 condition_len, condition_len x binary64,
//   u32 k, u32 action_dim, k*action_dim x binary64 (row-major),
//   binary64 domain_alpha.
// A JSON manifest next to the data file records shapes, seed, schedule and
// counts.

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "h2r/io/common.hpp"
#include "h2r/mixup.hpp"

namespace h2r::io {

inline void write_batch_header(std::ostream& out) {
  out.write("TRJB", 4);
  put_u32(out, 1);
}

inline void write_batch_record(std::ostream& out, const TrainingSample& s) {
  const auto& c = s.condition.flattened();
  put_u32(out, static_cast<std::uint32_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) put_f64(out, c[i]);
  put_u32(out, static_cast<std::uint32_t>(s.actions.rows()));
  put_u32(out, static_cast<std::uint32_t>(s.actions.cols()));
  for (Eigen::Index r = 0; r < s.actions.rows(); ++r) {
    for (Eigen::Index col = 0; col < s.actions.cols(); ++col) put_f64(out, s.actions(r, col));
  }
  put_f64(out, s.domain_alpha);
}

/// Reads every record; conditions are shaped by `layout`.
inline std::vector<TrainingSample> read_batch_records(std::istream& in, const ConditionLayout& layout,
                                                      const std::string& context) {
  expect_magic(in, "TRJB", context);
  const auto version = get_u32(in, context);
  if (version != 1) throw Error(ErrorKind::InvalidInput, context + ": unsupported version " + std::to_string(version));
  std::vector<TrainingSample> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto len = get_u32(in, context);
    if (len != layout.flat_dim()) throw Error(ErrorKind::InvalidInput, context + ": condition length disagrees with manifest");
    Eigen::VectorXd c(len);
    for (std::uint32_t i = 0; i < len; ++i) c[i] = get_f64(in, context);
    const auto k = get_u32(in, context);
    const auto dim = get_u32(in, context);
    Eigen::MatrixXd a(k, dim);
    for (std::uint32_t r = 0; r < k; ++r) {
      for (std::uint32_t col = 0; col < dim; ++col) a(r, col) = get_f64(in, context);
    }
    const double alpha = get_f64(in, context);
    out.push_back(TrainingSample{Condition(layout, std::move(c)), std::move(a), alpha, {}});
  }
  return out;
}

inline ordered_json schedule_to_json(const AlphaSchedule& s) {
  ordered_json j;
  if (const auto* lin = std::get_if<LinearAnneal>(&s)) {
    j["kind"] = "linear";
    j["epochs_to_zero"] = lin->epochs_to_zero;
    j["alpha_min"] = lin->alpha_min;
  } else {
    const auto& b = std::get<BetaDist>(s);
    j["kind"] = "beta";
    j["a"] = b.a;
    j["b"] = b.b;
  }
  return j;
}

struct DatasetManifest {
  ConditionLayout layout;
  std::size_t k = 0;
  std::size_t action_dim = 0;
  std::size_t batch_size = 0;
  std::size_t epochs = 0;
  std::size_t batches = 0;
  std::size_t records = 0;
  std::uint64_t seed = 0;
};

inline std::filesystem::path manifest_path(const std::filesystem::path& data_path) {
  return std::filesystem::path(data_path.string() + ".manifest.json");
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto j = parse_json(read_text(path), path.string());
  const std::string ctx = path.string();
  DatasetManifest m;
  m.layout = ConditionLayout{json_get<std::size_t>(j, "tau", ctx), json_get<std::size_t>(j, "d_agent", ctx),
                             json_get<std::size_t>(j, "d_wrist", ctx), json_get<std::size_t>(j, "d_proprio", ctx)};
  m.k = json_get<std::size_t>(j, "k", ctx);
  m.action_dim = json_get<std::size_t>(j, "action_dim", ctx);
  m.batch_size = json_get<std::size_t>(j, "batch_size", ctx);
  m.epochs = json_get<std::size_t>(j, "epochs", ctx);
  m.batches = json_get<std::size_t>(j, "batches", ctx);
  m.records = json_get<std::size_t>(j, "records", ctx);
  m.seed = json_get<std::uint64_t>(j, "seed", ctx);
  return m;
}

/// Emits `epochs` epochs of batches into `path` plus `<path>.manifest.json`.
/// With zero epochs only the manifest is written.
inline DatasetManifest export_dataset(std::span<const Demo> humans, std::span<const Demo> robots,
                                      const MappingTable& mapping, const BatchConfig& cfg, std::size_t epochs,
                                      const std::filesystem::path& path) {
  cfg.validate();
  DatasetManifest m;
  m.layout = dataset_layout(humans, robots, cfg.tau);
  m.k = cfg.k;
  m.action_dim = m.layout.d_proprio;
  m.batch_size = cfg.batch_size;
  m.epochs = epochs;
  m.seed = cfg.seed;

  if (epochs > 0) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    write_batch_header(out);
    for (std::size_t e = 0; e < epochs; ++e) {
      for (const auto& batch : emit_batches(humans, robots, mapping, cfg, static_cast<int>(e))) {
        for (const auto& s : batch) write_batch_record(out, s);
        ++m.batches;
        m.records += batch.size();
      }
    }
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
  }

  ordered_json j;
  j["format"] = "TRJB";
  j["version"] = 1;
  j["data_file"] = epochs > 0 ? path.filename().string() : std::string();
  j["tau"] = m.layout.tau;
  j["d_agent"] = m.layout.d_agent;
  j["d_wrist"] = m.layout.d_wrist;
  j["d_proprio"] = m.layout.d_proprio;
  j["condition_len"] = m.layout.flat_dim();
  j["k"] = m.k;
  j["action_dim"] = m.action_dim;
  j["batch_size"] = m.batch_size;
  j["epochs"] = m.epochs;
  j["batches"] = m.batches;
  j["records"] = m.records;
  j["seed"] = m.seed;
  j["mapping_mode"] = cfg.mapping_mode == MappingMode::Table ? "table" : "random";
  j["schedule"] = schedule_to_json(cfg.schedule);
  write_text(manifest_path(path), j.dump(2) + "\n");
  return m;
}

/// Reads a dataset written by export_dataset.
inline std::vector<TrainingSample> read_dataset(const std::filesystem::path& path) {
  const DatasetManifest m = read_manifest(manifest_path(path));
  if (m.records == 0) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  auto samples = read_batch_records(in, m.layout, path.string());
  if (samples.size() != m.records) throw Error(ErrorKind::InvalidInput, path.string() + ": record count disagrees with manifest");
  return samples;
}

}  // namespace h2r::io

#endif  // H2R_IO_BATCH_IO_HPP
