#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffc/corruptions.hpp"
#include "diffc/data.hpp"
#include "diffc/denoiser.hpp"
#include "diffc/diffusion.hpp"
#include "diffc/metrics.hpp"
#include "diffc/schedule.hpp"

namespace diffc {

enum class DatasetSource { toy, fractal, file };
enum class ExperimentMode { overlay, intrinsic };
enum class ModelKind { analytic, tiny };

std::string_view source_name(DatasetSource s) noexcept;
std::string_view mode_name(ExperimentMode m) noexcept;
std::string_view model_name(ModelKind m) noexcept;

struct DatasetSpec {
  std::string name = "toy";
  DatasetSource source = DatasetSource::toy;
  std::size_t side = 16;
  std::size_t channels = 1;
  std::size_t count = 256;  // file source: 0 keeps every image
  Tint tint = Tint::red;
  std::string path;
  std::size_t augment = 1;
  ExperimentMode mode = ExperimentMode::overlay;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::analytic;
  std::vector<std::size_t> hidden{256, 256};
  TrainConfig train;

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    return a.kind == b.kind && a.hidden == b.hidden && a.train.epochs == b.train.epochs &&
           a.train.batch_size == b.train.batch_size && a.train.lr == b.train.lr;
  }
};

struct ScheduleSpec {
  int steps = 200;
  double beta_start = kDefaultBetaStart;
  double beta_end = kDefaultBetaEnd;

  NoiseSchedule build() const { return NoiseSchedule::linear(steps, beta_start, beta_end); }
  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// One cell of the grid: everything needed to rerun it in isolation.
struct ExperimentSpec {
  DatasetSpec dataset;
  CorruptionKind corruption = CorruptionKind::Identity;
  int severity = 1;
  ModelSpec model;
  ScheduleSpec schedule;
  SamplerConfig sampler;  // sampler.seed is the derived cell seed
  std::size_t samples = 256;
  FeatureMap features = FeatureMap::raw();
  std::uint64_t master_seed = 0;

  /// Sampler step count as reported: T for DDPM, the subsequence length for DDIM.
  int sampler_steps() const { return sampler.kind == SamplerKind::ddpm ? schedule.steps : sampler.steps; }
  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

struct SuiteConfig {
  std::string name = "suite";
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  FeatureMap features = FeatureMap::raw();
  bool record_timing = false;
  std::vector<DatasetSpec> datasets;
  std::vector<CorruptionKind> corruptions;
  std::vector<int> severities;
  ModelSpec model;
  ScheduleSpec schedule;
  std::vector<SamplerKind> samplers;
  int ddim_steps = 20;
  double eta = 0.0;
  std::size_t samples = 256;

  /// Cartesian product datasets × corruptions × severities × samplers.
  std::vector<ExperimentSpec> cells() const;
};

/// Parse the suite text format. Errors carry Errc::ConfigError and a line number.
SuiteConfig parse_suite(const std::string& text);
SuiteConfig load_suite(const std::string& path);

/// Canonical single-cell config text; parse_suite of it yields exactly `spec`.
std::string experiment_config(const ExperimentSpec& spec);
/// Hex digest of experiment_config(spec).
std::string spec_digest(const ExperimentSpec& spec);

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t text_hash(std::string_view text) noexcept;

/// hash(master, dataset, corruption, severity, sampler).
std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset, CorruptionKind corruption, int severity,
                        SamplerKind sampler);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace diffc
