#pragma once

#include <string>
#include <vector>

#include "diffc/config.hpp"
#include "diffc/metrics.hpp"

namespace diffc {

/// Fixed stream ids under the cell seed.
namespace streams {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kCorrupt = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kTrain = 4;
inline constexpr std::uint64_t kSample = 5;
inline constexpr std::uint64_t kLoss = 6;
}  // namespace streams

/// Clean dataset of a cell in the unit domain (depends on master seed and
/// dataset spec only, so every cell of a dataset sees the same images).
Dataset build_dataset(const DatasetSpec& spec, std::uint64_t master_seed);

struct ExperimentResult {
  FidResult fid;
  double train_loss_final = 0.0;
  std::vector<double> loss_curve;
  Tensor samples;  // generated images, unit domain
  double seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Writes samples.ppm (image grid) and loss.csv into `dir`.
void save_artifacts(const ExperimentResult& result, const std::string& dir);

struct SuiteRow {
  std::string dataset;
  std::string corruption;
  int severity = 1;
  std::string mode;
  std::string model;
  std::string sampler;
  int steps = 0;
  double fid_corrupted_ref = 0.0;
  double fid_clean_ref = 0.0;
  double max_score = 0.0;
  double train_loss_final = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  // Not part of the CSV.
  std::string digest;
  std::string feature_map;
  bool regularized = false;
  std::string error;  // empty on success

  bool failed() const { return !error.empty(); }
  friend bool operator==(const SuiteRow&, const SuiteRow&) = default;
};

struct SuiteResult {
  std::string name;
  std::string version;
  std::string timestamp;
  std::vector<SuiteRow> rows;

  std::size_t failures() const;
};

inline constexpr const char* kArtifactVersion = "0.1.0";

struct SuiteOptions {
  std::size_t workers = 0;  // 0: take the config value
  std::string out_dir;      // empty: no per-cell artifacts
};

/// Rows sorted by (dataset, corruption column order, severity, sampler).
/// A failing cell becomes a row with `error` set; the others still run.
SuiteResult run_suite(const SuiteConfig& cfg, const SuiteOptions& opts = {});

/// Directory-safe cell label, e.g. "toy_fog_s3_ddim".
std::string cell_label(const ExperimentSpec& spec);

}  // namespace diffc
