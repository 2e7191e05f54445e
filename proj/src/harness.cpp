#include "diffc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <thread>

#include "diffc/container.hpp"
#include "diffc/denoiser.hpp"
#include "diffc/error.hpp"

namespace diffc {
namespace {

Tensor first_images(const Tensor& images, std::size_t count) {
  if (count == 0 || count >= images.dim(0)) return images;
  Shape shape = images.shape();
  shape[0] = count;
  const auto begin = images.values().begin();
  return Tensor(shape, std::vector<float>(begin, begin + static_cast<long>(count * images.row_size())));
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SuiteRow row_header(const ExperimentSpec& spec) {
  SuiteRow row;
  row.dataset = spec.dataset.name;
  row.corruption = corruption_name(spec.corruption);
  row.severity = spec.severity;
  row.mode = mode_name(spec.dataset.mode);
  row.model = model_name(spec.model.kind);
  row.sampler = sampler_name(spec.sampler.kind);
  row.steps = spec.sampler_steps();
  row.seed = spec.sampler.seed;
  row.digest = spec_digest(spec);
  row.feature_map = spec.features.tag();
  return row;
}

auto row_key(const SuiteRow& r) {
  const auto kind = parse_corruption(r.corruption);
  return std::tuple(r.dataset, kind ? corruption_order(*kind) : 99, r.severity, r.sampler);
}

}  // namespace

Dataset build_dataset(const DatasetSpec& spec, std::uint64_t master_seed) {
  RngStream rng(hash_combine(mix64(master_seed), text_hash(spec.name)), streams::kData);
  Dataset d;
  switch (spec.source) {
    case DatasetSource::toy: d = synth_toy_dataset(spec.count, spec.side, spec.channels, rng); break;
    case DatasetSource::fractal: d = synth_fractal_dataset(spec.count, spec.side, spec.tint, rng); break;
    case DatasetSource::file: {
      d = load_images(spec.path);
      require_domain(d, PixelDomain::unit, "experiment input");
      d.images = first_images(d.images, spec.count);
      break;
    }
  }
  if (spec.augment > 1) {
    RngStream aug = rng.split(1);
    d = augment(d, spec.augment, aug);
  }
  d.name = spec.name;
  return d;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const RngStream cell(spec.sampler.seed, 0);
  const Dataset clean = build_dataset(spec.dataset, spec.master_seed);
  require_domain(clean, PixelDomain::unit, "corruption");

  Tensor corrupted_images = clean.images;
  if (spec.corruption != CorruptionKind::Identity) {
    const auto cspec = CorruptionSpec::make(spec.corruption, Severity(spec.severity));
    corrupted_images = apply_corruption_batch(clean.images, cspec, cell.split(streams::kCorrupt));
  }
  const Dataset corrupted = make_dataset(clean.name + "_corrupted", corrupted_images, PixelDomain::unit);
  const Dataset train_set = to_signed(corrupted);

  const NoiseSchedule sched = spec.schedule.build();
  const Shape image_shape = train_set.image_shape();
  ExperimentResult result;
  Tensor generated;
  RngStream sample_rng = cell.split(streams::kSample);
  if (spec.model.kind == ModelKind::analytic) {
    const auto model = fit_analytic_predictor(train_set.images, sched);
    RngStream loss_rng = cell.split(streams::kLoss);
    std::vector<int> steps(train_set.count());
    for (int& t : steps) t = 1 + static_cast<int>(loss_rng.below(static_cast<std::uint64_t>(sched.steps())));
    const Tensor eps = gaussian_sample(loss_rng, train_set.images.shape());
    result.train_loss_final = simple_loss(model, train_set.images, steps, eps, sched).loss;
    result.loss_curve = {result.train_loss_final};
    generated = sample(model, spec.samples, image_shape, sched, spec.sampler, sample_rng);
  } else {
    RngStream init = cell.split(streams::kInit);
    TinyDenoiser model =
        TinyDenoiser::initialized(LayerSpec{train_set.images.row_size(), spec.model.hidden}, init);
    RngStream train_rng = cell.split(streams::kTrain);
    const auto tr = train(model, train_set.images, sched, spec.model.train, train_rng);
    result.loss_curve = tr.epoch_loss;
    result.train_loss_final = tr.epoch_loss.back();
    generated = sample(model, spec.samples, image_shape, sched, spec.sampler, sample_rng);
  }
  require(generated.all_finite(), Errc::Precondition, "sampler produced non-finite values");
  const Dataset generated_unit = to_unit(clamp_signed("generated", std::move(generated)));
  result.samples = generated_unit.images;
  result.fid = score_experiment(clean.images, corrupted.images, result.samples, spec.features);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void save_artifacts(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_ppm(image_grid(result.samples), dir + "/samples.ppm");
  std::string csv = "epoch,loss\n";
  for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
    csv += std::to_string(i + 1) + "," + format_double(result.loss_curve[i]) + "\n";
  write_text(dir + "/loss.csv", csv);
}

std::string cell_label(const ExperimentSpec& spec) {
  return spec.dataset.name + "_" + std::string(corruption_name(spec.corruption)) + "_s" +
         std::to_string(spec.severity) + "_" + std::string(sampler_name(spec.sampler.kind));
}

std::size_t SuiteResult::failures() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SuiteRow& r) { return r.failed(); }));
}

SuiteResult run_suite(const SuiteConfig& cfg, const SuiteOptions& opts) {
  const auto cells = cfg.cells();
  std::vector<SuiteRow> rows(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& spec = cells[i];
      SuiteRow row = row_header(spec);
      try {
        const auto r = run_experiment(spec);
        row.fid_corrupted_ref = r.fid.fid_corrupted_ref;
        row.fid_clean_ref = r.fid.fid_clean_ref;
        row.max_score = r.fid.max_score;
        row.regularized = r.fid.regularized;
        row.train_loss_final = r.train_loss_final;
        row.seconds = cfg.record_timing ? r.seconds : 0.0;
        if (!opts.out_dir.empty()) save_artifacts(r, opts.out_dir + "/" + cell_label(spec));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows[i] = std::move(row);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(opts.workers ? opts.workers : cfg.workers, 1, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::sort(rows.begin(), rows.end(), [](const SuiteRow& a, const SuiteRow& b) { return row_key(a) < row_key(b); });
  SuiteResult result{cfg.name, kArtifactVersion, cfg.record_timing ? utc_now() : "1970-01-01T00:00:00Z",
                     std::move(rows)};
  return result;
}

}  // namespace diffc
