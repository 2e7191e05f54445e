#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "diffc/config.hpp"
#include "diffc/container.hpp"
#include "diffc/corruptions.hpp"
#include "diffc/data.hpp"
#include "diffc/denoiser.hpp"
#include "diffc/diffusion.hpp"
#include "diffc/error.hpp"
#include "diffc/harness.hpp"
#include "diffc/metrics.hpp"
#include "diffc/plasma.hpp"
#include "diffc/report.hpp"

using namespace diffc;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitFailure = 2;

bool is_ppm(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".ppm" || ext == ".pgm";
}

/// .ppm/.pgm gets the first image (or a grid of many), anything else a DFC1 container.
void write_images(const Tensor& batch, const std::string& path) {
  if (!is_ppm(path)) return save_tensor(path, batch);
  save_ppm(batch.dim(0) == 1 ? batch.row(0) : image_grid(batch), path);
}

Shape parse_shape(const std::string& text) {
  Shape shape;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    require(!item.empty(), Errc::ConfigError, "bad shape '" + text + "'");
    shape.push_back(static_cast<std::size_t>(std::stoul(item)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return shape;
}

CorruptionKind kind_or_throw(const std::string& name) {
  const auto k = parse_corruption(name);
  require(k.has_value(), Errc::ConfigError, "unknown corruption '" + name + "'");
  return *k;
}

SamplerKind sampler_or_throw(const std::string& name) {
  const auto k = parse_sampler(name);
  require(k.has_value(), Errc::ConfigError, "unknown sampler '" + name + "'");
  return *k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion models under image corruptions: corrupt, train, sample, score and report."};
  app.require_subcommand(1);

  // corrupt
  std::string c_in, c_out, c_kind = "identity";
  int c_sev = 1;
  std::uint64_t c_seed = 0;
  auto* corrupt = app.add_subcommand("corrupt", "Corrupt a dataset (IDX, PGM/PPM or container)");
  corrupt->add_option("input", c_in, "Input images")->required();
  corrupt->add_option("-o,--output", c_out, "Output .ppm/.pgm or container path")->required();
  corrupt->add_option("--kind", c_kind, "Corruption kind");
  corrupt->add_option("--severity", c_sev, "Severity 1..5");
  corrupt->add_option("--seed", c_seed, "Random seed");

  // fractal-gen
  int f_k = 5;
  double f_rough = 1.0, f_decay = 2.0;
  std::uint64_t f_seed = 0;
  std::size_t f_count = 0, f_side = 32;
  std::string f_out, f_tint = "red";
  auto* fractal = app.add_subcommand("fractal-gen", "Diamond-square plasma, or a tinted fractal dataset with --count");
  fractal->add_option("-o,--output", f_out, "Output path")->required();
  fractal->add_option("--k", f_k, "Detail level; side = 2^k + 1");
  fractal->add_option("--roughness", f_rough, "Initial amplitude");
  fractal->add_option("--decay", f_decay, "Amplitude divisor per level");
  fractal->add_option("--seed", f_seed, "Random seed");
  fractal->add_option("--count", f_count, "Generate a dataset of this many tinted images instead");
  fractal->add_option("--side", f_side, "Dataset image side");
  fractal->add_option("--tint", f_tint, "red, green or blue");

  // train
  std::string t_in, t_out, t_loss, t_hidden = "256,256";
  TrainConfig t_cfg;
  ScheduleSpec t_sched;
  std::uint64_t t_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train the tiny denoiser on unit-domain images");
  train_cmd->add_option("input", t_in, "Training images")->required();
  train_cmd->add_option("-o,--output", t_out, "Checkpoint path")->required();
  train_cmd->add_option("--hidden", t_hidden, "Comma-separated hidden widths");
  train_cmd->add_option("--epochs", t_cfg.epochs);
  train_cmd->add_option("--batch-size", t_cfg.batch_size);
  train_cmd->add_option("--lr", t_cfg.lr);
  train_cmd->add_option("--T", t_sched.steps, "Diffusion steps");
  train_cmd->add_option("--seed", t_seed);
  train_cmd->add_option("--loss-csv", t_loss, "Write the per-epoch loss curve here");

  // sample
  std::string s_ckpt, s_fit, s_out, s_shape, s_sampler = "ddpm";
  int s_steps = 20, s_T = 200;
  double s_eta = 0.0;
  std::size_t s_count = 64;
  std::uint64_t s_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Generate images from a checkpoint or an analytic Gaussian fit");
  auto* ckpt_opt = sample_cmd->add_option("--checkpoint", s_ckpt, "Tiny denoiser checkpoint");
  auto* fit_opt = sample_cmd->add_option("--fit", s_fit, "Fit the analytic predictor to these images");
  ckpt_opt->excludes(fit_opt);
  sample_cmd->add_option("--shape", s_shape, "C,H,W (required with --checkpoint)");
  sample_cmd->add_option("-o,--output", s_out, "Output path")->required();
  sample_cmd->add_option("--sampler", s_sampler, "ddpm or ddim");
  sample_cmd->add_option("--steps", s_steps, "DDIM subsequence length");
  sample_cmd->add_option("--eta", s_eta, "DDIM eta");
  sample_cmd->add_option("--T", s_T, "Diffusion steps of the schedule");
  sample_cmd->add_option("-n,--count", s_count, "Number of samples");
  sample_cmd->add_option("--seed", s_seed);

  // fid
  std::string fid_a, fid_b, fid_features = "raw";
  auto* fid_cmd = app.add_subcommand("fid", "Fréchet distance between two image sets");
  fid_cmd->add_option("a", fid_a)->required();
  fid_cmd->add_option("b", fid_b)->required();
  fid_cmd->add_option("--features", fid_features, "raw, projD@SEED or patchP");

  // run-suite
  std::string r_config, r_out = "suite_out";
  std::size_t r_workers = 0;
  auto* suite = app.add_subcommand("run-suite", "Run every cell of a suite config");
  suite->add_option("--config", r_config)->required();
  suite->add_option("--out-dir", r_out);
  suite->add_option("--workers", r_workers, "Overrides the config's worker count");

  // report
  std::string p_in, p_out, p_format = "markdown";
  auto* report = app.add_subcommand("report", "Re-render a results CSV");
  report->add_option("input", p_in, "results.csv")->required();
  report->add_option("--format", p_format, "csv, json or markdown");
  report->add_option("-o,--output", p_out, "Output path (stdout if omitted)");

  // chart
  std::string h_in, h_out, h_corruption;
  auto* chart = app.add_subcommand("chart", "Severity chart (SVG) from a results CSV");
  chart->add_option("input", h_in, "results.csv")->required();
  chart->add_option("-o,--output", h_out)->required();
  chart->add_option("--corruption", h_corruption, "Only plot this kind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*corrupt) {
      const Dataset d = load_images(c_in);
      const auto spec = CorruptionSpec::make(kind_or_throw(c_kind), Severity(c_sev));
      write_images(apply_corruption_batch(d.images, spec, RngStream(c_seed, 0)), c_out);
    } else if (*fractal) {
      RngStream rng(f_seed, 0);
      if (f_count > 0) {
        Tint tint = Tint::red;
        if (f_tint == "green") tint = Tint::green;
        else if (f_tint == "blue") tint = Tint::blue;
        else require(f_tint == "red", Errc::ConfigError, "tint must be red, green or blue");
        write_images(synth_fractal_dataset(f_count, f_side, tint, rng).images, f_out);
      } else {
        const auto grid = diamond_square(f_k, f_rough, f_decay, rng);
        const Tensor image(Shape{1, grid.side(), grid.side()},
                           std::vector<float>(grid.values().begin(), grid.values().end()));
        write_images(Tensor::stack({image}), f_out);
      }
    } else if (*train_cmd) {
      const Dataset signed_data = to_signed(load_images(t_in));
      LayerSpec spec{signed_data.images.row_size(), {}};
      for (auto w : parse_shape(t_hidden)) spec.hidden.push_back(w);
      RngStream root(t_seed, 0);
      RngStream init = root.split(streams::kInit);
      RngStream train_rng = root.split(streams::kTrain);
      TinyDenoiser model = TinyDenoiser::initialized(spec, init);
      const auto result = train(model, signed_data.images, t_sched.build(), t_cfg, train_rng);
      save_checkpoint(model, t_out);
      std::string csv = "epoch,loss\n";
      for (std::size_t i = 0; i < result.epoch_loss.size(); ++i)
        csv += std::to_string(i + 1) + "," + format_double(result.epoch_loss[i]) + "\n";
      if (!t_loss.empty()) write_text(t_loss, csv);
      std::printf("final epoch loss %s over %zu parameters\n", format_double(result.epoch_loss.back()).c_str(),
                  model.parameter_count());
    } else if (*sample_cmd) {
      require(!s_ckpt.empty() || !s_fit.empty(), Errc::ConfigError, "sample needs --checkpoint or --fit");
      const NoiseSchedule sched = ScheduleSpec{s_T}.build();
      const SamplerConfig cfg{sampler_or_throw(s_sampler), s_steps, s_eta, s_seed};
      RngStream rng(s_seed, streams::kSample);
      Tensor out;
      if (!s_fit.empty()) {
        const Dataset data = to_signed(load_images(s_fit));
        const auto model = fit_analytic_predictor(data.images, sched);
        out = sample(model, s_count, data.image_shape(), sched, cfg, rng);
      } else {
        require(!s_shape.empty(), Errc::ConfigError, "--shape is required with --checkpoint");
        const auto model = load_checkpoint(s_ckpt);
        out = sample(model, s_count, parse_shape(s_shape), sched, cfg, rng);
      }
      write_images(to_unit(clamp_signed("samples", std::move(out))).images, s_out);
    } else if (*fid_cmd) {
      const FeatureMap map = parse_feature_map(fid_features);
      const auto r = fid_detail(load_images(fid_a).images, load_images(fid_b).images, map);
      std::printf("%s%s\n", format_double(r.value).c_str(), r.regularized ? " (regularized)" : "");
    } else if (*suite) {
      const SuiteConfig cfg = load_suite(r_config);
      std::filesystem::create_directories(r_out);
      const SuiteResult result = run_suite(cfg, SuiteOptions{r_workers, r_out + "/cells"});
      emit_report(result, ReportFormat::csv, r_out + "/results.csv");
      emit_report(result, ReportFormat::json, r_out + "/results.json");
      emit_report(result, ReportFormat::markdown, r_out + "/results.md");
      try {
        emit_severity_chart(result, r_out + "/severity.svg");
      } catch (const Error& e) {
        if (e.code() != Errc::InsufficientSeries) throw;
      }
      for (const auto& row : result.rows)
        if (row.failed())
          std::fprintf(stderr, "cell %s/%s/s%d/%s failed: %s\n", row.dataset.c_str(), row.corruption.c_str(),
                       row.severity, row.sampler.c_str(), row.error.c_str());
      std::printf("%zu rows, %zu failed, written to %s\n", result.rows.size(), result.failures(), r_out.c_str());
      return result.failures() > 0 ? kExitFailure : 0;
    } else if (*report) {
      const auto format = parse_report_format(p_format);
      require(format.has_value(), Errc::ConfigError, "unknown format '" + p_format + "'");
      const SuiteResult result = parse_csv(read_text(p_in));
      if (p_out.empty()) std::cout << render_report(result, *format);
      else emit_report(result, *format, p_out);
    } else if (*chart) {
      emit_severity_chart(parse_csv(read_text(h_in)), h_out, h_corruption);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == Errc::ConfigError ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return 0;
}
