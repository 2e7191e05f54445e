#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <regex>

#include "diffc/config.hpp"
#include "diffc/container.hpp"
#include "diffc/harness.hpp"
#include "diffc/report.hpp"
#include "test_util.hpp"

using namespace diffc;
using diffc::testing::scratch_dir;
using diffc::testing::throws_code;

namespace {

std::string suite_text(const std::string& kinds, const std::string& severities, const std::string& samplers,
                       const std::string& extra = {}) {
  return "[suite]\nname = t\nmaster_seed = 11\n"
         "[dataset toy]\nsource = toy\nside = 8\ncount = 96\n"
         "[corruptions]\nkinds = " + kinds + "\nseverities = " + severities + "\n"
         "[model]\nkind = analytic\n"
         "[schedule]\nsteps = 50\n"
         "[samplers]\nkinds = " + samplers + "\nddim_steps = 10\nsamples = 96\n" + extra;
}

std::string fixture(const std::string& name) { return read_text(std::string(DIFFC_FIXTURE_DIR) + "/" + name); }

std::vector<std::pair<double, double>> path_points(const std::string& svg) {
  const std::regex path_re("<path class=\"series\" d=\"([^\"]*)\"");
  std::smatch m;
  std::vector<std::pair<double, double>> pts;
  if (!std::regex_search(svg, m, path_re)) return pts;
  const std::string d = m[1];
  const std::regex pt_re("([0-9.]+),([0-9.]+)");
  for (auto it = std::sregex_iterator(d.begin(), d.end(), pt_re); it != std::sregex_iterator(); ++it)
    pts.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  return pts;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Config, ParsesSuite) {
  const auto cfg = parse_suite(suite_text("identity, fog", "1, 3", "ddpm, ddim"));
  EXPECT_EQ(cfg.name, "t");
  EXPECT_EQ(cfg.master_seed, 11u);
  ASSERT_EQ(cfg.datasets.size(), 1u);
  EXPECT_EQ(cfg.datasets[0].side, 8u);
  EXPECT_EQ(cfg.corruptions, (std::vector<CorruptionKind>{CorruptionKind::Identity, CorruptionKind::Fog}));
  EXPECT_EQ(cfg.severities, (std::vector<int>{1, 3}));
  EXPECT_EQ(cfg.schedule.steps, 50);
  EXPECT_EQ(cfg.cells().size(), 8u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      parse_suite(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::ConfigError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(suite_text("fog", "1", "ddpm", "[model]\n")).find("line"), std::string::npos);
  EXPECT_NE(message("[suite]\ncolour = red\n").find("line 2"), std::string::npos);
  EXPECT_NE(message(suite_text("fog", "1", "ddpm", "[suite]\n")).find("duplicate"), std::string::npos);
  EXPECT_NE(message(suite_text("smog", "1", "ddpm")).find("smog"), std::string::npos);
  EXPECT_NE(message(suite_text("fog", "6", "ddpm")).find("line"), std::string::npos);
}

TEST(Config, EmptyListsRejected) {
  EXPECT_TRUE(throws_code([] { parse_suite(suite_text("", "1", "ddpm")); }, Errc::ConfigError));
  EXPECT_TRUE(throws_code([] { parse_suite(suite_text("fog", "", "ddpm")); }, Errc::ConfigError));
  EXPECT_TRUE(throws_code([] { parse_suite("[suite]\nname = x\n"); }, Errc::ConfigError));
  EXPECT_TRUE(throws_code([] { load_suite("/nonexistent/suite.cfg"); }, Errc::ConfigError));
}

TEST(Config, IntrinsicModeNeedsFractalSource) {
  const std::string text = suite_text("fog", "1", "ddpm");
  const auto bad = std::regex_replace(text, std::regex("source = toy"), "source = toy\nmode = intrinsic");
  EXPECT_TRUE(throws_code([&] { parse_suite(bad); }, Errc::ConfigError));
  const auto good = std::regex_replace(text, std::regex("source = toy"), "source = fractal\nmode = intrinsic");
  EXPECT_EQ(parse_suite(good).datasets[0].mode, ExperimentMode::intrinsic);
}

TEST(Config, ExperimentConfigRoundTrips) {
  auto cfg = parse_suite(suite_text("impulse, fog", "2, 5", "ddpm, ddim"));
  cfg.model.kind = ModelKind::tiny;
  cfg.model.hidden = {32, 16};
  cfg.features = FeatureMap::projection(32, 9);
  for (const auto& spec : cfg.cells()) {
    const auto back = parse_suite(experiment_config(spec)).cells();
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], spec);
    EXPECT_EQ(spec_digest(back[0]), spec_digest(spec));
  }
}

TEST(Config, ShippedConfigsParse) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(DIFFC_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    SCOPED_TRACE(entry.path().string());
    const SuiteConfig cfg = load_suite(entry.path().string());
    EXPECT_FALSE(cfg.cells().empty());
    ++seen;
  }
  EXPECT_GE(seen, 2u);
}

TEST(Config, CellSeedsDistinctAndStable) {
  const auto cells = parse_suite(suite_text("identity, fog, impulse", "1, 2, 3", "ddpm, ddim")).cells();
  std::vector<std::uint64_t> seeds;
  for (const auto& c : cells) seeds.push_back(c.sampler.seed);
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
  EXPECT_EQ(cell_seed(11, "toy", CorruptionKind::Fog, 3, SamplerKind::ddim),
            cell_seed(11, "toy", CorruptionKind::Fog, 3, SamplerKind::ddim));
  EXPECT_EQ(text_hash(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Suite, TwoCellGrid) {
  const auto r = run_suite(parse_suite(suite_text("fog, identity", "1", "ddpm")));
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].corruption, "identity");
  EXPECT_EQ(r.rows[1].corruption, "fog");
  EXPECT_EQ(r.failures(), 0u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.max_score, std::max(row.fid_corrupted_ref, row.fid_clean_ref));
    EXPECT_EQ(row.steps, 50);
    EXPECT_EQ(row.feature_map, "raw");
  }
  EXPECT_NEAR(r.rows[0].fid_corrupted_ref, r.rows[0].fid_clean_ref, 1e-6);
  EXPECT_EQ(r.version, kArtifactVersion);
}

TEST(Suite, SeveritySweepHasFiveRows) {
  const auto r = run_suite(parse_suite(suite_text("fog", "5, 4, 3, 2, 1", "ddim")));
  ASSERT_EQ(r.rows.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(r.rows[i].severity, i + 1);
  EXPECT_EQ(r.rows[0].steps, 10);
}

TEST(Suite, IdenticalAcrossWorkerCounts) {
  const auto cfg = parse_suite(suite_text("identity, impulse, fog", "1, 3", "ddpm, ddim"));
  const auto one = render_csv(run_suite(cfg, {1, {}}));
  const auto four = render_csv(run_suite(cfg, {4, {}}));
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, render_csv(run_suite(cfg, {1, {}})));
}

TEST(Suite, CellIsolation) {
  const auto full = run_suite(parse_suite(suite_text("identity, fog", "1, 2", "ddpm")));
  const auto part = run_suite(parse_suite(suite_text("fog", "2", "ddpm")));
  ASSERT_EQ(part.rows.size(), 1u);
  const auto it = std::find_if(full.rows.begin(), full.rows.end(),
                               [](const SuiteRow& r) { return r.corruption == "fog" && r.severity == 2; });
  ASSERT_NE(it, full.rows.end());
  EXPECT_EQ(*it, part.rows[0]);
}

TEST(Suite, FailedCellDoesNotAbortSiblings) {
  const std::string text =
      "[suite]\nname = f\nmaster_seed = 3\n"
      "[dataset big]\nsource = toy\nside = 4\ncount = 64\n"
      "[dataset small]\nsource = toy\nside = 4\ncount = 16\n"
      "[corruptions]\nkinds = identity\nseverities = 1\n"
      "[model]\nkind = tiny\nhidden = 16\nepochs = 1\nbatch_size = 32\n"
      "[schedule]\nsteps = 20\n"
      "[samplers]\nkinds = ddpm\nsamples = 64\n";
  const auto r = run_suite(parse_suite(text));
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.failures(), 1u);
  const auto& bad = r.rows[0].dataset == "small" ? r.rows[0] : r.rows[1];
  const auto& good = r.rows[0].dataset == "small" ? r.rows[1] : r.rows[0];
  EXPECT_NE(bad.error.find("EmptyDataset"), std::string::npos) << bad.error;
  EXPECT_FALSE(good.failed()) << good.error;
  EXPECT_GT(good.train_loss_final, 0.0);
  const auto csv = render_csv(r);
  EXPECT_NE(csv.find("small,identity,1,overlay,tiny,ddpm,20,,,,,,"), std::string::npos) << csv;
}

TEST(Experiment, DeterministicWithArtifacts) {
  const auto spec = parse_suite(suite_text("fog", "3", "ddpm")).cells()[0];
  const auto a = run_experiment(spec), b = run_experiment(spec);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.fid.max_score, b.fid.max_score);
  const auto da = scratch_dir("artifacts_a"), db = scratch_dir("artifacts_b");
  save_artifacts(a, da);
  save_artifacts(b, db);
  for (const char* f : {"samples.ppm", "loss.csv"}) EXPECT_EQ(read_file(da + "/" + f), read_file(db + "/" + f)) << f;
  EXPECT_GE(a.samples.min_value(), 0.0f);
  EXPECT_LE(a.samples.max_value(), 1.0f);
}

TEST(Experiment, IdentityOnGaussianFieldDataIsAtNoiseFloor) {
  auto spec = parse_suite(suite_text("identity", "1", "ddpm")).cells()[0];
  spec.dataset.count = 2000;
  spec.samples = 2000;
  spec.schedule.steps = 200;
  const auto r = run_experiment(spec);
  EXPECT_NEAR(r.fid.fid_corrupted_ref, r.fid.fid_clean_ref, 1e-6);
  // Same-distribution FID between two independent draws of the dataset.
  const double floor = fid(build_dataset(spec.dataset, 1).images, build_dataset(spec.dataset, 2).images,
                           FeatureMap::raw());
  EXPECT_LT(r.fid.fid_clean_ref, 2.0 * floor) << "floor " << floor;
}

TEST(Experiment, IntrinsicFractalMode) {
  auto spec = parse_suite(suite_text("identity", "1", "ddim")).cells()[0];
  spec.dataset.source = DatasetSource::fractal;
  spec.dataset.channels = 3;
  spec.dataset.side = 4;
  spec.dataset.mode = ExperimentMode::intrinsic;
  spec.samples = 128;
  spec.dataset.count = 128;
  const auto r = run_experiment(spec);
  EXPECT_EQ(r.samples.shape(), (Shape{128, 3, 4, 4}));
  EXPECT_NEAR(r.fid.fid_corrupted_ref, r.fid.fid_clean_ref, 1e-6);
}

TEST(Report, CsvRoundTripIsByteIdentical) {
  const auto r = run_suite(parse_suite(suite_text("identity", "1", "ddpm")));
  const auto csv = render_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_EQ(count_of(csv, "\n"), 2u);
  EXPECT_EQ(render_csv(parse_csv(csv)), csv);
  EXPECT_TRUE(throws_code([] { parse_csv("a,b\n"); }, Errc::UnsupportedFormat));
  EXPECT_TRUE(throws_code([] { render_report(SuiteResult{}, ReportFormat::csv); }, Errc::Precondition));
}

TEST(Report, JsonMirrorsRows) {
  const auto r = run_suite(parse_suite(suite_text("identity, fog", "1", "ddpm")));
  const auto json = render_json(r);
  EXPECT_EQ(count_of(json, "\"corruption\""), 2u);
  EXPECT_NE(json.find("\"version\": \"0.1.0\""), std::string::npos);
  EXPECT_NE(json.find("\"feature_map\": \"raw\""), std::string::npos);
}

TEST(Report, MarkdownColumnsFollowGroupOrder) {
  const auto r = run_suite(parse_suite(suite_text("fog, impulse, identity", "1", "ddpm")));
  const auto md = render_markdown(r);
  const auto header = md.substr(0, md.find('\n'));
  EXPECT_EQ(header, "| dataset | mode | model | sampler | severity | identity | impulse | fog |");
  EXPECT_NE(md.find("| *group* |  |  |  |  | *Clear* | *Noise* | *Weather* |"), std::string::npos);
}

TEST(Report, ReferenceTableFixtureRenders) {
  const auto r = parse_csv(fixture("reference_mnist.csv"));
  const auto md = render_markdown(r);
  EXPECT_NE(md.find("| dataset | mode | model | sampler | severity | identity | fog |"), std::string::npos);
  EXPECT_NE(md.find("| mnist | overlay | unet | ddpm | 1 | 11.45 | 33.73 |"), std::string::npos) << md;
  EXPECT_EQ(render_csv(r), fixture("reference_mnist.csv"));
}

TEST(Chart, StructureAndDeterminism) {
  const auto r = run_suite(parse_suite(suite_text("fog", "1, 2, 3, 4, 5", "ddpm")));
  const auto svg = render_severity_chart(r);
  EXPECT_EQ(count_of(svg, "<g class=\"xtick\">"), 5u);
  EXPECT_EQ(count_of(svg, "<path class=\"series\""), 1u);
  EXPECT_EQ(path_points(svg).size(), 5u);
  EXPECT_EQ(svg, render_severity_chart(r));
  const auto single = run_suite(parse_suite(suite_text("fog", "1", "ddpm")));
  EXPECT_TRUE(throws_code([&] { render_severity_chart(single); }, Errc::InsufficientSeries));
  EXPECT_TRUE(throws_code([&] { render_severity_chart(r, "identity"); }, Errc::InsufficientSeries));
}

TEST(Chart, ReferenceSweepDipsThenRises) {
  const auto svg = render_severity_chart(parse_csv(fixture("reference_fog_sweep.csv")));
  const auto pts = path_points(svg);
  ASSERT_EQ(pts.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_GT(pts[i].first, pts[i - 1].first);
  // Screen y grows downward, so a falling score means a growing y.
  EXPECT_LT(pts[0].second, pts[1].second);
  EXPECT_LT(pts[1].second, pts[2].second);
  EXPECT_GT(pts[2].second, pts[3].second);
  EXPECT_GT(pts[3].second, pts[4].second);
  EXPECT_LT(pts[0].second, pts[4].second);
}

TEST(Chart, EmitWritesFile) {
  const auto dir = scratch_dir("chart");
  const auto r = parse_csv(fixture("reference_fog_sweep.csv"));
  emit_severity_chart(r, dir + "/c.svg");
  EXPECT_EQ(read_text(dir + "/c.svg"), render_severity_chart(r));
}
