#include <gtest/gtest.h>

#include <cmath>

#include "diffc/container.hpp"
#include "diffc/data.hpp"
#include "test_util.hpp"

using namespace diffc;
using diffc::testing::scratch_dir;
using diffc::testing::throws_code;

namespace {

std::vector<std::uint8_t> idx_header(std::uint32_t magic, std::vector<std::uint32_t> dims) {
  std::vector<std::uint8_t> out;
  auto put = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  };
  put(magic);
  for (auto d : dims) put(d);
  return out;
}

std::string write_bytes(const std::string& dir, const std::string& name, const std::vector<std::uint8_t>& b) {
  const std::string path = dir + "/" + name;
  write_file(path, b);
  return path;
}

std::vector<float> channel_means(const Tensor& image) {
  const std::size_t hw = image.dim(1) * image.dim(2);
  std::vector<float> m(image.dim(0));
  for (std::size_t c = 0; c < m.size(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += image[c * hw + i];
    m[c] = static_cast<float>(s / hw);
  }
  return m;
}

}  // namespace

TEST(Container, RoundTripIsBitExact) {
  RngStream rng(1, 0);
  const Tensor a = gaussian_sample(rng, {2, 3, 4}), b = gaussian_sample(rng, {5});
  const std::string path = scratch_dir("container") + "/t.dfc";
  save_tensors(path, {a, b});
  const auto back = load_tensors(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], a);
  EXPECT_EQ(back[1], b);
  const auto bytes = encode_tensor(b);
  EXPECT_EQ(bytes.size(), 10u + 8 + 4 * 5);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DFC1");
}

TEST(Container, RejectsCorruptInput) {
  auto bytes = encode_tensor(Tensor(Shape{4}, 1.0f));
  bytes.pop_back();
  EXPECT_TRUE(throws_code([&] { decode_tensors(bytes); }, Errc::TruncatedFile));
  bytes[0] = 'X';
  EXPECT_TRUE(throws_code([&] { decode_tensors(bytes); }, Errc::BadMagic));
}

TEST(Idx, ByteScaling) {
  const auto dir = scratch_dir("idx");
  auto bytes = idx_header(0x803, {1, 2, 2});
  bytes.insert(bytes.end(), {0, 255, 128, 64});
  const auto d = load_idx(write_bytes(dir, "a.idx", bytes));
  ASSERT_EQ(d.images.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(d.images[0], 0.0f);
  EXPECT_EQ(d.images[1], 1.0f);
  EXPECT_FLOAT_EQ(d.images[2], 128.0f / 255);
  EXPECT_FLOAT_EQ(d.images[3], 64.0f / 255);
  EXPECT_EQ(d.domain, PixelDomain::unit);
}

TEST(Idx, Errors) {
  const auto dir = scratch_dir("idx_err");
  auto bad = idx_header(0x804, {1, 2, 2});
  bad.insert(bad.end(), 4, 0);
  EXPECT_TRUE(throws_code([&] { load_idx(write_bytes(dir, "bad.idx", bad)); }, Errc::BadMagic));
  auto short_body = idx_header(0x803, {2, 2, 2});
  short_body.insert(short_body.end(), 5, 0);
  EXPECT_TRUE(throws_code([&] { load_idx(write_bytes(dir, "short.idx", short_body)); }, Errc::TruncatedFile));
  const auto huge = idx_header(0x803, {0xffffffffu, 0xffffffffu, 0xffffffffu});
  EXPECT_TRUE(throws_code([&] { load_idx(write_bytes(dir, "huge.idx", huge)); }, Errc::DimOverflow));
  EXPECT_TRUE(throws_code([&] { load_idx(dir + "/missing.idx"); }, Errc::IoError));
}

TEST(Idx, EncodeRoundTripAndLabels) {
  const auto dir = scratch_dir("idx_rt");
  RngStream rng(2, 0);
  Tensor t(Shape{3, 1, 4, 5});
  for (float& v : t.values()) v = static_cast<float>(rng.below(256)) / 255.0f;
  const auto d = load_idx(write_bytes(dir, "rt.idx", encode_idx(t)));
  EXPECT_EQ(d.images, t);
  auto labels = idx_header(0x801, {3});
  labels.insert(labels.end(), {7, 0, 9});
  EXPECT_EQ(load_idx_labels(write_bytes(dir, "l.idx", labels)), (std::vector<int>{7, 0, 9}));
}

TEST(Ppm, RoundTripOfByteImage) {
  const auto dir = scratch_dir("ppm");
  RngStream rng(3, 0);
  for (std::size_t c : {1u, 3u}) {
    Tensor img(Shape{c, 5, 7});
    for (float& v : img.values()) v = static_cast<float>(rng.below(256)) / 255.0f;
    const std::string path = dir + (c == 1 ? "/a.pgm" : "/a.ppm");
    save_ppm(img, path);
    const auto bytes = read_file(path);
    const auto d = load_ppm(path);
    EXPECT_EQ(d.images.reshaped(img.shape()), img);
    EXPECT_EQ(encode_ppm(d.images.row(0)), bytes);
  }
}

TEST(Ppm, ChannelMajorLayout) {
  const std::string text = "P6\n# two pixels\n2 1\n255\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.insert(bytes.end(), {255, 0, 0, 0, 0, 255});
  const Tensor t = decode_ppm(bytes);
  ASSERT_EQ(t.shape(), (Shape{3, 1, 2}));
  EXPECT_EQ(t.at(0, 0, 0), 1.0f);
  EXPECT_EQ(t.at(2, 0, 0), 0.0f);
  EXPECT_EQ(t.at(0, 0, 1), 0.0f);
  EXPECT_EQ(t.at(2, 0, 1), 1.0f);
}

TEST(Ppm, Errors) {
  const std::string ascii = "P3\n1 1\n255\n0 0 0\n";
  EXPECT_TRUE(throws_code([&] { decode_ppm({ascii.begin(), ascii.end()}); }, Errc::UnsupportedFormat));
  const std::string deep = "P5\n1 1\n65535\n";
  std::vector<std::uint8_t> deep_bytes(deep.begin(), deep.end());
  deep_bytes.insert(deep_bytes.end(), {0, 0});
  EXPECT_TRUE(throws_code([&] { decode_ppm(deep_bytes); }, Errc::UnsupportedFormat));
  const std::string cut = "P5\n4 4\n255\n";
  std::vector<std::uint8_t> cut_bytes(cut.begin(), cut.end());
  cut_bytes.push_back(1);
  EXPECT_TRUE(throws_code([&] { decode_ppm(cut_bytes); }, Errc::TruncatedFile));
}

TEST(LoadImages, DetectsFormatByContent) {
  const auto dir = scratch_dir("load_images");
  const Tensor t(Shape{2, 1, 3, 3}, 0.5f);
  save_tensor(dir + "/x.bin", t);
  EXPECT_EQ(load_images(dir + "/x.bin").images, t);
  save_tensor(dir + "/one.bin", t.row(0));
  EXPECT_EQ(load_images(dir + "/one.bin").images.shape(), (Shape{1, 1, 3, 3}));
  save_ppm(Tensor(Shape{1, 3, 3}, 0.0f), dir + "/x.dat");
  EXPECT_EQ(load_images(dir + "/x.dat").count(), 1u);
}

TEST(Domain, AffineMapsAndInverse) {
  Tensor t(Shape{1, 1, 1, 3}, std::vector<float>{0.0f, 0.5f, 1.0f});
  const auto u = make_dataset("u", t, PixelDomain::unit);
  const auto s = to_signed(u);
  EXPECT_EQ(s.domain, PixelDomain::signed_unit);
  EXPECT_EQ(s.images[0], -1.0f);
  EXPECT_EQ(s.images[1], 0.0f);
  EXPECT_EQ(s.images[2], 1.0f);
  RngStream rng(1, 0);
  Tensor r(Shape{10, 1, 4, 4});
  for (float& v : r.values()) v = static_cast<float>(rng.uniform());
  const auto d = make_dataset("r", r, PixelDomain::unit);
  const auto back = to_unit(to_signed(d));
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(back.images[i], r[i], 1e-7);
  EXPECT_TRUE(throws_code([&] { to_unit(d); }, Errc::DomainMismatch));
  EXPECT_TRUE(throws_code([&] { to_signed(s); }, Errc::DomainMismatch));
}

TEST(Domain, ValidationRejectsOutOfRange) {
  EXPECT_TRUE(throws_code([] { make_dataset("x", Tensor(Shape{1, 1, 2, 2}, 1.5f), PixelDomain::unit); },
                          Errc::DomainMismatch));
  EXPECT_TRUE(throws_code([] { make_dataset("x", Tensor(Shape{1, 2, 2, 2}, 0.5f), PixelDomain::unit); },
                          Errc::ShapeMismatch));
  const auto c = clamp_signed("g", Tensor(Shape{1, 1, 1, 2}, std::vector<float>{-3.0f, 2.0f}));
  EXPECT_EQ(c.images[0], -1.0f);
  EXPECT_EQ(c.images[1], 1.0f);
}

TEST(Grid, Layout) {
  const Tensor imgs(Shape{5, 1, 2, 2}, 1.0f);
  const Tensor g = image_grid(imgs);
  // ceil(√5) = 3 columns, 2 rows, 1 px gutters.
  EXPECT_EQ(g.shape(), (Shape{1, 2 * 2 + 3, 3 * 2 + 4}));
  EXPECT_EQ(g.at(0, 1, 1), 1.0f);
  EXPECT_EQ(g.at(0, 0, 0), 0.0f);
}

TEST(SynthGaussian, ZeroCovarianceGivesMean) {
  RngStream rng(1, 0);
  const auto d = synth_gaussian_dataset(5, {0.1, 0.2, 0.3, 0.4}, Matrix(4, 4), {1, 2, 2}, rng);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(d.images[n * 4 + j], 0.1 * (j + 1), 1e-7);
}

TEST(SynthGaussian, MomentsAndDeterminism) {
  const Matrix cov = Matrix::diagonal(std::vector<double>{1.0, 4.0});
  RngStream a(2, 0), b(2, 0);
  const auto d = synth_gaussian_dataset(10000, {0.0, 0.0}, cov, {1, 1, 2}, a);
  EXPECT_EQ(d.images, synth_gaussian_dataset(10000, {0.0, 0.0}, cov, {1, 1, 2}, b).images);
  Matrix flat(10000, 2);
  for (std::size_t i = 0; i < 20000; ++i) flat.values()[i] = d.images[i];
  const auto s = mean_cov(flat);
  EXPECT_LT(std::abs(s.mean[0]), 0.05);
  EXPECT_LT(std::abs(s.mean[1]), 0.1);
  EXPECT_NEAR(s.cov(0, 0), 1.0, 0.1);
  EXPECT_NEAR(s.cov(1, 1), 4.0, 0.4);
  EXPECT_EQ(d.domain, PixelDomain::signed_unit);
  EXPECT_LE(d.lower, d.images.min_value());
  EXPECT_GE(d.upper, d.images.max_value());
}

TEST(SynthGaussian, Errors) {
  RngStream rng(1, 0);
  EXPECT_TRUE(throws_code(
      [&] { synth_gaussian_dataset(2, {0.0}, Matrix(1, 1, -1.0), {1, 1, 1}, rng); }, Errc::NotPSD));
  EXPECT_TRUE(throws_code(
      [&] { synth_gaussian_dataset(2, {0.0, 0.0}, Matrix::identity(2), {1, 1, 1}, rng); }, Errc::ShapeMismatch));
}

TEST(SynthFractal, TintOrdersChannelMeans) {
  RngStream rng(3, 0);
  const auto d = synth_fractal_dataset(20, 16, Tint::red, rng);
  ASSERT_EQ(d.images.shape(), (Shape{20, 3, 16, 16}));
  for (std::size_t n = 0; n < 20; ++n) {
    const auto m = channel_means(d.images.row(n));
    EXPECT_GT(m[0], m[1]);
    EXPECT_EQ(m[1], m[2]);
  }
  RngStream g(3, 0);
  const auto green = synth_fractal_dataset(4, 16, Tint::green, g);
  const auto m = channel_means(green.images.row(0));
  EXPECT_GT(m[1], m[0]);
}

TEST(SynthFractal, DeterministicAndBounded) {
  RngStream a(4, 0), b(4, 0);
  EXPECT_EQ(synth_fractal_dataset(8, 32, Tint::blue, a).images, synth_fractal_dataset(8, 32, Tint::blue, b).images);
  RngStream c(4, 0);
  EXPECT_TRUE(throws_code([&] { synth_fractal_dataset(1, 258, Tint::red, c); }, Errc::BadSide));
  EXPECT_TRUE(throws_code([&] { synth_fractal_dataset(1, 1, Tint::red, c); }, Errc::BadSide));
}

TEST(SynthFractal, HistogramSpansUnitRange) {
  RngStream rng(5, 0);
  const auto d = synth_fractal_dataset(2000, 32, Tint::red, rng);
  double min_sum = 0.0, max_sum = 0.0;
  const std::size_t hw = 32 * 32;
  for (std::size_t n = 0; n < 2000; ++n) {
    const auto span = d.images.row_span(n).subspan(0, hw);  // dominant channel
    min_sum += *std::min_element(span.begin(), span.end());
    max_sum += *std::max_element(span.begin(), span.end());
  }
  EXPECT_LT(min_sum / 2000, 0.05);
  EXPECT_GT(max_sum / 2000, 0.95);
}

TEST(SynthToy, ShapeRangeAndDeterminism) {
  RngStream a(6, 0), b(6, 0);
  const auto d = synth_toy_dataset(16, 8, 3, a);
  EXPECT_EQ(d.images.shape(), (Shape{16, 3, 8, 8}));
  EXPECT_GE(d.images.min_value(), 0.0f);
  EXPECT_LE(d.images.max_value(), 1.0f);
  EXPECT_EQ(d.images, synth_toy_dataset(16, 8, 3, b).images);
}

TEST(Augment, FactorOneUnchanged) {
  RngStream rng(7, 0);
  const auto d = synth_toy_dataset(10, 8, 1, rng);
  EXPECT_EQ(augment(d, 1, rng).images, d.images);
}

TEST(Augment, ElevenfoldOnTwoThousand) {
  RngStream rng(8, 0);
  const auto d = synth_fractal_dataset(2000, 8, Tint::green, rng);
  const auto a = augment(d, 11, rng);
  EXPECT_EQ(a.count(), 22000u);
  EXPECT_GE(a.images.min_value(), 0.0f);
  EXPECT_LE(a.images.max_value(), 1.0f);
  for (std::size_t n = 0; n < 2000; n += 199) EXPECT_EQ(a.images.row(n), d.images.row(n));
}

TEST(Augment, LabelsRepeated) {
  RngStream rng(9, 0);
  auto d = synth_toy_dataset(3, 4, 1, rng);
  d.labels = {4, 5, 6};
  const auto a = augment(d, 3, rng);
  EXPECT_EQ(a.labels, (std::vector<int>{4, 5, 6, 4, 5, 6, 4, 5, 6}));
}
