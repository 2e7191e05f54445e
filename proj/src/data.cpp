#include "diffc/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>

#include "diffc/container.hpp"
#include "diffc/error.hpp"
#include "diffc/plasma.hpp"

namespace diffc {
namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;
constexpr std::size_t kMaxElements = std::size_t{1} << 32;

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  require(b.size() >= at + 4, Errc::TruncatedFile, "IDX header truncated");
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

float bound_low(PixelDomain d) { return d == PixelDomain::unit ? 0.0f : -1.0f; }
float bound_high(PixelDomain) { return 1.0f; }

/// Tokenizer for the ASCII part of a PNM header; skips '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(const std::vector<std::uint8_t>& b) : b_(b) {}

  std::string token() {
    skip_space();
    std::string out;
    while (pos_ < b_.size() && !std::isspace(b_[pos_])) out.push_back(static_cast<char>(b_[pos_++]));
    require(!out.empty(), Errc::TruncatedFile, "PNM header truncated");
    return out;
  }

  std::size_t number() {
    const auto t = token();
    require(std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
                t.size() <= 9,
            Errc::UnsupportedFormat, "bad PNM header field '" + t + "'");
    return static_cast<std::size_t>(std::stoul(t));
  }

  /// Exactly one whitespace byte separates the header from the body.
  std::size_t body_offset() {
    require(pos_ < b_.size() && std::isspace(b_[pos_]), Errc::TruncatedFile, "PNM header truncated");
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

Tensor reflect_crop(const Tensor& image, std::size_t pad, std::size_t dy, std::size_t dx) {
  const auto c = image.dim(0), h = image.dim(1), w = image.dim(2);
  auto reflect = [](long i, long n) {
    if (n == 1) return 0L;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  Tensor out(image.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const long sy = reflect(static_cast<long>(y + dy) - static_cast<long>(pad), static_cast<long>(h));
        const long sx = reflect(static_cast<long>(x + dx) - static_cast<long>(pad), static_cast<long>(w));
        out.at(ch, y, x) = image.at(ch, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
      }
  return out;
}

Tensor flip_horizontal(const Tensor& image) {
  Tensor out(image.shape());
  const auto w = image.dim(2);
  for (std::size_t c = 0; c < image.dim(0); ++c)
    for (std::size_t y = 0; y < image.dim(1); ++y)
      for (std::size_t x = 0; x < w; ++x) out.at(c, y, x) = image.at(c, y, w - 1 - x);
  return out;
}

/// Rotate a square image by 90° counter-clockwise.
Tensor rotate90(const Tensor& image) {
  Tensor out(image.shape());
  const auto n = image.dim(1);
  for (std::size_t c = 0; c < image.dim(0); ++c)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) out.at(c, n - 1 - x, y) = image.at(c, y, x);
  return out;
}

}  // namespace

std::string_view domain_name(PixelDomain domain) noexcept {
  return domain == PixelDomain::unit ? "unit" : "signed";
}

Dataset make_dataset(std::string name, Tensor images, PixelDomain domain, std::string provenance) {
  Dataset d{std::move(name), std::move(images), domain, bound_low(domain), bound_high(domain), {}, std::move(provenance)};
  validate(d);
  return d;
}

void validate(const Dataset& d) {
  require(d.images.rank() == 4 && d.images.dim(0) >= 1, Errc::EmptyDataset,
          "dataset '" + d.name + "' must be a nonempty N×C×H×W batch");
  require(d.images.dim(1) == 1 || d.images.dim(1) == 3, Errc::ShapeMismatch, "dataset channels must be 1 or 3");
  require(d.images.all_finite(), Errc::DomainMismatch, "dataset '" + d.name + "' has non-finite pixels");
  require(d.images.min_value() >= d.lower && d.images.max_value() <= d.upper, Errc::DomainMismatch,
          "dataset '" + d.name + "' has pixels outside its declared bounds");
  require(d.labels.empty() || d.labels.size() == d.count(), Errc::ShapeMismatch, "label count mismatch");
}

void require_domain(const Dataset& d, PixelDomain domain, std::string_view operation) {
  require(d.domain == domain, Errc::DomainMismatch,
          std::string(operation) + " requires the " + std::string(domain_name(domain)) + " domain, dataset '" +
              d.name + "' is " + std::string(domain_name(d.domain)));
}

Dataset load_idx(const std::string& path) {
  const auto bytes = read_file(path);
  const auto magic = read_be32(bytes, 0);
  require(magic == kIdxImages, Errc::BadMagic, path + " is not an IDX image file");
  const std::size_t n = read_be32(bytes, 4), h = read_be32(bytes, 8), w = read_be32(bytes, 12);
  require(n > 0 && h > 0 && w > 0, Errc::DimOverflow, "IDX dims must be positive");
  require(n <= kMaxElements / h && n * h <= kMaxElements / w, Errc::DimOverflow, "IDX dims overflow");
  const std::size_t count = n * h * w;
  require(bytes.size() >= 16 + count, Errc::TruncatedFile, path + " shorter than its header claims");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = static_cast<float>(bytes[16 + i]) / 255.0f;
  return make_dataset(path, Tensor(Shape{n, 1, h, w}, std::move(data)), PixelDomain::unit, "idx:" + path);
}

std::vector<int> load_idx_labels(const std::string& path) {
  const auto bytes = read_file(path);
  require(read_be32(bytes, 0) == kIdxLabels, Errc::BadMagic, path + " is not an IDX label file");
  const std::size_t n = read_be32(bytes, 4);
  require(bytes.size() >= 8 + n, Errc::TruncatedFile, path + " shorter than its header claims");
  return std::vector<int>(bytes.begin() + 8, bytes.begin() + 8 + static_cast<long>(n));
}

std::vector<std::uint8_t> encode_idx(const Tensor& images) {
  require(images.rank() == 4 && images.dim(1) == 1, Errc::ShapeMismatch, "IDX encodes N×1×H×W batches");
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxImages);
  put_be32(out, static_cast<std::uint32_t>(images.dim(0)));
  put_be32(out, static_cast<std::uint32_t>(images.dim(2)));
  put_be32(out, static_cast<std::uint32_t>(images.dim(3)));
  for (float v : images.data()) out.push_back(quantize(v));
  return out;
}

Tensor decode_ppm(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 2 && bytes[0] == 'P', Errc::UnsupportedFormat, "not a PNM file");
  const char kind = static_cast<char>(bytes[1]);
  require(kind == '5' || kind == '6', Errc::UnsupportedFormat, std::string("unsupported PNM type P") + kind);
  PnmHeader header(bytes);
  header.token();
  const std::size_t w = header.number(), h = header.number(), maxval = header.number();
  require(w > 0 && h > 0, Errc::UnsupportedFormat, "PNM dims must be positive");
  require(maxval == 255, Errc::UnsupportedFormat, "only maxval 255 is supported");
  const std::size_t channels = kind == '5' ? 1 : 3;
  const std::size_t body = header.body_offset();
  require(bytes.size() >= body + w * h * channels, Errc::TruncatedFile, "PNM body truncated");
  Tensor image(Shape{channels, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        image.at(c, y, x) = static_cast<float>(bytes[body + (y * w + x) * channels + c]) / 255.0f;
  return image;
}

std::vector<std::uint8_t> encode_ppm(const Tensor& image) {
  require(image.rank() == 3 && (image.dim(0) == 1 || image.dim(0) == 3), Errc::ShapeMismatch,
          "PNM encodes 1×H×W or 3×H×W images");
  const auto c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const std::string header = std::string(c == 1 ? "P5" : "P6") + "\n" + std::to_string(w) + " " +
                             std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) out.push_back(quantize(image.at(ch, y, x)));
  return out;
}

Dataset load_ppm(const std::string& path) {
  Tensor image = decode_ppm(read_file(path));
  return make_dataset(path, Tensor::stack({image}), PixelDomain::unit, "pnm:" + path);
}

void save_ppm(const Tensor& image, const std::string& path) { write_file(path, encode_ppm(image)); }

Dataset load_images(const std::string& path) {
  const auto bytes = read_file(path);
  require(bytes.size() >= 4, Errc::TruncatedFile, path + " is too short");
  if (std::memcmp(bytes.data(), "DFC1", 4) == 0) {
    auto tensors = decode_tensors(bytes);
    require(tensors.size() == 1, Errc::UnsupportedFormat, "image container must hold one tensor");
    Tensor t = std::move(tensors.front());
    if (t.rank() == 3) t = Tensor::stack({t});
    require(t.rank() == 4, Errc::ShapeMismatch, "image container must hold a rank-3 or rank-4 tensor");
    const bool is_unit = t.min_value() >= 0.0f;
    return make_dataset(path, std::move(t), is_unit ? PixelDomain::unit : PixelDomain::signed_unit, "dfc:" + path);
  }
  if (bytes[0] == 'P') return load_ppm(path);
  return load_idx(path);
}

Tensor image_grid(const Tensor& images, std::size_t max_images) {
  require(images.rank() == 4, Errc::ShapeMismatch, "image_grid expects N×C×H×W");
  const std::size_t n = std::min(images.dim(0), max_images);
  const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  const auto c = images.dim(1), h = images.dim(2), w = images.dim(3);
  Tensor grid(Shape{c, rows * (h + 1) + 1, cols * (w + 1) + 1});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t gy = 1 + (i / cols) * (h + 1), gx = 1 + (i % cols) * (w + 1);
    const auto src = images.row_span(i);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          grid.at(ch, gy + y, gx + x) = std::clamp(src[(ch * h + y) * w + x], 0.0f, 1.0f);
  }
  return grid;
}

Dataset to_signed(const Dataset& d) {
  require_domain(d, PixelDomain::unit, "to_signed");
  Dataset out = d;
  for (float& v : out.images.values()) v = static_cast<float>(2.0 * v - 1.0);
  out.domain = PixelDomain::signed_unit;
  out.lower = static_cast<float>(2.0 * d.lower - 1.0);
  out.upper = static_cast<float>(2.0 * d.upper - 1.0);
  return out;
}

Dataset to_unit(const Dataset& d) {
  require_domain(d, PixelDomain::signed_unit, "to_unit");
  Dataset out = d;
  for (float& v : out.images.values()) v = static_cast<float>((static_cast<double>(v) + 1.0) / 2.0);
  out.domain = PixelDomain::unit;
  out.lower = static_cast<float>((d.lower + 1.0) / 2.0);
  out.upper = static_cast<float>((d.upper + 1.0) / 2.0);
  return out;
}

Dataset clamp_signed(std::string name, Tensor images) {
  for (float& v : images.values()) v = std::clamp(v, -1.0f, 1.0f);
  return make_dataset(std::move(name), std::move(images), PixelDomain::signed_unit);
}

Dataset synth_gaussian_dataset(std::size_t n, const std::vector<double>& mean, const Matrix& cov,
                               const Shape& image_shape, RngStream& rng) {
  const std::size_t d = mean.size();
  require(n >= 1, Errc::EmptyDataset, "synth_gaussian_dataset needs n >= 1");
  require(shape_numel(image_shape) == d, Errc::ShapeMismatch, "image shape does not match mean dimension");
  GaussianStats stats{mean, cov};
  validate_gaussian(stats);
  const SymEig eig = sym_eig(cov);
  // Factor F = V·diag(√w)·Vᵀ so that F·z ~ N(0, Σ).
  Matrix scaled = eig.vectors;
  for (std::size_t k = 0; k < d; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0));
    for (std::size_t r = 0; r < d; ++r) scaled(r, k) *= root;
  }
  Matrix factor(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += scaled(i, k) * eig.vectors(j, k);
      factor(i, j) = acc;
    }

  Shape shape{n};
  shape.insert(shape.end(), image_shape.begin(), image_shape.end());
  Tensor images(shape);
  std::vector<double> z(d);
  for (std::size_t s = 0; s < n; ++s) {
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < d; ++i) {
      double acc = mean[i];
      for (std::size_t j = 0; j < d; ++j) acc += factor(i, j) * z[j];
      images[s * d + i] = static_cast<float>(acc);
    }
  }
  Dataset out{"gaussian", std::move(images), PixelDomain::signed_unit, 0.0f, 0.0f, {}, "synthetic gaussian"};
  out.lower = std::min(-1.0f, out.images.min_value());
  out.upper = std::max(1.0f, out.images.max_value());
  return out;
}

std::string_view tint_name(Tint tint) noexcept {
  switch (tint) {
    case Tint::red: return "red";
    case Tint::green: return "green";
    case Tint::blue: return "blue";
  }
  return "unknown";
}

Dataset synth_fractal_dataset(std::size_t n, std::size_t side, Tint tint, RngStream& rng) {
  require(side >= 2 && side <= 257, Errc::BadSide, "fractal side must be in [2, 257], got " + std::to_string(side));
  require(n >= 1, Errc::EmptyDataset, "synth_fractal_dataset needs n >= 1");
  constexpr double kRoughness = 1.0;
  constexpr double kDecay = 2.0;
  const int k = plasma_level_for(side);
  const std::size_t dominant = static_cast<std::size_t>(tint);
  Tensor images(Shape{n, 3, side, side});
  const std::size_t plane = side * side;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream child = rng.split(i);
    const Tensor plasma = resample_plasma(diamond_square(k, kRoughness, kDecay, child), side, side);
    auto row = images.row_span(i);
    for (std::size_t c = 0; c < 3; ++c) {
      const float gain = c == dominant ? 1.0f : 0.25f;
      for (std::size_t p = 0; p < plane; ++p) row[c * plane + p] = gain * plasma[p];
    }
  }
  return make_dataset("fractal_" + std::string(tint_name(tint)), std::move(images), PixelDomain::unit,
                      "synthetic diamond-square fractal, k=" + std::to_string(k) + ", roughness=1, decay=2, side=" +
                          std::to_string(side));
}

Dataset synth_toy_dataset(std::size_t n, std::size_t side, std::size_t channels, RngStream& rng) {
  require(side >= 2 && side <= 32, Errc::BadSide, "toy side must be in [2, 32]");
  require(channels == 1 || channels == 3, Errc::ShapeMismatch, "toy channels must be 1 or 3");
  constexpr double kVariance = 0.04;
  constexpr double kLengthScale = 2.0;
  const std::size_t d = side * side;
  Matrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dy = static_cast<double>(i / side) - static_cast<double>(j / side);
      const double dx = static_cast<double>(i % side) - static_cast<double>(j % side);
      cov(i, j) = kVariance * std::exp(-(dx * dx + dy * dy) / (2.0 * kLengthScale * kLengthScale));
    }
  const std::vector<double> mean(d, 0.5);
  Tensor images(Shape{n, channels, side, side});
  for (std::size_t c = 0; c < channels; ++c) {
    RngStream child = rng.split(c);
    const Dataset plane = synth_gaussian_dataset(n, mean, cov, Shape{d}, child);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < d; ++p)
        images[(i * channels + c) * d + p] = std::clamp(plane.images[i * d + p], 0.0f, 1.0f);
  }
  return make_dataset("toy", std::move(images), PixelDomain::unit,
                      "synthetic smooth gaussian field, variance 0.04, length scale 2, side=" + std::to_string(side));
}

Dataset augment(const Dataset& d, std::size_t factor, RngStream& rng) {
  require(factor >= 1, Errc::Precondition, "augmentation factor must be >= 1");
  validate(d);
  const std::size_t n = d.count();
  if (factor == 1) return d;
  const auto h = d.images.dim(2), w = d.images.dim(3);
  const std::size_t pad = std::max<std::size_t>(1, std::min(h, w) / 8);
  std::vector<Tensor> out;
  out.reserve(n * factor);
  for (std::size_t i = 0; i < n; ++i) out.push_back(d.images.row(i));
  for (std::size_t copy = 1; copy < factor; ++copy) {
    for (std::size_t i = 0; i < n; ++i) {
      Tensor img = d.images.row(i);
      if (rng.below(2) == 1) img = flip_horizontal(img);
      if (h == w) {
        const auto turns = rng.below(4);
        for (std::uint64_t t = 0; t < turns; ++t) img = rotate90(img);
      }
      const auto dy = static_cast<std::size_t>(rng.below(2 * pad + 1));
      const auto dx = static_cast<std::size_t>(rng.below(2 * pad + 1));
      out.push_back(reflect_crop(img, pad, dy, dx));
    }
  }
  Dataset result = d;
  result.images = Tensor::stack(out);
  if (!d.labels.empty()) {
    result.labels.clear();
    for (std::size_t copy = 0; copy < factor; ++copy) result.labels.insert(result.labels.end(), d.labels.begin(), d.labels.end());
  }
  result.provenance += "; augmented x" + std::to_string(factor);
  validate(result);
  return result;
}

}  // namespace diffc
