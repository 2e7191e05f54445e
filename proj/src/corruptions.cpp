#include "diffc/corruptions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "diffc/error.hpp"
#include "diffc/kernels.hpp"
#include "diffc/plasma.hpp"

namespace diffc {
namespace {

struct NamedKind {
  CorruptionKind kind;
  std::string_view name;
  std::string_view group;
};

constexpr std::array<NamedKind, 9> kNames{{
    {CorruptionKind::Identity, "identity", "Clear"},
    {CorruptionKind::ImpulseNoise, "impulse", "Noise"},
    {CorruptionKind::ShotNoise, "shot", "Noise"},
    {CorruptionKind::GlassBlur, "glass", "Blur"},
    {CorruptionKind::MotionBlur, "motion", "Blur"},
    {CorruptionKind::Brightness, "brightness", "Weather"},
    {CorruptionKind::Fog, "fog", "Weather"},
    {CorruptionKind::Spatter, "spatter", "Extra"},
    {CorruptionKind::FractalOverlay, "fractal_overlay", "Extra"},
}};

// Severity tables, one entry per level 1..5.
constexpr std::array<double, 5> kImpulse{0.03, 0.06, 0.09, 0.17, 0.27};
constexpr std::array<double, 5> kShot{60, 25, 12, 5, 3};
constexpr std::array<GlassParams, 5> kGlass{{{0.7, 1, 2}, {0.9, 2, 1}, {1.0, 2, 3}, {1.1, 3, 2}, {1.5, 4, 2}}};
constexpr std::array<int, 5> kMotion{5, 7, 9, 11, 13};
constexpr std::array<double, 5> kBrightness{0.1, 0.2, 0.3, 0.4, 0.5};
constexpr std::array<FogParams, 5> kFog{{{1.5, 2.0}, {2.0, 2.0}, {2.5, 1.7}, {2.5, 1.5}, {3.0, 1.4}}};
constexpr std::array<SpatterParams, 5> kSpatter{
    {{1.0, 0.65, 0.3}, {1.0, 0.6, 0.35}, {1.0, 0.55, 0.4}, {1.5, 0.5, 0.45}, {1.5, 0.45, 0.5}}};
constexpr std::array<double, 5> kOverlay{0.1, 0.2, 0.3, 0.4, 0.5};

constexpr double kOverlayDecay = 2.0;
constexpr double kPlasmaRoughness = 1.0;

void clamp_unit(Tensor& t) {
  for (float& v : t.values()) v = std::clamp(v, 0.0f, 1.0f);
}

Tensor plasma_for(const Tensor& image, double decay, RngStream& rng) {
  const auto h = image.dim(1), w = image.dim(2);
  const PlasmaGrid grid = diamond_square(plasma_level_for(std::max(h, w)), kPlasmaRoughness, decay, rng);
  return resample_plasma(grid, h, w);
}

Tensor impulse_noise(const Tensor& image, double fraction, RngStream& rng) {
  Tensor out = image;
  for (float& v : out.values()) {
    if (rng.uniform() < fraction) v = rng.uniform() < 0.5 ? 1.0f : 0.0f;
  }
  return out;
}

Tensor shot_noise(const Tensor& image, double photons, RngStream& rng) {
  Tensor out = image;
  for (float& v : out.values()) v = static_cast<float>(static_cast<double>(rng.poisson(v * photons)) / photons);
  clamp_unit(out);
  return out;
}

Tensor glass_blur(const Tensor& image, const GlassParams& p, RngStream& rng) {
  const auto extent = std::min(image.dim(1), image.dim(2));
  const Tensor blur = gaussian_kernel(p.sigma, extent);
  Tensor x = conv2d(image, blur, Padding::reflect);
  const long h = static_cast<long>(image.dim(1));
  const long w = static_cast<long>(image.dim(2));
  const long r = p.radius;
  for (int it = 0; it < p.iterations; ++it) {
    for (long y = h - r; y > r; --y) {
      for (long xx = w - r; xx > r; --xx) {
        // Offsets in [−r, r) on each axis.
        const long dx = static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * r))) - r;
        const long dy = static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * r))) - r;
        const long ys = y + dy, xs = xx + dx;
        if (y >= h || xx >= w || ys < 0 || xs < 0 || ys >= h || xs >= w) continue;
        for (std::size_t c = 0; c < x.dim(0); ++c)
          std::swap(x.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)),
                    x.at(c, static_cast<std::size_t>(ys), static_cast<std::size_t>(xs)));
      }
    }
  }
  Tensor out = conv2d(x, blur, Padding::reflect);
  clamp_unit(out);
  return out;
}

Tensor motion_blur(const Tensor& image, int length, RngStream& rng) {
  const double angle = rng.uniform(0.0, std::numbers::pi);
  Tensor out = conv2d(image, motion_kernel(length, angle), Padding::reflect);
  clamp_unit(out);
  return out;
}

Tensor brightness(const Tensor& image, double shift) {
  Tensor out = image;
  for (float& v : out.values()) v = static_cast<float>(std::clamp(v + shift, 0.0, 1.0));
  return out;
}

Tensor spatter(const Tensor& image, const SpatterParams& p, RngStream& rng) {
  const auto h = image.dim(1), w = image.dim(2);
  Tensor field = gaussian_sample(rng, Shape{1, h, w});
  field = conv2d(field, gaussian_kernel(p.sigma, std::min(h, w)), Padding::reflect);
  const float lo = field.min_value();
  const float range = field.max_value() - lo;
  Tensor out = image;
  for (std::size_t i = 0; i < h * w; ++i) {
    const double level = range > 0.0f ? (field[i] - lo) / range : 0.0;
    if (level < p.threshold) continue;
    for (std::size_t c = 0; c < image.dim(0); ++c) {
      float& v = out[c * h * w + i];
      v = static_cast<float>(v + p.weight * (1.0 - v));
    }
  }
  clamp_unit(out);
  return out;
}

Tensor fractal_overlay(const Tensor& image, double beta, RngStream& rng) {
  const Tensor plasma = plasma_for(image, kOverlayDecay, rng);
  const std::size_t plane = image.dim(1) * image.dim(2);
  Tensor out(image.shape());
  for (std::size_t c = 0; c < image.dim(0); ++c)
    for (std::size_t i = 0; i < plane; ++i)
      out[c * plane + i] = static_cast<float>((1.0 - beta) * image[c * plane + i] + beta * plasma[i]);
  clamp_unit(out);
  return out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view corruption_name(CorruptionKind kind) noexcept {
  for (const auto& n : kNames)
    if (n.kind == kind) return n.name;
  return "unknown";
}

std::optional<CorruptionKind> parse_corruption(std::string_view name) noexcept {
  for (const auto& n : kNames)
    if (n.name == name) return n.kind;
  return std::nullopt;
}

std::string_view corruption_group(CorruptionKind kind) noexcept {
  for (const auto& n : kNames)
    if (n.kind == kind) return n.group;
  return "unknown";
}

int corruption_order(CorruptionKind kind) noexcept {
  for (std::size_t i = 0; i < kAllCorruptions.size(); ++i)
    if (kAllCorruptions[i] == kind) return static_cast<int>(i);
  return -1;
}

Severity::Severity(int level) : level_(level) {
  require(level >= 1 && level <= 5, Errc::Precondition, "severity must be in [1, 5], got " + std::to_string(level));
}

SeverityParams severity_params(CorruptionKind kind, Severity severity) {
  const auto i = static_cast<std::size_t>(severity.level() - 1);
  switch (kind) {
    case CorruptionKind::Identity: return IdentityParams{};
    case CorruptionKind::ImpulseNoise: return ImpulseParams{kImpulse[i]};
    case CorruptionKind::ShotNoise: return ShotParams{kShot[i]};
    case CorruptionKind::GlassBlur: return kGlass[i];
    case CorruptionKind::MotionBlur: return MotionParams{kMotion[i]};
    case CorruptionKind::Brightness: return BrightnessParams{kBrightness[i]};
    case CorruptionKind::Fog: return kFog[i];
    case CorruptionKind::Spatter: return kSpatter[i];
    case CorruptionKind::FractalOverlay: return OverlayParams{kOverlay[i]};
  }
  throw Error(Errc::Precondition, "unknown corruption kind");
}

std::vector<std::pair<std::string, double>> param_values(const SeverityParams& params) {
  using Row = std::vector<std::pair<std::string, double>>;
  return std::visit(
      Overloaded{
          [](const IdentityParams&) { return Row{}; },
          [](const ImpulseParams& p) { return Row{{"fraction", p.fraction}}; },
          [](const ShotParams& p) { return Row{{"photons", p.photons}}; },
          [](const GlassParams& p) {
            return Row{{"sigma", p.sigma}, {"radius", p.radius}, {"iterations", p.iterations}};
          },
          [](const MotionParams& p) { return Row{{"length", p.length}}; },
          [](const BrightnessParams& p) { return Row{{"shift", p.shift}}; },
          [](const FogParams& p) { return Row{{"strength", p.strength}, {"decay", p.decay}}; },
          [](const SpatterParams& p) {
            return Row{{"sigma", p.sigma}, {"threshold", p.threshold}, {"weight", p.weight}};
          },
          [](const OverlayParams& p) { return Row{{"beta", p.beta}}; },
      },
      params);
}

CorruptionSpec CorruptionSpec::make(CorruptionKind kind, Severity severity) {
  return CorruptionSpec(kind, severity, severity_params(kind, severity));
}

Tensor gaussian_kernel(double sigma, std::size_t max_extent) {
  require(sigma > 0.0, Errc::Precondition, "gaussian sigma must be positive");
  require(max_extent >= 1, Errc::Precondition, "gaussian kernel extent must be positive");
  auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  radius = std::min(radius, (max_extent - 1) / 2);
  const std::size_t k = 2 * radius + 1;
  Tensor kernel(Shape{k, k});
  double total = 0.0;
  for (std::size_t y = 0; y < k; ++y)
    for (std::size_t x = 0; x < k; ++x) {
      const double dy = static_cast<double>(y) - static_cast<double>(radius);
      const double dx = static_cast<double>(x) - static_cast<double>(radius);
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kernel[y * k + x] = static_cast<float>(v);
      total += v;
    }
  for (float& v : kernel.values()) v = static_cast<float>(v / total);
  return kernel;
}

Tensor motion_kernel(int length, double angle) {
  require(length >= 1 && length % 2 == 1, Errc::Precondition, "motion kernel length must be odd and positive");
  const auto k = static_cast<std::size_t>(length);
  const long centre = length / 2;
  Tensor kernel(Shape{k, k});
  const double cs = std::cos(angle), sn = std::sin(angle);
  double total = 0.0;
  for (long s = -centre; s <= centre; ++s) {
    const long x = centre + std::lround(static_cast<double>(s) * cs);
    const long y = centre - std::lround(static_cast<double>(s) * sn);
    kernel[static_cast<std::size_t>(y) * k + static_cast<std::size_t>(x)] += 1.0f;
    total += 1.0;
  }
  for (float& v : kernel.values()) v = static_cast<float>(v / total);
  return kernel;
}

Tensor apply_corruption(const Tensor& image, const CorruptionSpec& spec, RngStream& rng) {
  require(image.rank() == 3, Errc::ShapeMismatch, "corruption expects a C×H×W image, got " + shape_str(image.shape()));
  require(image.min_value() >= 0.0f && image.max_value() <= 1.0f, Errc::DomainMismatch,
          "corruption expects pixels in [0, 1]");
  return std::visit(
      Overloaded{
          [&](const IdentityParams&) { return image; },
          [&](const ImpulseParams& p) { return impulse_noise(image, p.fraction, rng); },
          [&](const ShotParams& p) { return shot_noise(image, p.photons, rng); },
          [&](const GlassParams& p) { return glass_blur(image, p, rng); },
          [&](const MotionParams& p) { return motion_blur(image, p.length, rng); },
          [&](const BrightnessParams& p) { return brightness(image, p.shift); },
          [&](const FogParams& p) { return fog_blend(image, plasma_for(image, p.decay, rng), p.strength); },
          [&](const SpatterParams& p) { return spatter(image, p, rng); },
          [&](const OverlayParams& p) { return fractal_overlay(image, p.beta, rng); },
      },
      spec.params());
}

Tensor apply_corruption_batch(const Tensor& images, const CorruptionSpec& spec, const RngStream& rng) {
  require(images.rank() == 4, Errc::ShapeMismatch, "batch corruption expects N×C×H×W");
  Tensor out(images.shape());
  for (std::size_t i = 0; i < images.dim(0); ++i) {
    RngStream child = rng.split(i);
    out.set_row(i, apply_corruption(images.row(i), spec, child));
  }
  return out;
}

}  // namespace diffc
