#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "diffc/rng.hpp"
#include "diffc/tensor.hpp"

namespace diffc {

enum class CorruptionKind {
  Identity,
  ImpulseNoise,
  ShotNoise,
  GlassBlur,
  MotionBlur,
  Brightness,
  Fog,
  Spatter,
  FractalOverlay,
};

/// All kinds, in report column order (Clear, Noise, Blur, Weather, Extra).
inline constexpr std::array<CorruptionKind, 9> kAllCorruptions{
    CorruptionKind::Identity,   CorruptionKind::ImpulseNoise, CorruptionKind::ShotNoise,
    CorruptionKind::GlassBlur,  CorruptionKind::MotionBlur,   CorruptionKind::Brightness,
    CorruptionKind::Fog,        CorruptionKind::Spatter,      CorruptionKind::FractalOverlay,
};

std::string_view corruption_name(CorruptionKind kind) noexcept;
std::optional<CorruptionKind> parse_corruption(std::string_view name) noexcept;
/// Table-1 style column group: Clear, Noise, Blur, Weather or Extra.
std::string_view corruption_group(CorruptionKind kind) noexcept;
/// Position in kAllCorruptions.
int corruption_order(CorruptionKind kind) noexcept;

class Severity {
 public:
  explicit Severity(int level);
  int level() const noexcept { return level_; }
  friend auto operator<=>(const Severity&, const Severity&) = default;

 private:
  int level_;
};

struct IdentityParams {};
struct ImpulseParams { double fraction; };
struct ShotParams { double photons; };
struct GlassParams { double sigma; int radius; int iterations; };
struct MotionParams { int length; };
struct BrightnessParams { double shift; };
struct FogParams { double strength; double decay; };
struct SpatterParams { double sigma; double threshold; double weight; };
struct OverlayParams { double beta; };

using SeverityParams = std::variant<IdentityParams, ImpulseParams, ShotParams, GlassParams, MotionParams,
                                    BrightnessParams, FogParams, SpatterParams, OverlayParams>;

/// Fixed severity table lookup.
SeverityParams severity_params(CorruptionKind kind, Severity severity);

/// Named scalars of a parameter row, for logs and reports.
std::vector<std::pair<std::string, double>> param_values(const SeverityParams& params);

/// A corruption kind bound to its severity row. Only constructible through
/// the severity table.
class CorruptionSpec {
 public:
  static CorruptionSpec make(CorruptionKind kind, Severity severity);

  CorruptionKind kind() const noexcept { return kind_; }
  Severity severity() const noexcept { return severity_; }
  const SeverityParams& params() const noexcept { return params_; }

 private:
  CorruptionSpec(CorruptionKind kind, Severity severity, SeverityParams params)
      : kind_(kind), severity_(severity), params_(params) {}

  CorruptionKind kind_;
  Severity severity_;
  SeverityParams params_;
};

/// Corrupt a C×H×W image with pixels in [0, 1]. All randomness comes from
/// `rng`; the output is clamped to [0, 1].
Tensor apply_corruption(const Tensor& image, const CorruptionSpec& spec, RngStream& rng);

/// Corrupt every image of an N×C×H×W batch, image i using rng.split(i).
Tensor apply_corruption_batch(const Tensor& images, const CorruptionSpec& spec, const RngStream& rng);

/// Normalized 2-D Gaussian kernel. The radius is ceil(3σ), shrunk if needed
/// so the kernel fits an image whose smaller side is `max_extent`.
Tensor gaussian_kernel(double sigma, std::size_t max_extent);

/// Normalized line kernel of odd length L through the centre at `angle`
/// radians.
Tensor motion_kernel(int length, double angle);

}  // namespace diffc
