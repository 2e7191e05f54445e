#pragma once

#include <cstdint>
#include <string>

#include "diffc/linalg.hpp"
#include "diffc/tensor.hpp"

namespace diffc {

enum class FeatureKind { raw_pixels, random_projection, patch_moments };

/// Desk-scale image embedding used in place of a pretrained network.
struct FeatureMap {
  FeatureKind kind = FeatureKind::raw_pixels;
  std::size_t out_dim = 0;     // random_projection
  std::uint64_t seed = 0;      // random_projection
  std::size_t patch_size = 0;  // patch_moments
  bool identity_projection = false;  // test hook: projection forced to I

  static FeatureMap raw() { return {}; }
  static FeatureMap projection(std::size_t out_dim, std::uint64_t seed) {
    return {FeatureKind::random_projection, out_dim, seed, 0, false};
  }
  static FeatureMap patch_moments(std::size_t patch) { return {FeatureKind::patch_moments, 0, 0, patch, false}; }

  /// Stable tag, e.g. "raw", "proj64@7", "patch4". Inverse of parse_feature_map.
  std::string tag() const;
  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

FeatureMap parse_feature_map(const std::string& tag);

inline constexpr std::size_t kMaxFeatureDim = 512;
inline constexpr std::size_t kMinFidSamples = 32;

/// in_dim × out_dim matrix with N(0, 1/out_dim) entries; fixed by (seed, dims).
Matrix projection_matrix(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim);

/// N×d features of an N×C×H×W batch.
Matrix extract_features(const Tensor& images, const FeatureMap& map);

struct FrechetResult {
  double value = 0.0;
  bool regularized = false;
};

/// ‖μa − μb‖² + tr(Σa + Σb − 2(Σa^½ Σb Σa^½)^½). When either covariance has
/// an eigenvalue below 1e-8, 1e-6·I is added to both first.
FrechetResult frechet_distance_detail(const GaussianStats& a, const GaussianStats& b);
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Fréchet distance between Gaussian fits of the two feature sets.
FrechetResult fid_detail(const Tensor& set_a, const Tensor& set_b, const FeatureMap& map);
double fid(const Tensor& set_a, const Tensor& set_b, const FeatureMap& map);

struct FidResult {
  double fid_corrupted_ref = 0.0;
  double fid_clean_ref = 0.0;
  double max_score = 0.0;
  std::string feature_map;
  std::size_t clean_count = 0;
  std::size_t corrupted_count = 0;
  std::size_t generated_count = 0;
  bool regularized = false;
};

FidResult score_experiment(const Tensor& clean, const Tensor& corrupted, const Tensor& generated,
                           const FeatureMap& map);

}  // namespace diffc
