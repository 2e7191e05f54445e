#include "diffc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

#include "diffc/error.hpp"
#include "diffc/kernels.hpp"
#include "diffc/rng.hpp"

namespace diffc {
namespace {

constexpr std::uint64_t kProjectionStream = 0x70726f6a;  // "proj"
constexpr double kEigenFloor = 1e-8;
constexpr double kRegularization = 1e-6;
constexpr double kClampTolerance = 1e-6;

std::size_t parse_size(const std::string& text, const std::string& tag) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  require(ec == std::errc() && ptr == end && !text.empty(), Errc::ConfigError, "bad feature map '" + tag + "'");
  return v;
}

Matrix flatten(const Tensor& images) {
  return Matrix(images.dim(0), images.row_size(), std::vector<double>(images.data().begin(), images.data().end()));
}

Matrix patch_features(const Tensor& images, std::size_t p) {
  const auto n = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
  require(p >= 1 && p <= std::min(h, w), Errc::Precondition, "patch size must be in [1, min(H, W)]");
  const std::size_t py = h / p, px = w / p;
  const std::size_t d = 2 * c * py * px;
  require(d <= kMaxFeatureDim, Errc::DimensionCap, "feature dimension " + std::to_string(d) + " exceeds 512");
  Matrix out(n, d);
  const double count = static_cast<double>(p * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto img = images.row_span(i);
    std::size_t k = 0;
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t by = 0; by < py; ++by)
        for (std::size_t bx = 0; bx < px; ++bx) {
          double sum = 0.0;
          for (std::size_t y = 0; y < p; ++y)
            for (std::size_t x = 0; x < p; ++x) sum += img[(ch * h + by * p + y) * w + bx * p + x];
          const double mean = sum / count;
          double sq = 0.0;
          for (std::size_t y = 0; y < p; ++y)
            for (std::size_t x = 0; x < p; ++x) {
              const double dv = img[(ch * h + by * p + y) * w + bx * p + x] - mean;
              sq += dv * dv;
            }
          out(i, k++) = mean;
          out(i, k++) = std::sqrt(sq / count);
        }
  }
  return out;
}

double min_eigenvalue(const Matrix& cov) { return sym_eig(cov).values.back(); }

Matrix add_diagonal(Matrix m, double v) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += v;
  return m;
}

}  // namespace

std::string FeatureMap::tag() const {
  switch (kind) {
    case FeatureKind::raw_pixels: return "raw";
    case FeatureKind::random_projection:
      return (identity_projection ? "projI" : "proj") + std::to_string(out_dim) + "@" + std::to_string(seed);
    case FeatureKind::patch_moments: return "patch" + std::to_string(patch_size);
  }
  return "unknown";
}

FeatureMap parse_feature_map(const std::string& tag) {
  if (tag == "raw") return FeatureMap::raw();
  if (tag.starts_with("patch")) return FeatureMap::patch_moments(parse_size(tag.substr(5), tag));
  if (tag.starts_with("proj")) {
    const auto at = tag.find('@');
    require(at != std::string::npos, Errc::ConfigError, "projection map needs '@seed': '" + tag + "'");
    return FeatureMap::projection(parse_size(tag.substr(4, at - 4), tag), parse_size(tag.substr(at + 1), tag));
  }
  throw Error(Errc::ConfigError, "unknown feature map '" + tag + "' (raw, projD@SEED, patchP)");
}

Matrix projection_matrix(std::uint64_t seed, std::size_t in_dim, std::size_t out_dim) {
  require(in_dim > 0 && out_dim > 0, Errc::Precondition, "projection dims must be positive");
  RngStream rng = RngStream(seed, kProjectionStream).split(hash_combine(in_dim, out_dim));
  const double scale = 1.0 / std::sqrt(static_cast<double>(out_dim));
  Matrix m(in_dim, out_dim);
  for (double& v : m.values()) v = scale * rng.normal();
  return m;
}

Matrix extract_features(const Tensor& images, const FeatureMap& map) {
  require(images.rank() == 4, Errc::ShapeMismatch, "features expect N×C×H×W, got " + shape_str(images.shape()));
  require(images.dim(0) >= 2, Errc::TooFewSamples, "feature extraction needs at least 2 images");
  switch (map.kind) {
    case FeatureKind::raw_pixels: {
      require(images.row_size() <= kMaxFeatureDim, Errc::DimensionCap,
              "raw feature dimension " + std::to_string(images.row_size()) + " exceeds 512");
      return flatten(images);
    }
    case FeatureKind::random_projection: {
      require(map.out_dim <= kMaxFeatureDim, Errc::DimensionCap,
              "projection dimension " + std::to_string(map.out_dim) + " exceeds 512");
      const std::size_t in = images.row_size();
      if (map.identity_projection) {
        require(map.out_dim == in, Errc::DimMismatch, "identity projection needs out_dim == in_dim");
        return flatten(images);
      }
      return kernels::matmul(flatten(images), projection_matrix(map.seed, in, map.out_dim));
    }
    case FeatureKind::patch_moments: return patch_features(images, map.patch_size);
  }
  throw Error(Errc::Precondition, "unknown feature map");
}

FrechetResult frechet_distance_detail(const GaussianStats& a, const GaussianStats& b) {
  require(a.dim() == b.dim() && a.cov.rows() == a.dim() && b.cov.rows() == b.dim(), Errc::DimMismatch,
          "Fréchet distance needs equal dimensions, got " + std::to_string(a.dim()) + " and " +
              std::to_string(b.dim()));
  validate_gaussian(a);
  validate_gaussian(b);
  FrechetResult result;
  Matrix sa = symmetrized(a.cov), sb = symmetrized(b.cov);
  if (std::min(min_eigenvalue(sa), min_eigenvalue(sb)) < kEigenFloor) {
    sa = add_diagonal(std::move(sa), kRegularization);
    sb = add_diagonal(std::move(sb), kRegularization);
    result.regularized = true;
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double dm = a.mean[i] - b.mean[i];
    mean_term += dm * dm;
  }
  const Matrix root_a = sqrtm_psd(sa);
  const Matrix inner = symmetrized(kernels::matmul(kernels::matmul(root_a, sb), root_a));
  const double cross = sqrtm_psd(inner).trace();
  double value = mean_term + sa.trace() + sb.trace() - 2.0 * cross;
  if (value < 0.0 && value > -kClampTolerance) value = 0.0;
  require(value >= 0.0, Errc::NotPSD, "Fréchet distance negative beyond tolerance: " + std::to_string(value));
  result.value = value;
  return result;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) { return frechet_distance_detail(a, b).value; }

FrechetResult fid_detail(const Tensor& set_a, const Tensor& set_b, const FeatureMap& map) {
  const Matrix fa = extract_features(set_a, map);
  const Matrix fb = extract_features(set_b, map);
  const std::size_t need = std::max(fa.cols() + 1, kMinFidSamples);
  require(fa.rows() >= need && fb.rows() >= need, Errc::TooFewSamples,
          "FID with " + std::to_string(fa.cols()) + "-dim features needs " + std::to_string(need) +
              " samples per set, got " + std::to_string(fa.rows()) + " and " + std::to_string(fb.rows()));
  return frechet_distance_detail(mean_cov(fa), mean_cov(fb));
}

double fid(const Tensor& set_a, const Tensor& set_b, const FeatureMap& map) { return fid_detail(set_a, set_b, map).value; }

FidResult score_experiment(const Tensor& clean, const Tensor& corrupted, const Tensor& generated,
                           const FeatureMap& map) {
  const auto corrupted_ref = fid_detail(corrupted, generated, map);
  const auto clean_ref = fid_detail(clean, generated, map);
  FidResult r;
  r.fid_corrupted_ref = corrupted_ref.value;
  r.fid_clean_ref = clean_ref.value;
  r.max_score = std::max(r.fid_corrupted_ref, r.fid_clean_ref);
  r.feature_map = map.tag();
  r.clean_count = clean.dim(0);
  r.corrupted_count = corrupted.dim(0);
  r.generated_count = generated.dim(0);
  r.regularized = corrupted_ref.regularized || clean_ref.regularized;
  return r;
}

}  // namespace diffc
