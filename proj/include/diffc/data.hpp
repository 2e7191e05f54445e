#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "diffc/linalg.hpp"
#include "diffc/rng.hpp"
#include "diffc/tensor.hpp"

namespace diffc {

enum class PixelDomain { unit, signed_unit };

std::string_view domain_name(PixelDomain domain) noexcept;

/// An immutable N×C×H×W image set with its pixel domain. `lower`/`upper`
/// are the declared bounds; they equal the domain bounds except for
/// synthetic Gaussian data, whose bounds are widened to cover the draws.
struct Dataset {
  std::string name;
  Tensor images;
  PixelDomain domain = PixelDomain::unit;
  float lower = 0.0f;
  float upper = 1.0f;
  std::vector<int> labels;
  std::string provenance;

  std::size_t count() const { return images.dim(0); }
  Shape image_shape() const { return Shape(images.shape().begin() + 1, images.shape().end()); }
};

/// Build a dataset with standard bounds for `domain` and validate it.
Dataset make_dataset(std::string name, Tensor images, PixelDomain domain, std::string provenance = {});
/// Throws unless every invariant holds (N ≥ 1, C ∈ {1, 3}, pixels in bounds).
void validate(const Dataset& d);
void require_domain(const Dataset& d, PixelDomain domain, std::string_view operation);

/// IDX image file (magic 0x00000803, big-endian dims) scaled to [0, 1].
Dataset load_idx(const std::string& path);
/// IDX label file (magic 0x00000801).
std::vector<int> load_idx_labels(const std::string& path);
/// Encode an N×1×H×W unit-domain batch as an IDX image file.
std::vector<std::uint8_t> encode_idx(const Tensor& images);

/// Binary PGM (P5) or PPM (P6), maxval 255, as a one-image dataset.
Dataset load_ppm(const std::string& path);
/// Write a C×H×W image in [0, 1]; C = 1 gives P5, C = 3 gives P6.
void save_ppm(const Tensor& image, const std::string& path);
std::vector<std::uint8_t> encode_ppm(const Tensor& image);
Tensor decode_ppm(const std::vector<std::uint8_t>& bytes);

/// Load images from a DFC1 container, IDX file or PGM/PPM file, detected by
/// content. Containers holding a rank-3 tensor are treated as one image.
Dataset load_images(const std::string& path);

/// Tile the first `max_images` images into one grid image.
Tensor image_grid(const Tensor& images, std::size_t max_images = 64);

/// x ↦ 2x − 1 and back.
Dataset to_signed(const Dataset& d);
Dataset to_unit(const Dataset& d);
/// Clamp a signed-domain batch into [−1, 1] and declare it signed.
Dataset clamp_signed(std::string name, Tensor images);

/// n draws of mean + V·diag(√w)·Vᵀ·z with (w, V) = sym_eig(cov).
Dataset synth_gaussian_dataset(std::size_t n, const std::vector<double>& mean, const Matrix& cov,
                               const Shape& image_shape, RngStream& rng);

enum class Tint { red, green, blue };
std::string_view tint_name(Tint tint) noexcept;

/// Diamond-square plasma images, dominant channel = plasma, others 0.25·plasma.
Dataset synth_fractal_dataset(std::size_t n, std::size_t side, Tint tint, RngStream& rng);

/// Smooth random-field images in [0, 1]: N(0.5, 0.04·K) clamped, with K a
/// squared-exponential kernel of length scale 2 px over pixel positions.
Dataset synth_toy_dataset(std::size_t n, std::size_t side, std::size_t channels, RngStream& rng);

/// n·factor images: the originals verbatim, then flipped/rotated/cropped copies.
Dataset augment(const Dataset& d, std::size_t factor, RngStream& rng);

}  // namespace diffc
