#include "diffc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diffc/error.hpp"

namespace diffc {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::Precondition: return "Precondition";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotPSD: return "NotPSD";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::KernelTooLarge: return "KernelTooLarge";
    case Errc::BadDetailLevel: return "BadDetailLevel";
    case Errc::BadRange: return "BadRange";
    case Errc::StepOutOfRange: return "StepOutOfRange";
    case Errc::NonZeroFinalNoise: return "NonZeroFinalNoise";
    case Errc::BadSubsequence: return "BadSubsequence";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::DimensionCap: return "DimensionCap";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::DimOverflow: return "DimOverflow";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::BadSide: return "BadSide";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InsufficientSeries: return "InsufficientSeries";
  }
  return "Unknown";
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {
void validate_shape(const Shape& shape) {
  require(!shape.empty(), Errc::Precondition, "tensor shape must be nonempty");
  for (auto d : shape) require(d > 0, Errc::Precondition, "tensor dims must be positive: " + shape_str(shape));
}
}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  require(data_.size() == shape_numel(shape_), Errc::ShapeMismatch,
          "data length " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape_));
}

Tensor Tensor::reshaped(Shape shape) const {
  require(shape_numel(shape) == data_.size(), Errc::ShapeMismatch,
          "cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  return Tensor(std::move(shape), data_);
}

std::size_t Tensor::row_size() const {
  require(!shape_.empty(), Errc::Precondition, "row access on empty tensor");
  return data_.size() / shape_[0];
}

Tensor Tensor::row(std::size_t i) const {
  const auto n = row_size();
  Shape sub(shape_.begin() + 1, shape_.end());
  if (sub.empty()) sub = {1};
  return Tensor(std::move(sub), std::vector<float>(data_.begin() + i * n, data_.begin() + (i + 1) * n));
}

void Tensor::set_row(std::size_t i, const Tensor& value) {
  const auto n = row_size();
  require(value.size() == n, Errc::ShapeMismatch, "row size mismatch");
  std::copy(value.data_.begin(), value.data_.end(), data_.begin() + i * n);
}

std::span<float> Tensor::row_span(std::size_t i) {
  const auto n = row_size();
  return std::span<float>(data_).subspan(i * n, n);
}

std::span<const float> Tensor::row_span(std::size_t i) const {
  const auto n = row_size();
  return std::span<const float>(data_).subspan(i * n, n);
}

Tensor Tensor::stack(const std::vector<Tensor>& items) {
  require(!items.empty(), Errc::Precondition, "stack of zero tensors");
  Shape shape{items.size()};
  shape.insert(shape.end(), items[0].shape().begin(), items[0].shape().end());
  std::vector<float> data;
  data.reserve(shape_numel(shape));
  for (const auto& t : items) {
    require(t.shape() == items[0].shape(), Errc::ShapeMismatch, "stack of unequal shapes");
    data.insert(data.end(), t.data_.begin(), t.data_.end());
  }
  return Tensor(std::move(shape), std::move(data));
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

float Tensor::min_value() const {
  require(!data_.empty(), Errc::Precondition, "min of empty tensor");
  return *std::min_element(data_.begin(), data_.end());
}

float Tensor::max_value() const {
  require(!data_.empty(), Errc::Precondition, "max of empty tensor");
  return *std::max_element(data_.begin(), data_.end());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), Errc::ShapeMismatch,
          std::string(what) + ": " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace diffc
