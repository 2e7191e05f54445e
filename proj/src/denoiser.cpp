#include "diffc/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffc/container.hpp"
#include "diffc/error.hpp"
#include "diffc/kernels.hpp"

namespace diffc {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double silu(double z) { return z * sigmoid(z); }
double silu_grad(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

Matrix weight_matrix(const DenseLayer& layer) {
  return Matrix(layer.weight.dim(0), layer.weight.dim(1),
                std::vector<double>(layer.weight.data().begin(), layer.weight.data().end()));
}

std::vector<double> bias_vector(const DenseLayer& layer) {
  return std::vector<double>(layer.bias.data().begin(), layer.bias.data().end());
}

struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> preactivity;  // z of each layer
  Matrix output;
};

Matrix with_embedding(const Matrix& xt, std::span<const int> steps, std::size_t embed_dim) {
  require(steps.size() == xt.rows(), Errc::ShapeMismatch, "one step per batch row required");
  Matrix in(xt.rows(), xt.cols() + embed_dim);
  for (std::size_t n = 0; n < xt.rows(); ++n) {
    auto row = in.row(n);
    std::copy(xt.row(n).begin(), xt.row(n).end(), row.begin());
    const auto emb = time_embedding(steps[n], embed_dim);
    std::copy(emb.begin(), emb.end(), row.begin() + static_cast<long>(xt.cols()));
  }
  return in;
}

ForwardCache forward_cached(const TinyDenoiser& model, const Matrix& xt, std::span<const int> steps) {
  require(xt.cols() == model.spec().data_dim, Errc::ShapeMismatch,
          "denoiser expects dimension " + std::to_string(model.spec().data_dim) + ", got " +
              std::to_string(xt.cols()));
  ForwardCache cache;
  Matrix act = with_embedding(xt, steps, model.spec().embed_dim);
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto bias = bias_vector(layers[l]);
    Matrix z = kernels::matmul_bt(act, weight_matrix(layers[l]), bias);
    cache.inputs.push_back(std::move(act));
    if (l + 1 == layers.size()) {
      cache.output = z;
    } else {
      act = z;
      for (double& v : act.values()) v = silu(v);
    }
    cache.preactivity.push_back(std::move(z));
  }
  return cache;
}

DenseLayer zeros_like(const DenseLayer& layer) {
  return {Tensor(layer.weight.shape()), Tensor(layer.bias.shape())};
}

Matrix noisy_inputs(const NoiseBatch& batch, const NoiseSchedule& sched, std::size_t& d) {
  // forward_sample per row, kept in float64 so the loss is smooth in the weights.
  d = batch.x0.row_size();
  Matrix m(batch.x0.dim(0), d);
  for (std::size_t n = 0; n < m.rows(); ++n) {
    const int t = batch.steps.at(n);
    require(t >= 1 && t <= sched.steps(), Errc::StepOutOfRange, "training step out of range");
    const double ab = sched.alpha_bar(t);
    const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    for (std::size_t j = 0; j < d; ++j) m(n, j) = a * batch.x0[n * d + j] + b * batch.eps[n * d + j];
  }
  return m;
}

void check_batch(const NoiseBatch& batch) {
  require_same_shape(batch.x0, batch.eps, "noise batch");
  require(batch.steps.size() == batch.x0.dim(0), Errc::ShapeMismatch, "one step per batch row required");
}

}  // namespace

AnalyticGaussianPredictor::AnalyticGaussianPredictor(GaussianStats data, NoiseSchedule sched)
    : data_(std::move(data)), sched_(std::move(sched)) {
  validate_gaussian(data_);
  const SymEig eig = sym_eig(data_.cov);
  basis_ = eig.vectors;
  eigenvalues_.resize(eig.values.size());
  // Clamp tiny negative eigenvalues from rounding; validate_gaussian bounds them.
  std::transform(eig.values.begin(), eig.values.end(), eigenvalues_.begin(), [](double w) { return std::max(w, 0.0); });
}

Tensor AnalyticGaussianPredictor::predict(const Tensor& xt, std::span<const int> steps) const {
  const std::size_t d = data_.dim();
  require(xt.rank() >= 2 && xt.row_size() == d, Errc::ShapeMismatch,
          "analytic predictor expects rows of dimension " + std::to_string(d));
  require(steps.size() == xt.dim(0), Errc::ShapeMismatch, "one step per batch row required");
  const std::size_t n = xt.dim(0);

  Matrix centred(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(sched_.alpha_bar(steps[i]));
    for (std::size_t j = 0; j < d; ++j) centred(i, j) = xt[i * d + j] - s * data_.mean[j];
  }
  Matrix coords = kernels::matmul(centred, basis_);
  for (std::size_t i = 0; i < n; ++i) {
    const double ab = sched_.alpha_bar(steps[i]);
    const double s = std::sqrt(ab);
    for (std::size_t k = 0; k < d; ++k) {
      const double denom = ab * eigenvalues_[k] + (1.0 - ab);
      require(denom > 0.0, Errc::SingularSystem, "posterior system singular");
      coords(i, k) *= s * eigenvalues_[k] / denom;
    }
  }
  const Matrix shift = kernels::matmul_bt(coords, basis_);
  Tensor eps(xt.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double ab = sched_.alpha_bar(steps[i]);
    const double s = std::sqrt(ab), noise = std::sqrt(1.0 - ab);
    for (std::size_t j = 0; j < d; ++j) {
      const double x0_hat = data_.mean[j] + shift(i, j);
      eps[i * d + j] = static_cast<float>((xt[i * d + j] - s * x0_hat) / noise);
    }
  }
  return eps;
}

AnalyticGaussianPredictor fit_analytic_predictor(const Tensor& data, const NoiseSchedule& sched) {
  return AnalyticGaussianPredictor(mean_cov(to_matrix(data)), sched);
}

std::vector<double> time_embedding(int t, std::size_t dim) {
  require(dim % 2 == 0, Errc::Precondition, "time embedding dimension must be even");
  const std::size_t half = dim / 2;
  std::vector<double> emb(dim);
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
    emb[i] = std::sin(t * freq);
    emb[i + half] = std::cos(t * freq);
  }
  return emb;
}

TinyDenoiser::TinyDenoiser(LayerSpec spec) : spec_(std::move(spec)) {
  require(spec_.data_dim > 0, Errc::Precondition, "denoiser data dimension must be positive");
  std::size_t in = spec_.data_dim + spec_.embed_dim;
  std::vector<std::size_t> widths = spec_.hidden;
  widths.push_back(spec_.data_dim);
  for (std::size_t out : widths) {
    require(out > 0, Errc::Precondition, "layer widths must be positive");
    layers_.push_back({Tensor(Shape{out, in}), Tensor(Shape{out})});
    in = out;
  }
  require(parameter_count() <= kMaxParameters, Errc::Precondition,
          "denoiser exceeds " + std::to_string(kMaxParameters) + " parameters");
}

TinyDenoiser TinyDenoiser::initialized(LayerSpec spec, RngStream& rng) {
  TinyDenoiser model(std::move(spec));
  for (std::size_t l = 0; l < model.layers_.size(); ++l) {
    auto& w = model.layers_[l].weight;
    const double fan_in = static_cast<double>(w.dim(1));
    const bool last = l + 1 == model.layers_.size();
    const double scale = (last ? 0.1 : 1.0) * std::sqrt(2.0 / fan_in);
    for (float& v : w.values()) v = static_cast<float>(scale * rng.normal());
  }
  return model;
}

std::size_t TinyDenoiser::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

bool TinyDenoiser::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const DenseLayer& l) { return l.weight.all_finite() && l.bias.all_finite(); });
}

Matrix TinyDenoiser::forward(const Matrix& xt, std::span<const int> steps) const {
  return forward_cached(*this, xt, steps).output;
}

Tensor TinyDenoiser::predict(const Tensor& xt, std::span<const int> steps) const {
  require(xt.rank() >= 2, Errc::ShapeMismatch, "denoiser expects an N×… batch");
  return to_tensor(forward(to_matrix(xt), steps), xt.shape());
}

Matrix to_matrix(const Tensor& batch) {
  require(batch.rank() >= 2, Errc::ShapeMismatch, "expected an N×… batch, got " + shape_str(batch.shape()));
  return Matrix(batch.dim(0), batch.row_size(), std::vector<double>(batch.data().begin(), batch.data().end()));
}

Tensor to_tensor(const Matrix& m, const Shape& shape) {
  require(shape_numel(shape) == m.values().size(), Errc::ShapeMismatch, "matrix/tensor size mismatch");
  std::vector<float> data(m.values().size());
  std::transform(m.values().begin(), m.values().end(), data.begin(), [](double v) { return static_cast<float>(v); });
  return Tensor(shape, std::move(data));
}

double net_loss(const TinyDenoiser& model, const NoiseBatch& batch, const NoiseSchedule& sched) {
  check_batch(batch);
  std::size_t d = 0;
  const Matrix xt = noisy_inputs(batch, sched, d);
  const Matrix out = model.forward(xt, batch.steps);
  double total = 0.0;
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    const double r = out.values()[i] - batch.eps[i];
    total += r * r;
  }
  return total / static_cast<double>(xt.rows());
}

LossAndGradient net_gradient(const TinyDenoiser& model, const NoiseBatch& batch, const NoiseSchedule& sched) {
  check_batch(batch);
  std::size_t d = 0;
  const Matrix xt = noisy_inputs(batch, sched, d);
  const ForwardCache cache = forward_cached(model, xt, batch.steps);
  const double n = static_cast<double>(xt.rows());

  LossAndGradient result{0.0, {}};
  Matrix delta(cache.output.rows(), cache.output.cols());
  for (std::size_t i = 0; i < delta.values().size(); ++i) {
    const double r = cache.output.values()[i] - batch.eps[i];
    result.loss += r * r;
    delta.values()[i] = 2.0 * r / n;
  }
  result.loss /= n;

  const auto& layers = model.layers();
  result.grads.layers.resize(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix dw = kernels::matmul_at(delta, cache.inputs[l]);
    DenseLayer g = zeros_like(layers[l]);
    for (std::size_t i = 0; i < dw.values().size(); ++i) g.weight[i] = static_cast<float>(dw.values()[i]);
    for (std::size_t j = 0; j < delta.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < delta.rows(); ++r) acc += delta(r, j);
      g.bias[j] = static_cast<float>(acc);
    }
    result.grads.layers[l] = std::move(g);
    if (l == 0) break;
    Matrix back = kernels::matmul(delta, weight_matrix(layers[l]));
    const Matrix& z = cache.preactivity[l - 1];
    for (std::size_t i = 0; i < back.values().size(); ++i) back.values()[i] *= silu_grad(z.values()[i]);
    delta = std::move(back);
  }
  return result;
}

AdamState AdamState::for_model(const TinyDenoiser& model, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& l : model.layers()) {
    state.first_moment.push_back(zeros_like(l));
    state.second_moment.push_back(zeros_like(l));
  }
  return state;
}

void adam_update(AdamState& state, std::vector<DenseLayer>& weights, const Gradients& grads) {
  require(weights.size() == grads.layers.size() && weights.size() == state.first_moment.size(),
          Errc::ShapeMismatch, "adam: layer count mismatch");
  const auto& c = state.config;
  state.step += 1;
  const double correct1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correct2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  auto update = [&](Tensor& w, const Tensor& g, Tensor& m, Tensor& v) {
    require_same_shape(w, g, "adam gradient");
    require_same_shape(w, m, "adam moment");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double step = c.lr * (mi / correct1) / (std::sqrt(vi / correct2) + c.epsilon);
      w[i] = static_cast<float>(w[i] - step);
    }
  };
  for (std::size_t l = 0; l < weights.size(); ++l) {
    update(weights[l].weight, grads.layers[l].weight, state.first_moment[l].weight, state.second_moment[l].weight);
    update(weights[l].bias, grads.layers[l].bias, state.first_moment[l].bias, state.second_moment[l].bias);
  }
}

TrainResult train(TinyDenoiser& model, const Tensor& data, const NoiseSchedule& sched, const TrainConfig& cfg,
                  RngStream& rng) {
  require(data.rank() >= 2 && data.dim(0) > 0, Errc::EmptyDataset, "training dataset is empty");
  const std::size_t count = data.dim(0);
  require(cfg.batch_size >= 1 && cfg.batch_size <= count, Errc::EmptyDataset,
          "batch size " + std::to_string(cfg.batch_size) + " exceeds dataset size " + std::to_string(count));
  const std::size_t d = data.row_size();
  AdamState adam = AdamState::for_model(model, AdamConfig{.lr = cfg.lr});
  TrainResult result;
  std::vector<std::size_t> order(count);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double weighted = 0.0;
    for (std::size_t start = 0; start < count; start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, count - start);
      Shape shape = data.shape();
      shape[0] = rows;
      NoiseBatch batch{Tensor(shape), std::vector<int>(rows), Tensor()};
      for (std::size_t r = 0; r < rows; ++r) {
        const auto src = data.row_span(order[start + r]);
        std::copy(src.begin(), src.end(), batch.x0.values().begin() + static_cast<long>(r * d));
        batch.steps[r] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(sched.steps())));
      }
      batch.eps = gaussian_sample(rng, shape);
      auto [loss, grads] = net_gradient(model, batch, sched);
      adam_update(adam, model.layers(), grads);
      weighted += loss * static_cast<double>(rows);
    }
    require(model.all_finite(), Errc::Precondition, "non-finite weights after update");
    result.epoch_loss.push_back(weighted / static_cast<double>(count));
  }
  return result;
}

void save_checkpoint(const TinyDenoiser& model, const std::string& path) {
  const auto& spec = model.spec();
  std::vector<float> header{static_cast<float>(spec.data_dim), static_cast<float>(spec.embed_dim),
                            static_cast<float>(spec.hidden.size())};
  for (auto w : spec.hidden) header.push_back(static_cast<float>(w));
  std::vector<Tensor> tensors{Tensor(Shape{header.size()}, header)};
  for (const auto& l : model.layers()) {
    tensors.push_back(l.weight);
    tensors.push_back(l.bias);
  }
  save_tensors(path, tensors);
}

TinyDenoiser load_checkpoint(const std::string& path) {
  const auto tensors = load_tensors(path);
  require(!tensors.empty() && tensors[0].rank() == 1 && tensors[0].size() >= 3, Errc::UnsupportedFormat,
          "checkpoint header missing");
  const auto& h = tensors[0];
  LayerSpec spec{static_cast<std::size_t>(h[0]), {}, static_cast<std::size_t>(h[1])};
  const auto hidden = static_cast<std::size_t>(h[2]);
  require(h.size() == 3 + hidden, Errc::UnsupportedFormat, "checkpoint header length");
  for (std::size_t i = 0; i < hidden; ++i) spec.hidden.push_back(static_cast<std::size_t>(h[3 + i]));
  TinyDenoiser model(spec);
  require(tensors.size() == 1 + 2 * model.layers().size(), Errc::UnsupportedFormat, "checkpoint tensor count");
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    auto& layer = model.layers()[l];
    require(tensors[1 + 2 * l].shape() == layer.weight.shape() && tensors[2 + 2 * l].shape() == layer.bias.shape(),
            Errc::UnsupportedFormat, "checkpoint layer shape");
    layer.weight = tensors[1 + 2 * l];
    layer.bias = tensors[2 + 2 * l];
  }
  return model;
}

}  // namespace diffc
