#include "ldu/neural_net.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ldu/defer_loss.hpp"
#include "ldu/file_util.hpp"
#include "ldu/kernels.hpp"
#include "ldu/numerics.hpp"
#include "ldu/rng.hpp"

namespace ldu {
namespace {

constexpr std::uint64_t kShuffleStream = 1;

void check_specs(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw std::invalid_argument("network: no layers");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].input_dim == 0 || specs[i].output_dim == 0) {
      throw std::invalid_argument("network: layer " + std::to_string(i) +
                                  " has a zero dimension");
    }
    if (i > 0 && specs[i - 1].output_dim != specs[i].input_dim) {
      throw std::invalid_argument("network: layer " + std::to_string(i) +
                                  " input does not match previous output");
    }
  }
}

void check_targets(std::span<const int> targets, std::size_t rows,
                   std::size_t classes) {
  if (targets.size() != rows) {
    throw std::invalid_argument("network: target count does not match rows");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw std::invalid_argument("network: target " + std::to_string(t) +
                                  " invalid for the configured loss");
    }
  }
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams out = params;
  for (auto& layer : out.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return out;
}

double apply_activation(Activation act, double z) {
  return act == Activation::kSigmoid ? sigmoid(z) : z;
}

void layer_forward(const DenseLayer& layer, std::span<const double> in,
                   std::span<double> out) {
  const std::size_t n_in = layer.spec.input_dim;
  for (std::size_t r = 0; r < layer.spec.output_dim; ++r) {
    const double z = kernels::dot(layer.weights.data() + r * n_in, in.data(), n_in) +
                     layer.bias[r];
    out[r] = apply_activation(layer.spec.activation, z);
  }
}

// Per-sample buffers for forward and backward passes.
struct Workspace {
  std::vector<std::vector<double>> activations;  // [0] = input copy
  std::vector<double> delta;
  std::vector<double> delta_prev;

  explicit Workspace(const NetworkParams& params) {
    activations.resize(params.layers.size() + 1);
    activations[0].resize(params.input_dim());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      activations[l + 1].resize(params.layers[l].spec.output_dim);
    }
  }
};

std::span<const double> run_forward(const NetworkParams& params,
                                    std::span<const double> x, Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.activations[0].begin());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    layer_forward(params.layers[l], ws.activations[l], ws.activations[l + 1]);
  }
  return ws.activations.back();
}

double sample_loss(std::span<const double> logits, int target, const LossSpec& loss) {
  if (loss.kind == LossSpec::Kind::kDefer) {
    const DeferLossParams p{loss.alpha, static_cast<int>(logits.size()) - 1};
    return defer_loss_value(logits, target, p);
  }
  return cross_entropy_value(logits, target);
}

std::vector<double> sample_loss_grad(std::span<const double> logits, int target,
                                     const LossSpec& loss) {
  if (loss.kind == LossSpec::Kind::kDefer) {
    const DeferLossParams p{loss.alpha, static_cast<int>(logits.size()) - 1};
    return defer_loss_grad(logits, target, p);
  }
  return cross_entropy_grad(logits, target);
}

// Adds the unscaled per-sample gradients of rows `indices` into `grads`;
// returns the summed loss.
double accumulate_gradients(const NetworkParams& params, const Matrix& features,
                            std::span<const int> targets,
                            std::span<const std::size_t> indices, const LossSpec& loss,
                            NetworkParams& grads, Workspace& ws) {
  double total = 0.0;
  const std::size_t depth = params.layers.size();
  for (std::size_t idx : indices) {
    const auto logits = run_forward(params, features.row(idx), ws);
    if (!std::all_of(logits.begin(), logits.end(), [](double z) { return std::isfinite(z); })) {
      // Overflowed activations; the caller reports divergence.
      return std::numeric_limits<double>::quiet_NaN();
    }
    total += sample_loss(logits, targets[idx], loss);
    ws.delta = sample_loss_grad(logits, targets[idx], loss);

    for (std::size_t l = depth; l-- > 0;) {
      const DenseLayer& layer = params.layers[l];
      DenseLayer& g = grads.layers[l];
      const std::size_t n_in = layer.spec.input_dim;
      const auto& input = ws.activations[l];
      for (std::size_t r = 0; r < layer.spec.output_dim; ++r) {
        kernels::axpy(ws.delta[r], input.data(), g.weights.data() + r * n_in, n_in);
        g.bias[r] += ws.delta[r];
      }
      if (l == 0) break;
      ws.delta_prev.assign(n_in, 0.0);
      for (std::size_t r = 0; r < layer.spec.output_dim; ++r) {
        kernels::axpy(ws.delta[r], layer.weights.data() + r * n_in,
                      ws.delta_prev.data(), n_in);
      }
      if (params.layers[l - 1].spec.activation == Activation::kSigmoid) {
        for (std::size_t j = 0; j < n_in; ++j) {
          ws.delta_prev[j] *= input[j] * (1.0 - input[j]);
        }
      }
      std::swap(ws.delta, ws.delta_prev);
    }
  }
  return total;
}

void scale(NetworkParams& grads, double factor) {
  for (auto& layer : grads.layers) {
    for (double& w : layer.weights) w *= factor;
    for (double& b : layer.bias) b *= factor;
  }
}

// Visits matching (param, grad, m, v) tensors.
template <typename Fn>
void for_each_tensor(NetworkParams& params, NetworkParams& grads, NetworkParams& m,
                     NetworkParams& v, Fn&& fn) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    fn(params.layers[l].weights, grads.layers[l].weights, m.layers[l].weights,
       v.layers[l].weights);
    fn(params.layers[l].bias, grads.layers[l].bias, m.layers[l].bias,
       v.layers[l].bias);
  }
}

const char* activation_name(Activation act) {
  return act == Activation::kSigmoid ? "sigmoid" : "identity";
}

void append_tensor(std::string& out, std::size_t layer, char kind, std::size_t rows,
                   std::size_t cols, std::span<const double> values) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu %c %zu %zu", layer, kind, rows, cols);
  out += buf;
  for (double v : values) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out += buf;
  }
  out += '\n';
}

double parse_double(const std::string& token, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw std::invalid_argument("params line " + std::to_string(line) +
                                ": bad number '" + token + "'");
  }
  return value;
}

}  // namespace

std::vector<LayerSpec> NetworkParams::specs() const {
  std::vector<LayerSpec> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) out.push_back(layer.spec);
  return out;
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

void NetworkParams::validate() const {
  const auto s = specs();
  check_specs(s);
  for (const auto& layer : layers) {
    if (layer.weights.size() != layer.spec.input_dim * layer.spec.output_dim ||
        layer.bias.size() != layer.spec.output_dim) {
      throw std::invalid_argument("network: tensor size does not match layer spec");
    }
    for (double w : layer.weights) {
      if (!std::isfinite(w)) throw std::invalid_argument("network: non-finite weight");
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) throw std::invalid_argument("network: non-finite bias");
    }
  }
}

std::vector<LayerSpec> mlp_specs(std::size_t input_dim,
                                 std::span<const std::size_t> hidden,
                                 std::size_t output_dim) {
  std::vector<LayerSpec> specs;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    specs.push_back({in, h, Activation::kSigmoid});
    in = h;
  }
  specs.push_back({in, output_dim, Activation::kIdentity});
  return specs;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning rate must be positive");
  }
  if (batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
  if (!(weight_decay >= 0.0)) {
    throw std::invalid_argument("train: weight decay must be >= 0");
  }
  if (loss.kind == LossSpec::Kind::kDefer && !(loss.alpha >= 0.0)) {
    throw std::invalid_argument("train: defer alpha must be >= 0");
  }
}

NetworkParams init_params(std::span<const LayerSpec> specs, std::uint64_t seed) {
  check_specs(specs);
  Rng rng(seed);
  NetworkParams params;
  for (const auto& spec : specs) {
    DenseLayer layer{spec, std::vector<double>(spec.input_dim * spec.output_dim),
                     std::vector<double>(spec.output_dim, 0.0)};
    const double limit =
        std::sqrt(6.0 / static_cast<double>(spec.input_dim + spec.output_dim));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::vector<double> forward(const NetworkParams& params,
                            std::span<const double> features) {
  if (features.size() != params.input_dim()) {
    throw std::invalid_argument("forward: expected " +
                                std::to_string(params.input_dim()) + " features, got " +
                                std::to_string(features.size()));
  }
  Workspace ws(params);
  const auto logits = run_forward(params, features, ws);
  return {logits.begin(), logits.end()};
}

Matrix forward_batch(const NetworkParams& params, const Matrix& features) {
  if (features.cols() != params.input_dim()) {
    throw std::invalid_argument("forward: feature dimension mismatch");
  }
  Matrix out(features.rows(), params.output_dim());
  Workspace ws(params);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto logits = run_forward(params, features.row(i), ws);
    std::copy(logits.begin(), logits.end(), out.row(i).begin());
  }
  return out;
}

Gradients network_gradients(const NetworkParams& params, const Matrix& features,
                            std::span<const int> targets, const LossSpec& loss) {
  if (features.rows() == 0) throw std::invalid_argument("gradients: empty batch");
  if (features.cols() != params.input_dim()) {
    throw std::invalid_argument("gradients: feature dimension mismatch");
  }
  check_targets(targets, features.rows(), loss.target_classes(params.output_dim()));
  std::vector<std::size_t> indices(features.rows());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  Gradients out{zeros_like(params), 0.0};
  Workspace ws(params);
  const double total =
      accumulate_gradients(params, features, targets, indices, loss, out.grad, ws);
  const double inv = 1.0 / static_cast<double>(features.rows());
  scale(out.grad, inv);
  out.loss = total * inv;
  return out;
}

double mean_loss(const NetworkParams& params, const Matrix& features,
                 std::span<const int> targets, const LossSpec& loss) {
  if (features.rows() == 0) throw std::invalid_argument("loss: empty batch");
  check_targets(targets, features.rows(), loss.target_classes(params.output_dim()));
  Workspace ws(params);
  double total = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    total += sample_loss(run_forward(params, features.row(i), ws), targets[i], loss);
  }
  return total / static_cast<double>(features.rows());
}

NetworkParams train(const Matrix& features, std::span<const int> targets,
                    std::span<const LayerSpec> specs, const TrainConfig& config) {
  return train_from(init_params(specs, config.seed), features, targets, config);
}

NetworkParams train_from(NetworkParams params, const Matrix& features,
                         std::span<const int> targets, const TrainConfig& config) {
  config.validate();
  params.validate();
  if (features.rows() == 0) throw std::invalid_argument("train: empty dataset");
  if (features.cols() != params.input_dim()) {
    throw std::invalid_argument("train: feature dimension mismatch");
  }
  if (config.loss.kind == LossSpec::Kind::kDefer && params.output_dim() < 3) {
    throw std::invalid_argument("train: defer loss needs at least 3 outputs");
  }
  check_targets(targets, features.rows(),
                config.loss.target_classes(params.output_dim()));

  const std::size_t n = features.rows();
  NetworkParams grads = zeros_like(params);
  NetworkParams m = zeros_like(params);
  NetworkParams v = zeros_like(params);
  Workspace ws(params);
  std::vector<std::size_t> order(n);
  std::size_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      const std::span<const std::size_t> batch(order.data() + start, count);
      for (auto& layer : grads.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
      }
      const double loss =
          accumulate_gradients(params, features, targets, batch, config.loss, grads, ws) /
          static_cast<double>(count);
      ++step;
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("training diverged at step " + std::to_string(step) +
                               " (epoch " + std::to_string(epoch) + ")");
      }
      scale(grads, 1.0 / static_cast<double>(count));

      const kernels::AdamCoefficients coeffs{
          config.learning_rate, 0.9, 0.999, 1e-8,
          1.0 - std::pow(0.9, static_cast<double>(step)),
          1.0 - std::pow(0.999, static_cast<double>(step))};
      for_each_tensor(params, grads, m, v,
                      [&](std::vector<double>& w, std::vector<double>& g,
                          std::vector<double>& mt, std::vector<double>& vt) {
                        if (config.weight_decay > 0.0) {
                          kernels::axpy(config.weight_decay, w.data(), g.data(), w.size());
                        }
                        if (config.optimizer == Optimizer::kAdam) {
                          kernels::adam(w.data(), g.data(), mt.data(), vt.data(),
                                        w.size(), coeffs);
                        } else {
                          kernels::axpy(-config.learning_rate, g.data(), w.data(),
                                        w.size());
                        }
                      });
    }
  }
  return params;
}

void write_params(std::ostream& out, const NetworkParams& params) {
  params.validate();
  std::string text = "# activations";
  for (const auto& layer : params.layers) {
    text += ' ';
    text += activation_name(layer.spec.activation);
  }
  text += '\n';
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    append_tensor(text, l, 'W', layer.spec.output_dim, layer.spec.input_dim,
                  layer.weights);
    append_tensor(text, l, 'b', layer.spec.output_dim, 1, layer.bias);
  }
  out << text;
}

NetworkParams read_params(std::istream& in) {
  NetworkParams params;
  std::vector<Activation> activations;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("params line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (line[0] == '#') {
      std::string tag, name;
      fields >> tag >> tag;
      if (tag != "activations") continue;
      while (fields >> name) {
        if (name == "sigmoid") {
          activations.push_back(Activation::kSigmoid);
        } else if (name == "identity") {
          activations.push_back(Activation::kIdentity);
        } else {
          fail("unknown activation '" + name + "'");
        }
      }
      continue;
    }
    std::size_t layer = 0, rows = 0, cols = 0;
    char kind = 0;
    if (!(fields >> layer >> kind >> rows >> cols)) fail("malformed tensor header");
    std::vector<double> values;
    std::string token;
    while (fields >> token) values.push_back(parse_double(token, line_no));
    if (values.size() != rows * cols) fail("value count does not match shape");
    if (kind == 'W') {
      if (layer != params.layers.size()) fail("layers out of order");
      params.layers.push_back({{cols, rows, Activation::kIdentity}, std::move(values), {}});
    } else if (kind == 'b') {
      if (params.layers.empty() || layer + 1 != params.layers.size() || cols != 1 ||
          rows != params.layers.back().spec.output_dim) {
        fail("bias does not match its weight tensor");
      }
      params.layers.back().bias = std::move(values);
    } else {
      fail("unknown tensor kind");
    }
  }
  if (params.layers.empty()) throw std::invalid_argument("params: no tensors");
  if (activations.empty()) {
    for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
      activations.push_back(Activation::kSigmoid);
    }
    activations.push_back(Activation::kIdentity);
  }
  if (activations.size() != params.layers.size()) {
    throw std::invalid_argument("params: activation count does not match layers");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    params.layers[l].spec.activation = activations[l];
  }
  params.validate();
  return params;
}

void save_params(const std::filesystem::path& path, const NetworkParams& params) {
  std::ostringstream out;
  write_params(out, params);
  write_file_atomic(path, out.str());
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_params(in);
}

}  // namespace ldu
