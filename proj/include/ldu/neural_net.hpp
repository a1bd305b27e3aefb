#pragma once
// Small fully connected networks trained from scratch: dense layers with
// sigmoid or identity activations and a softmax head applied by the loss.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldu/matrix.hpp"

namespace ldu {

enum class Activation { kSigmoid, kIdentity };

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DenseLayer {
  LayerSpec spec;
  std::vector<double> weights;  // output_dim x input_dim, row-major
  std::vector<double> bias;     // output_dim

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NetworkParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().spec.input_dim; }
  std::size_t output_dim() const { return layers.back().spec.output_dim; }
  std::vector<LayerSpec> specs() const;
  std::size_t parameter_count() const;

  // Shapes chain and every parameter is finite.
  void validate() const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// input -> hidden... (sigmoid) -> output (identity logits).
std::vector<LayerSpec> mlp_specs(std::size_t input_dim,
                                 std::span<const std::size_t> hidden,
                                 std::size_t output_dim);

struct LossSpec {
  enum class Kind { kCrossEntropy, kDefer };
  Kind kind = Kind::kCrossEntropy;
  double alpha = 0.0;  // defer weight, used by kDefer only

  static LossSpec cross_entropy() { return {Kind::kCrossEntropy, 0.0}; }
  static LossSpec defer(double alpha) { return {Kind::kDefer, alpha}; }

  // Number of valid target classes for a head with `outputs` logits.
  std::size_t target_classes(std::size_t outputs) const {
    return kind == Kind::kDefer ? outputs - 1 : outputs;
  }
};

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 9e-4;
  std::size_t batch_size = 32;
  Optimizer optimizer = Optimizer::kAdam;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  LossSpec loss = LossSpec::cross_entropy();

  void validate() const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
NetworkParams init_params(std::span<const LayerSpec> specs, std::uint64_t seed);

// Raw logits for one sample.
std::vector<double> forward(const NetworkParams& params,
                            std::span<const double> features);

// Logits for every row of `features`.
Matrix forward_batch(const NetworkParams& params, const Matrix& features);

struct Gradients {
  NetworkParams grad;  // same shapes as the parameters
  double loss = 0.0;   // mean batch loss
};

// Gradient of the mean batch loss over all rows of `features`.
Gradients network_gradients(const NetworkParams& params, const Matrix& features,
                            std::span<const int> targets, const LossSpec& loss);

double mean_loss(const NetworkParams& params, const Matrix& features,
                 std::span<const int> targets, const LossSpec& loss);

// epochs * ceil(N / batch_size) optimizer steps over mini-batches drawn
// from one seeded permutation per epoch. Throws TrainingDiverged when a
// batch loss becomes non-finite.
NetworkParams train(const Matrix& features, std::span<const int> targets,
                    std::span<const LayerSpec> specs, const TrainConfig& config);

// As train(), starting from existing parameters.
NetworkParams train_from(NetworkParams start, const Matrix& features,
                         std::span<const int> targets, const TrainConfig& config);

// Text format, one tensor per line: `layer kind rows cols v1 v2 ...` with
// kind W or b and 17 significant digits. A leading `# activations ...`
// line records the per-layer activation.
void write_params(std::ostream& out, const NetworkParams& params);
NetworkParams read_params(std::istream& in);
void save_params(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace ldu
