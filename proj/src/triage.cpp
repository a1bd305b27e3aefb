#include "ldu/triage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldu {
namespace {

std::vector<Verdict> argmax_verdicts(const NetworkParams& net, const Matrix& inputs) {
  const Matrix logits = forward_batch(net, inputs);
  std::vector<Verdict> out;
  out.reserve(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    out.push_back(verdict_from_logits(logits.row(i)));
  }
  return out;
}

const std::vector<int>& require_labels(const std::optional<std::vector<int>>& labels) {
  if (!labels) throw std::invalid_argument("labels are required for training");
  return *labels;
}

double entropy_of(const PredictionMatrix& matrix, std::size_t i, EntropyMeasure measure) {
  const auto row = matrix.probs.row(i);
  return measure == EntropyMeasure::kEnsemble
             ? ensemble_entropy(row)
             : diagnostic_entropy(vote_fractions(row));
}

}  // namespace

Verdict verdict_from_logits(std::span<const double> logits) {
  if (logits.size() < 2) throw std::invalid_argument("verdict: need >= 2 logits");
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.size(); ++j) {
    if (logits[j] > logits[best]) best = j;
  }
  if (best + 1 == logits.size()) return Verdict::defer();
  return Verdict::of_class(static_cast<int>(best));
}

NetworkParams train_ldu(const DeferFeatures& features, double alpha,
                        TrainConfig config, const LduOptions& options) {
  features.validate();
  const auto& labels = require_labels(features.labels);
  config.loss = LossSpec::defer(alpha);
  Matrix inputs = features.rows;
  if (options.sort_members) {
    const std::size_t k = features.members();
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
      auto row = inputs.row(i);
      std::sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  const auto specs = mlp_specs(inputs.cols(), options.hidden, kBinaryClasses + 1);
  return train(inputs, labels, specs, config);
}

NetworkParams train_ldu(const PredictionMatrix& matrix, double alpha,
                        const TrainConfig& config, const LduOptions& options) {
  // Sorting is applied once, inside the DeferFeatures overload.
  return train_ldu(build_defer_features(matrix), alpha, config, options);
}

std::vector<Verdict> decide_ldu(const NetworkParams& defer_net,
                                const DeferFeatures& features) {
  if (defer_net.input_dim() != features.rows.cols()) {
    throw std::invalid_argument("decide_ldu: network expects " +
                                std::to_string(defer_net.input_dim()) + " inputs");
  }
  return argmax_verdicts(defer_net, features.rows);
}

NetworkParams train_ld(const Matrix& features, std::span<const int> labels,
                       double alpha, TrainConfig config, const LdOptions& options) {
  config.loss = LossSpec::defer(alpha);
  if (options.warm_start) {
    return train_from(add_defer_output(*options.warm_start), features, labels, config);
  }
  const auto specs = mlp_specs(features.cols(), options.hidden, kBinaryClasses + 1);
  return train(features, labels, specs, config);
}

std::vector<Verdict> decide_ld(const NetworkParams& net, const Matrix& features) {
  if (net.input_dim() != features.cols()) {
    throw std::invalid_argument("decide_ld: feature dimension mismatch");
  }
  return argmax_verdicts(net, features);
}

NetworkParams add_defer_output(const NetworkParams& diagnostic) {
  diagnostic.validate();
  NetworkParams out = diagnostic;
  DenseLayer& head = out.layers.back();
  head.spec.output_dim += 1;
  head.weights.resize(head.weights.size() + head.spec.input_dim, 0.0);
  head.bias.push_back(0.0);
  return out;
}

std::vector<Verdict> decide_dt(const PredictionMatrix& matrix, const DtConfig& config) {
  matrix.validate();
  if (!std::isfinite(config.threshold) || config.threshold < 0.0) {
    throw std::invalid_argument("decide_dt: threshold must be finite and >= 0");
  }
  std::vector<Verdict> out;
  out.reserve(matrix.samples());
  for (std::size_t i = 0; i < matrix.samples(); ++i) {
    if (entropy_of(matrix, i, config.measure) > config.threshold) {
      out.push_back(Verdict::defer());
    } else {
      out.push_back(Verdict::of_class(majority_class(matrix.probs.row(i))));
    }
  }
  return out;
}

std::vector<Verdict> majority_verdicts(const PredictionMatrix& matrix) {
  matrix.validate();
  std::vector<Verdict> out;
  out.reserve(matrix.samples());
  for (std::size_t i = 0; i < matrix.samples(); ++i) {
    out.push_back(Verdict::of_class(majority_class(matrix.probs.row(i))));
  }
  return out;
}

double dt_ceiling(const PredictionMatrix& matrix) {
  matrix.validate();
  std::size_t split = 0;
  for (std::size_t i = 0; i < matrix.samples(); ++i) {
    if (!votes_unanimous(matrix.probs.row(i))) ++split;
  }
  return static_cast<double>(split) / static_cast<double>(matrix.samples());
}

}  // namespace ldu
