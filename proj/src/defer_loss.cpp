#include "ldu/defer_loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ldu/numerics.hpp"

namespace ldu {
namespace {

void check_inputs(std::span<const double> logits, int target,
                  const DeferLossParams& params) {
  params.validate();
  if (logits.size() != static_cast<std::size_t>(params.output_count())) {
    throw std::invalid_argument("defer loss: expected " +
                                std::to_string(params.output_count()) + " logits");
  }
  if (target == params.defer_index()) {
    throw std::invalid_argument("defer loss: the defer class is not a valid target");
  }
  if (target < 0 || target >= params.class_count) {
    throw std::invalid_argument("defer loss: target out of range");
  }
}

void check_target(std::span<const double> logits, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= logits.size()) {
    throw std::invalid_argument("cross entropy: target out of range");
  }
}

}  // namespace

void DeferLossParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("defer loss: alpha must be finite and >= 0");
  }
  if (class_count < 2) {
    throw std::invalid_argument("defer loss: class_count must be >= 2");
  }
}

double defer_loss_value(std::span<const double> logits, int target,
                        const DeferLossParams& params) {
  check_inputs(logits, target, params);
  const double lse = log_sum_exp(logits);
  const double defer_logit = logits[static_cast<std::size_t>(params.defer_index())];
  return -logits[static_cast<std::size_t>(target)] - params.alpha * defer_logit +
         (1.0 + params.alpha) * lse;
}

std::vector<double> defer_loss_grad(std::span<const double> logits, int target,
                                    const DeferLossParams& params) {
  check_inputs(logits, target, params);
  std::vector<double> grad = softmax(logits);
  for (double& g : grad) g *= 1.0 + params.alpha;
  grad[static_cast<std::size_t>(target)] -= 1.0;
  grad[static_cast<std::size_t>(params.defer_index())] -= params.alpha;
  return grad;
}

double cross_entropy_value(std::span<const double> logits, int target) {
  check_target(logits, target);
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(target)];
}

std::vector<double> cross_entropy_grad(std::span<const double> logits, int target) {
  check_target(logits, target);
  std::vector<double> grad = softmax(logits);
  grad[static_cast<std::size_t>(target)] -= 1.0;
  return grad;
}

}  // namespace ldu
