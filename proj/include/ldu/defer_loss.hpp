#pragma once
// Weighted defer loss over C class logits plus one defer logit:
//
//   loss = -log p[target] - alpha * log p[defer],   p = softmax(logits)
//
// The defer output is always the last logit (index C).

#include <span>
#include <vector>

namespace ldu {

struct DeferLossParams {
  double alpha = 1.0;
  int class_count = 2;

  int defer_index() const { return class_count; }
  int output_count() const { return class_count + 1; }
  void validate() const;
};

// Evaluated as -x[t] - alpha x[d] + (1 + alpha) lse(x). Throws
// std::invalid_argument if target is the defer index or out of range.
double defer_loss_value(std::span<const double> logits, int target,
                        const DeferLossParams& params);

// (1 + alpha) softmax(x) - e_target - alpha e_defer.
std::vector<double> defer_loss_grad(std::span<const double> logits, int target,
                                    const DeferLossParams& params);

// Plain softmax cross-entropy over logits.size() classes.
double cross_entropy_value(std::span<const double> logits, int target);
std::vector<double> cross_entropy_grad(std::span<const double> logits, int target);

}  // namespace ldu
