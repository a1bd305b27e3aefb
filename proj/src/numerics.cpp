#include "ldu/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ldu {
namespace {

void check_logits(std::span<const double> logits, const char* who) {
  if (logits.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty input");
  }
  for (double x : logits) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(who) + ": non-finite logit");
    }
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  check_logits(logits, "softmax");
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - max);
    total += out[j];
  }
  for (double& v : out) v /= total;
  return out;
}

double log_sum_exp(std::span<const double> logits) {
  check_logits(logits, "log_sum_exp");
  const double max = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double x : logits) total += std::exp(x - max);
  return max + std::log(total);
}

double xlogx(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("xlogx: argument outside [0, 1]");
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  return p * std::log(p);
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace ldu
