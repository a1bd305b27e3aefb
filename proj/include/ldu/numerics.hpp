#pragma once
// Stable scalar and vector primitives. All logarithms are natural, so
// every entropy in this library is measured in nats.

#include <span>
#include <vector>

namespace ldu {

// Max-subtracted softmax. Throws std::invalid_argument on empty or
// non-finite input.
std::vector<double> softmax(std::span<const double> logits);

// log(sum_j exp(x_j)), evaluated without overflow.
double log_sum_exp(std::span<const double> logits);

// p * ln(p) with the 0 * ln(0) = 0 convention. Exactly 0 at p = 0 and
// p = 1. Throws std::invalid_argument outside [0, 1].
double xlogx(double p);

double sigmoid(double x);

}  // namespace ldu
