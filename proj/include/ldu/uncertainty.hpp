#pragma once
// Stage-one uncertainty features computed from a deep ensemble's
// positive-class probabilities.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ldu/matrix.hpp"

namespace ldu {

inline constexpr int kBinaryClasses = 2;

// N x K matrix: entry (i, k) is ensemble member k's probability that
// sample i is positive.
struct PredictionMatrix {
  std::vector<std::int64_t> ids;
  Matrix probs;
  std::optional<std::vector<int>> labels;

  std::size_t samples() const { return probs.rows(); }
  std::size_t members() const { return probs.cols(); }

  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

// N x (K + 2): the K member probabilities followed by the ensemble entropy
// and the diagnostic entropy.
struct DeferFeatures {
  std::vector<std::int64_t> ids;
  Matrix rows;
  std::optional<std::vector<int>> labels;

  std::size_t samples() const { return rows.rows(); }
  std::size_t members() const { return rows.cols() >= 2 ? rows.cols() - 2 : 0; }
  double ensemble_entropy(std::size_t i) const { return rows(i, rows.cols() - 2); }
  double diagnostic_entropy(std::size_t i) const { return rows(i, rows.cols() - 1); }

  // First K columns as a PredictionMatrix.
  PredictionMatrix predictions() const;

  void validate() const;
};

// -sum_k P_k ln P_k over the member probabilities. The row is not a
// normalized distribution; the value is used as a feature.
double ensemble_entropy(std::span<const double> row);

// Fraction of members voting each class. A member votes class 1 iff its
// probability is strictly above 0.5. Only class_count == 2 is supported.
std::vector<double> vote_fractions(std::span<const double> row,
                                   int class_count = kBinaryClasses);

// Majority class of the member votes, ties to class 0.
int majority_class(std::span<const double> row);

// True when every member votes the same class.
bool votes_unanimous(std::span<const double> row);

// Shannon entropy (nats) of the vote fractions.
double diagnostic_entropy(std::span<const double> fractions);

// Assembles the stage-two inputs. sort_members reorders each row's member
// probabilities ascending; off by default so column k is member k.
DeferFeatures build_defer_features(const PredictionMatrix& matrix,
                                   bool sort_members = false);

}  // namespace ldu
