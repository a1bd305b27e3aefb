#pragma once
// The three routing strategies:
//   LDU - a defer network over ensemble probabilities and their entropies,
//   LD  - the diagnostic architecture with one extra defer output,
//   DT  - defer whenever an ensemble entropy exceeds a threshold.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ldu/neural_net.hpp"
#include "ldu/uncertainty.hpp"

namespace ldu {

// Either a class index or the distinguished defer verdict.
class Verdict {
 public:
  static constexpr Verdict defer() { return Verdict(kDefer); }
  static constexpr Verdict of_class(int c) { return Verdict(c); }

  constexpr bool is_defer() const { return value_ == kDefer; }
  // Class index; only meaningful when !is_defer().
  constexpr int class_index() const { return value_; }

  friend constexpr bool operator==(Verdict, Verdict) = default;

 private:
  static constexpr int kDefer = -1;
  constexpr explicit Verdict(int v) : value_(v) {}
  int value_;
};

enum class EntropyMeasure { kDiagnostic, kEnsemble };

struct DtConfig {
  double threshold = 0.0;
  EntropyMeasure measure = EntropyMeasure::kDiagnostic;
};

struct LduOptions {
  std::vector<std::size_t> hidden = {100, 100};
  bool sort_members = false;
};

struct LdOptions {
  std::vector<std::size_t> hidden = {16};
  // Start from a trained two-class diagnostic network with one defer row
  // appended, instead of fresh initialization.
  std::optional<NetworkParams> warm_start;
};

// Argmax over C + 1 logits, ties to the lowest index; index C is DEFER.
Verdict verdict_from_logits(std::span<const double> logits);

// Stage two: a (K+2) -> hidden -> (C+1) network trained with the defer loss
// at `alpha`. The loss field of `config` is overridden.
NetworkParams train_ldu(const DeferFeatures& features, double alpha,
                        TrainConfig config, const LduOptions& options = {});
NetworkParams train_ldu(const PredictionMatrix& matrix, double alpha,
                        const TrainConfig& config, const LduOptions& options = {});

std::vector<Verdict> decide_ldu(const NetworkParams& defer_net,
                                const DeferFeatures& features);

// Defer-augmented network on raw features.
NetworkParams train_ld(const Matrix& features, std::span<const int> labels,
                       double alpha, TrainConfig config, const LdOptions& options = {});

std::vector<Verdict> decide_ld(const NetworkParams& net, const Matrix& features);

// Appends a zero-initialized defer output to a trained diagnostic head.
NetworkParams add_defer_output(const NetworkParams& diagnostic);

// Defers sample i iff its entropy is strictly above the threshold;
// otherwise the ensemble majority class (ties to 0).
std::vector<Verdict> decide_dt(const PredictionMatrix& matrix, const DtConfig& config);

// Ensemble majority vote with no deferral.
std::vector<Verdict> majority_verdicts(const PredictionMatrix& matrix);

// Fraction of rows whose member votes are not unanimous: the largest defer
// rate DT can reach with the diagnostic measure.
double dt_ceiling(const PredictionMatrix& matrix);

}  // namespace ldu
