#pragma once
// Confusion-matrix metrics over triage verdicts and the alpha / threshold
// sweeps that produce F1-versus-defer-rate curves.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldu/triage.hpp"

namespace ldu {

struct LabeledDataset;

// One curve point. Undefined ratios (zero denominator) are empty, not 0.
struct MetricsRow {
  double param = 0.0;
  double defer_rate = 0.0;
  std::optional<double> f1;           // non-deferred samples
  std::optional<double> f1_overall;   // deferred samples scored as correct
  std::optional<double> accuracy;     // non-deferred samples
  std::optional<double> sensitivity;  // non-deferred samples
  std::optional<double> specificity;  // non-deferred samples

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// Positive-class F1. 0 when TP = 0 but FP + FN > 0; empty when all four
// counts that enter it are zero.
std::optional<double> f1_score(const Confusion& c);

// Labels must be in {0, 1}; class 1 is the positive class.
MetricsRow evaluate(std::span<const Verdict> decisions, std::span<const int> labels,
                    double param);

// Outcome of one sweep point: a row, or the error that stopped it.
struct SweepPoint {
  double param = 0.0;
  std::optional<MetricsRow> row;
  std::string error;
};

using DecisionFn = std::function<std::vector<Verdict>(double param)>;

// Calls decide(alpha) for every grid value (concurrently when threads > 1)
// and scores it against labels. Points come back sorted by alpha ascending;
// a failing point records its error without aborting the others.
std::vector<SweepPoint> sweep_alpha(std::span<const double> grid,
                                    const DecisionFn& decide,
                                    std::span<const int> labels, std::size_t threads);

// LDU sweep: one defer network per alpha, trained on `train` features with
// the same seed, scored on `test`.
std::vector<SweepPoint> sweep_ldu(const DeferFeatures& train, const DeferFeatures& test,
                                  std::span<const double> grid, const TrainConfig& config,
                                  const LduOptions& options, std::size_t threads);

// LD sweep on raw features.
std::vector<SweepPoint> sweep_ld(const LabeledDataset& train, const LabeledDataset& test,
                                 std::span<const double> grid, const TrainConfig& config,
                                 const LdOptions& options, std::size_t threads);

// DT sweep over thresholds on a labeled test matrix, rows in grid order.
std::vector<MetricsRow> sweep_threshold(const PredictionMatrix& matrix,
                                        std::span<const double> grid,
                                        EntropyMeasure measure);

}  // namespace ldu
