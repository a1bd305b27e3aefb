#include "ldu/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "ldu/data_io.hpp"
#include "ldu/parallel.hpp"

namespace ldu {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void tally(Confusion& c, int predicted, int actual) {
  if (predicted == 1) {
    (actual == 1 ? c.tp : c.fp)++;
  } else {
    (actual == 0 ? c.tn : c.fn)++;
  }
}

}  // namespace

std::optional<double> f1_score(const Confusion& c) {
  const std::size_t den = 2 * c.tp + c.fp + c.fn;
  if (den == 0) return std::nullopt;
  return static_cast<double>(2 * c.tp) / static_cast<double>(den);
}

MetricsRow evaluate(std::span<const Verdict> decisions, std::span<const int> labels,
                    double param) {
  if (decisions.size() != labels.size()) {
    throw std::invalid_argument("evaluate: decision and label counts differ");
  }
  if (decisions.empty()) throw std::invalid_argument("evaluate: no samples");
  Confusion kept;
  Confusion overall;
  std::size_t deferred = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw std::invalid_argument("evaluate: label outside {0, 1}");
    if (decisions[i].is_defer()) {
      ++deferred;
      tally(overall, y, y);
      continue;
    }
    const int c = decisions[i].class_index();
    if (c != 0 && c != 1) throw std::invalid_argument("evaluate: verdict outside {0, 1}");
    tally(kept, c, y);
    tally(overall, c, y);
  }
  MetricsRow row;
  row.param = param;
  row.defer_rate = static_cast<double>(deferred) / static_cast<double>(decisions.size());
  if (kept.total() > 0) row.f1 = f1_score(kept);
  row.f1_overall = f1_score(overall);
  row.accuracy = ratio(kept.tp + kept.tn, kept.total());
  row.sensitivity = ratio(kept.tp, kept.tp + kept.fn);
  row.specificity = ratio(kept.tn, kept.tn + kept.fp);
  return row;
}

std::vector<SweepPoint> sweep_alpha(std::span<const double> grid,
                                    const DecisionFn& decide,
                                    std::span<const int> labels, std::size_t threads) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::stable_sort(sorted.begin(), sorted.end());
  std::vector<SweepPoint> points(sorted.size());
  parallel_for(sorted.size(), threads, [&](std::size_t i) {
    points[i].param = sorted[i];
    try {
      points[i].row = evaluate(decide(sorted[i]), labels, sorted[i]);
    } catch (const std::exception& e) {
      points[i].error = e.what();
    }
  });
  return points;
}

std::vector<SweepPoint> sweep_ldu(const DeferFeatures& train, const DeferFeatures& test,
                                  std::span<const double> grid, const TrainConfig& config,
                                  const LduOptions& options, std::size_t threads) {
  if (!test.labels) throw std::invalid_argument("sweep_ldu: test features need labels");
  train.validate();
  test.validate();
  return sweep_alpha(
      grid,
      [&](double alpha) {
        const NetworkParams net = train_ldu(train, alpha, config, options);
        DeferFeatures inputs = test;
        if (options.sort_members) inputs = build_defer_features(test.predictions(), true);
        return decide_ldu(net, inputs);
      },
      *test.labels, threads);
}

std::vector<SweepPoint> sweep_ld(const LabeledDataset& train, const LabeledDataset& test,
                                 std::span<const double> grid, const TrainConfig& config,
                                 const LdOptions& options, std::size_t threads) {
  train.validate();
  test.validate();
  return sweep_alpha(
      grid,
      [&](double alpha) {
        const NetworkParams net =
            train_ld(train.features, train.labels, alpha, config, options);
        return decide_ld(net, test.features);
      },
      test.labels, threads);
}

std::vector<MetricsRow> sweep_threshold(const PredictionMatrix& matrix,
                                        std::span<const double> grid,
                                        EntropyMeasure measure) {
  if (!matrix.labels) throw std::invalid_argument("sweep_threshold: labels required");
  if (grid.empty()) throw std::invalid_argument("sweep_threshold: empty grid");
  std::vector<MetricsRow> rows;
  rows.reserve(grid.size());
  for (double tau : grid) {
    rows.push_back(evaluate(decide_dt(matrix, {tau, measure}), *matrix.labels, tau));
  }
  return rows;
}

}  // namespace ldu
