#include "ldu/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ldu/numerics.hpp"

namespace ldu {
namespace {

void check_probability_row(std::span<const double> row, const char* who) {
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string(who) + ": probability outside [0, 1]");
    }
  }
}

void check_labels(const std::optional<std::vector<int>>& labels, std::size_t n) {
  if (!labels) return;
  if (labels->size() != n) {
    throw std::invalid_argument("label count does not match sample count");
  }
  for (int y : *labels) {
    if (y < 0 || y >= kBinaryClasses) {
      throw std::invalid_argument("label outside {0, 1}");
    }
  }
}

std::size_t positive_votes(std::span<const double> row) {
  return static_cast<std::size_t>(
      std::count_if(row.begin(), row.end(), [](double p) { return p > 0.5; }));
}

}  // namespace

void PredictionMatrix::validate() const {
  if (probs.rows() == 0 || probs.cols() == 0) {
    throw std::invalid_argument("PredictionMatrix: needs N >= 1 and K >= 1");
  }
  if (ids.size() != probs.rows()) {
    throw std::invalid_argument("PredictionMatrix: id count does not match rows");
  }
  check_probability_row(probs.values(), "PredictionMatrix");
  check_labels(labels, probs.rows());
}

PredictionMatrix DeferFeatures::predictions() const {
  const std::size_t k = members();
  Matrix probs(samples(), k);
  for (std::size_t i = 0; i < samples(); ++i) {
    std::copy_n(rows.row(i).begin(), k, probs.row(i).begin());
  }
  return {ids, std::move(probs), labels};
}

void DeferFeatures::validate() const {
  if (rows.rows() == 0 || rows.cols() < 3) {
    throw std::invalid_argument("DeferFeatures: needs N >= 1 and K >= 1");
  }
  if (ids.size() != rows.rows()) {
    throw std::invalid_argument("DeferFeatures: id count does not match rows");
  }
  const double max_ud = std::numbers::ln2 + 1e-12;
  for (std::size_t i = 0; i < samples(); ++i) {
    check_probability_row(rows.row(i).first(members()), "DeferFeatures");
    if (!(ensemble_entropy(i) >= 0.0) || !std::isfinite(ensemble_entropy(i))) {
      throw std::invalid_argument("DeferFeatures: negative ensemble entropy");
    }
    if (!(diagnostic_entropy(i) >= 0.0 && diagnostic_entropy(i) <= max_ud)) {
      throw std::invalid_argument("DeferFeatures: diagnostic entropy outside [0, ln 2]");
    }
  }
  check_labels(labels, rows.rows());
}

double ensemble_entropy(std::span<const double> row) {
  check_probability_row(row, "ensemble_entropy");
  double sum = 0.0;
  for (double p : row) sum += xlogx(p);
  return sum == 0.0 ? 0.0 : -sum;
}

std::vector<double> vote_fractions(std::span<const double> row, int class_count) {
  if (row.empty()) {
    throw std::invalid_argument("vote_fractions: empty ensemble");
  }
  if (class_count != kBinaryClasses) {
    throw std::invalid_argument("vote_fractions: only binary tasks are supported");
  }
  check_probability_row(row, "vote_fractions");
  const std::size_t k = row.size();
  const std::size_t positive = positive_votes(row);
  // Both fractions are m/K, so they sum to exactly 1.
  return {static_cast<double>(k - positive) / static_cast<double>(k),
          static_cast<double>(positive) / static_cast<double>(k)};
}

int majority_class(std::span<const double> row) {
  const std::size_t positive = positive_votes(row);
  return 2 * positive > row.size() ? 1 : 0;
}

bool votes_unanimous(std::span<const double> row) {
  const std::size_t positive = positive_votes(row);
  return positive == 0 || positive == row.size();
}

double diagnostic_entropy(std::span<const double> fractions) {
  if (fractions.empty()) {
    throw std::invalid_argument("diagnostic_entropy: empty input");
  }
  check_probability_row(fractions, "diagnostic_entropy");
  double total = 0.0;
  for (double p : fractions) total += p;
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("diagnostic_entropy: fractions do not sum to 1");
  }
  double sum = 0.0;
  for (double p : fractions) sum += xlogx(p);
  return sum == 0.0 ? 0.0 : -sum;
}

DeferFeatures build_defer_features(const PredictionMatrix& matrix, bool sort_members) {
  matrix.validate();
  const std::size_t k = matrix.members();
  DeferFeatures out{matrix.ids, Matrix(matrix.samples(), k + 2), matrix.labels};
  for (std::size_t i = 0; i < matrix.samples(); ++i) {
    const auto src = matrix.probs.row(i);
    auto dst = out.rows.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    if (sort_members) std::sort(dst.begin(), dst.begin() + k);
    dst[k] = ensemble_entropy(src);
    dst[k + 1] = diagnostic_entropy(vote_fractions(src));
  }
  return out;
}

}  // namespace ldu
