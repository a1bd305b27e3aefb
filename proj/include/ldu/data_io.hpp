#pragma once
// Synthetic diagnostic tasks, train/test splitting, and CSV persistence.
//
// File schemas (floats printed with 9 decimals, one record per line):
//   dataset.csv    id,label,f0,...,f{d-1}
//   preds.csv      id[,label],p0,...,p{K-1}
//   features.csv   id[,label],p0,...,p{K-1},u_e,u_d
//   curve.csv      param,defer_rate,f1,f1_overall,accuracy,sensitivity,specificity
//   decisions.csv  id,verdict            (verdict: 0, 1 or DEFER)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ldu/file_util.hpp"
#include "ldu/matrix.hpp"
#include "ldu/metrics.hpp"
#include "ldu/triage.hpp"
#include "ldu/uncertainty.hpp"

namespace ldu {

struct LabeledDataset {
  std::vector<std::int64_t> ids;
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  // Unique ids, labels in {0, 1}, at least one sample.
  void validate() const;
  LabeledDataset subset(std::span<const std::size_t> rows) const;
};

struct SyntheticConfig {
  std::size_t n = 4000;
  std::size_t d = 8;
  double mu = 1.0;
  double confound_fraction = 0.1;
  double flip_prob = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  LabeledDataset dataset;
  std::vector<int> clean_labels;  // labels before confound flips
  std::size_t flipped = 0;
};

// Balanced two-blob task (class means at -mu*1 and +mu*1, unit variance).
// The confound_fraction of samples with the largest first feature have
// their label flipped with probability flip_prob.
SyntheticData generate_synthetic(const SyntheticConfig& config);
LabeledDataset gen_synthetic(const SyntheticConfig& config);

// Seeded permutation, then the first floor(ratio * N) rows become train.
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& dataset,
                                                        double ratio, std::uint64_t seed);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::filesystem::path& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string format_dataset_csv(const LabeledDataset& dataset);
std::string format_preds_csv(const PredictionMatrix& matrix);
std::string format_features_csv(const DeferFeatures& features);
std::string format_curve_csv(std::span<const MetricsRow> rows);
std::string format_decisions_csv(std::span<const std::int64_t> ids,
                                 std::span<const Verdict> verdicts);

// Atomic writes; throw IoError on failure.
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset);
void write_preds_csv(const std::filesystem::path& path, const PredictionMatrix& matrix);
void write_features_csv(const std::filesystem::path& path, const DeferFeatures& features);
void write_curve_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);
void write_decisions_csv(const std::filesystem::path& path,
                         std::span<const std::int64_t> ids,
                         std::span<const Verdict> verdicts);

// Readers validate the header and per-type invariants; violations raise
// ParseError carrying the 1-based line number.
LabeledDataset read_dataset_csv(const std::filesystem::path& path);
PredictionMatrix read_preds_csv(const std::filesystem::path& path);
DeferFeatures read_features_csv(const std::filesystem::path& path);
std::vector<MetricsRow> read_curve_csv(const std::filesystem::path& path);
std::vector<std::pair<std::int64_t, Verdict>> read_decisions_csv(
    const std::filesystem::path& path);

}  // namespace ldu
