#include "ldu/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <string_view>

#include "ldu/rng.hpp"

namespace ldu {
namespace {

constexpr std::uint64_t kConfoundStream = 1;

void append_fixed(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  out += buf;
}

void append_optional(std::string& out, const std::optional<double>& v) {
  if (v) append_fixed(out, *v);
}

void append_member_header(std::string& out, bool with_label, std::size_t k) {
  out += with_label ? "id,label" : "id";
  for (std::size_t j = 0; j < k; ++j) out += ",p" + std::to_string(j);
}

void append_prob_rows(std::string& out, const std::vector<std::int64_t>& ids,
                      const Matrix& values, const std::optional<std::vector<int>>& labels) {
  for (std::size_t i = 0; i < values.rows(); ++i) {
    out += std::to_string(ids[i]);
    if (labels) out += ',' + std::to_string((*labels)[i]);
    for (double v : values.row(i)) {
      out += ',';
      append_fixed(out, v);
    }
    out += '\n';
  }
}

// Line-oriented CSV reader with a validated header.
class CsvTable {
 public:
  CsvTable(std::filesystem::path path) : path_(std::move(path)) {
    const std::string text = read_file(path_);
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no;
      if (!line.empty()) lines_.push_back({line_no, split(line)});
      start = end + 1;
    }
    if (lines_.empty()) fail(1, "empty file");
  }

  const std::vector<std::string>& header() const { return lines_.front().fields; }
  std::size_t records() const { return lines_.size() - 1; }
  std::size_t line_of(std::size_t r) const { return lines_[r + 1].number; }
  const std::vector<std::string>& record(std::size_t r) const {
    const auto& fields = lines_[r + 1].fields;
    if (fields.size() != header().size()) {
      fail(line_of(r), "expected " + std::to_string(header().size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    return fields;
  }

  void expect_header(const std::vector<std::string>& expected) const {
    if (header() != expected) {
      std::string joined;
      for (const auto& name : expected) joined += (joined.empty() ? "" : ",") + name;
      fail(lines_.front().number, "header mismatch, expected '" + joined + "'");
    }
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw ParseError(path_, line, what);
  }

  double number(std::size_t r, std::size_t col) const {
    const std::string& f = record(r)[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
      fail(line_of(r), "non-numeric field '" + f + "' in column " + header()[col]);
    }
    return v;
  }

  std::optional<double> optional_number(std::size_t r, std::size_t col) const {
    if (record(r)[col].empty()) return std::nullopt;
    return number(r, col);
  }

  std::int64_t integer(std::size_t r, std::size_t col) const {
    const std::string& f = record(r)[col];
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
      fail(line_of(r), "non-integer field '" + f + "' in column " + header()[col]);
    }
    return v;
  }

  int label(std::size_t r, std::size_t col) const {
    const std::int64_t v = integer(r, col);
    if (v != 0 && v != 1) fail(line_of(r), "label must be 0 or 1");
    return static_cast<int>(v);
  }

  double probability(std::size_t r, std::size_t col) const {
    const double p = number(r, col);
    if (p < 0.0 || p > 1.0) {
      fail(line_of(r), "probability " + record(r)[col] + " outside [0, 1] in column " +
                           header()[col]);
    }
    return p;
  }

  std::vector<std::int64_t> unique_ids() const {
    std::vector<std::int64_t> ids;
    std::set<std::int64_t> seen;
    for (std::size_t r = 0; r < records(); ++r) {
      const auto id = integer(r, 0);
      if (!seen.insert(id).second) fail(line_of(r), "duplicate id " + std::to_string(id));
      ids.push_back(id);
    }
    return ids;
  }

  void require_records() const {
    if (records() == 0) fail(lines_.front().number, "no data rows");
  }

 private:
  struct Line {
    std::size_t number;
    std::vector<std::string> fields;
  };

  static std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      out.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::filesystem::path path_;
  std::vector<Line> lines_;
};

std::vector<std::string> member_header(bool with_label, std::size_t k) {
  std::vector<std::string> names{"id"};
  if (with_label) names.emplace_back("label");
  for (std::size_t j = 0; j < k; ++j) names.push_back("p" + std::to_string(j));
  return names;
}

// Shared by preds.csv and features.csv: returns (has_label, K).
std::pair<bool, std::size_t> member_layout(const CsvTable& table, std::size_t extra) {
  const auto& h = table.header();
  const bool with_label = h.size() > 1 && h[1] == "label";
  const std::size_t fixed = (with_label ? 2 : 1) + extra;
  if (h.size() <= fixed) table.fail(1, "header mismatch, no member columns");
  return {with_label, h.size() - fixed};
}

const std::vector<std::string> kCurveHeader{"param",    "defer_rate",  "f1",
                                            "f1_overall", "accuracy", "sensitivity",
                                            "specificity"};

}  // namespace

void LabeledDataset::validate() const {
  if (features.rows() == 0) throw std::invalid_argument("dataset: no samples");
  if (ids.size() != features.rows() || labels.size() != features.rows()) {
    throw std::invalid_argument("dataset: ids/labels do not match rows");
  }
  std::set<std::int64_t> seen(ids.begin(), ids.end());
  if (seen.size() != ids.size()) throw std::invalid_argument("dataset: duplicate ids");
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("dataset: label outside {0, 1}");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out{{}, Matrix(rows.size(), dim()), {}};
  out.ids.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.ids.push_back(ids[rows[i]]);
    out.labels.push_back(labels[rows[i]]);
    std::copy_n(features.row(rows[i]).begin(), dim(), out.features.row(i).begin());
  }
  return out;
}

void SyntheticConfig::validate() const {
  if (n < 2) throw std::invalid_argument("synthetic: n must be >= 2");
  if (d == 0) throw std::invalid_argument("synthetic: d must be >= 1");
  if (!std::isfinite(mu)) throw std::invalid_argument("synthetic: mu must be finite");
  if (!(confound_fraction >= 0.0 && confound_fraction <= 1.0)) {
    throw std::invalid_argument("synthetic: confound_fraction outside [0, 1]");
  }
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw std::invalid_argument("synthetic: flip_prob outside [0, 1]");
  }
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SyntheticData out;
  LabeledDataset& data = out.dataset;
  data.features = Matrix(config.n, config.d);
  for (std::size_t i = 0; i < config.n; ++i) {
    const int y = static_cast<int>(i % 2);
    data.ids.push_back(static_cast<std::int64_t>(i));
    data.labels.push_back(y);
    const double center = y == 1 ? config.mu : -config.mu;
    for (double& x : data.features.row(i)) x = center + rng.normal();
  }
  out.clean_labels = data.labels;

  const auto region_size = static_cast<std::size_t>(
      std::llround(config.confound_fraction * static_cast<double>(config.n)));
  std::vector<std::size_t> order(config.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.features(a, 0) > data.features(b, 0);
  });
  order.resize(region_size);
  std::sort(order.begin(), order.end());
  Rng flip_rng(mix_seed(config.seed, kConfoundStream));
  for (std::size_t i : order) {
    if (flip_rng.bernoulli(config.flip_prob)) {
      data.labels[i] = 1 - data.labels[i];
      ++out.flipped;
    }
  }
  return out;
}

LabeledDataset gen_synthetic(const SyntheticConfig& config) {
  return generate_synthetic(config).dataset;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& dataset,
                                                        double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split: ratio must be in (0, 1)");
  }
  dataset.validate();
  const std::size_t n = dataset.size();
  // The epsilon absorbs representation error, e.g. 0.7 * 10 must give 7.
  const auto train_size =
      static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  if (train_size == 0 || train_size == n) {
    throw std::invalid_argument("split: ratio leaves an empty partition");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const std::span<const std::size_t> all(order);
  return {dataset.subset(all.first(train_size)), dataset.subset(all.subspan(train_size))};
}

ParseError::ParseError(const std::filesystem::path& path, std::size_t line,
                       const std::string& what)
    : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

std::string format_dataset_csv(const LabeledDataset& dataset) {
  dataset.validate();
  std::string out = "id,label";
  for (std::size_t j = 0; j < dataset.dim(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  append_prob_rows(out, dataset.ids, dataset.features, dataset.labels);
  return out;
}

std::string format_preds_csv(const PredictionMatrix& matrix) {
  matrix.validate();
  std::string out;
  append_member_header(out, matrix.labels.has_value(), matrix.members());
  out += '\n';
  append_prob_rows(out, matrix.ids, matrix.probs, matrix.labels);
  return out;
}

std::string format_features_csv(const DeferFeatures& features) {
  features.validate();
  std::string out;
  append_member_header(out, features.labels.has_value(), features.members());
  out += ",u_e,u_d\n";
  append_prob_rows(out, features.ids, features.rows, features.labels);
  return out;
}

std::string format_curve_csv(std::span<const MetricsRow> rows) {
  std::string out;
  for (std::size_t j = 0; j < kCurveHeader.size(); ++j) {
    out += (j ? "," : "") + kCurveHeader[j];
  }
  out += '\n';
  for (const auto& row : rows) {
    append_fixed(out, row.param);
    out += ',';
    append_fixed(out, row.defer_rate);
    for (const auto* v : {&row.f1, &row.f1_overall, &row.accuracy, &row.sensitivity,
                          &row.specificity}) {
      out += ',';
      append_optional(out, *v);
    }
    out += '\n';
  }
  return out;
}

std::string format_decisions_csv(std::span<const std::int64_t> ids,
                                 std::span<const Verdict> verdicts) {
  if (ids.size() != verdicts.size()) {
    throw std::invalid_argument("decisions: id and verdict counts differ");
  }
  std::string out = "id,verdict\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += std::to_string(ids[i]) + ',';
    out += verdicts[i].is_defer() ? std::string("DEFER")
                                  : std::to_string(verdicts[i].class_index());
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
  write_file_atomic(path, format_dataset_csv(dataset));
}

void write_preds_csv(const std::filesystem::path& path, const PredictionMatrix& matrix) {
  write_file_atomic(path, format_preds_csv(matrix));
}

void write_features_csv(const std::filesystem::path& path, const DeferFeatures& features) {
  write_file_atomic(path, format_features_csv(features));
}

void write_curve_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows) {
  write_file_atomic(path, format_curve_csv(rows));
}

void write_decisions_csv(const std::filesystem::path& path,
                         std::span<const std::int64_t> ids,
                         std::span<const Verdict> verdicts) {
  write_file_atomic(path, format_decisions_csv(ids, verdicts));
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  const CsvTable table(path);
  const std::size_t d = table.header().size() >= 2 ? table.header().size() - 2 : 0;
  std::vector<std::string> expected{"id", "label"};
  for (std::size_t j = 0; j < d; ++j) expected.push_back("f" + std::to_string(j));
  table.expect_header(expected);
  if (d == 0) table.fail(1, "header mismatch, no feature columns");
  table.require_records();
  LabeledDataset out{table.unique_ids(), Matrix(table.records(), d), {}};
  for (std::size_t r = 0; r < table.records(); ++r) {
    out.labels.push_back(table.label(r, 1));
    for (std::size_t j = 0; j < d; ++j) out.features(r, j) = table.number(r, 2 + j);
  }
  return out;
}

PredictionMatrix read_preds_csv(const std::filesystem::path& path) {
  const CsvTable table(path);
  const auto [with_label, k] = member_layout(table, 0);
  table.expect_header(member_header(with_label, k));
  table.require_records();
  const std::size_t first = with_label ? 2 : 1;
  PredictionMatrix out{table.unique_ids(), Matrix(table.records(), k), std::nullopt};
  if (with_label) out.labels.emplace();
  for (std::size_t r = 0; r < table.records(); ++r) {
    if (with_label) out.labels->push_back(table.label(r, 1));
    for (std::size_t j = 0; j < k; ++j) out.probs(r, j) = table.probability(r, first + j);
  }
  return out;
}

DeferFeatures read_features_csv(const std::filesystem::path& path) {
  const CsvTable table(path);
  const auto [with_label, k] = member_layout(table, 2);
  auto expected = member_header(with_label, k);
  expected.emplace_back("u_e");
  expected.emplace_back("u_d");
  table.expect_header(expected);
  table.require_records();
  const std::size_t first = with_label ? 2 : 1;
  DeferFeatures out{table.unique_ids(), Matrix(table.records(), k + 2), std::nullopt};
  if (with_label) out.labels.emplace();
  // Printed at 9 decimals, ln 2 itself may round up by < 1e-9.
  const double max_ud = std::numbers::ln2 + 1e-9;
  for (std::size_t r = 0; r < table.records(); ++r) {
    if (with_label) out.labels->push_back(table.label(r, 1));
    for (std::size_t j = 0; j < k; ++j) out.rows(r, j) = table.probability(r, first + j);
    const double ue = table.number(r, first + k);
    const double ud = table.number(r, first + k + 1);
    if (ue < 0.0) table.fail(table.line_of(r), "u_e must be >= 0");
    if (ud < 0.0 || ud > max_ud) table.fail(table.line_of(r), "u_d outside [0, ln 2]");
    out.rows(r, k) = ue;
    out.rows(r, k + 1) = std::min(ud, std::numbers::ln2);
  }
  return out;
}

std::vector<MetricsRow> read_curve_csv(const std::filesystem::path& path) {
  const CsvTable table(path);
  table.expect_header(kCurveHeader);
  std::vector<MetricsRow> rows;
  for (std::size_t r = 0; r < table.records(); ++r) {
    MetricsRow row;
    row.param = table.number(r, 0);
    row.defer_rate = table.number(r, 1);
    if (row.defer_rate < 0.0 || row.defer_rate > 1.0) {
      table.fail(table.line_of(r), "defer_rate outside [0, 1]");
    }
    std::optional<double>* fields[] = {&row.f1, &row.f1_overall, &row.accuracy,
                                       &row.sensitivity, &row.specificity};
    for (std::size_t j = 0; j < 5; ++j) {
      *fields[j] = table.optional_number(r, 2 + j);
      if (*fields[j] && (**fields[j] < 0.0 || **fields[j] > 1.0)) {
        table.fail(table.line_of(r), kCurveHeader[2 + j] + " outside [0, 1]");
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::pair<std::int64_t, Verdict>> read_decisions_csv(
    const std::filesystem::path& path) {
  const CsvTable table(path);
  table.expect_header({"id", "verdict"});
  std::vector<std::pair<std::int64_t, Verdict>> out;
  for (std::size_t r = 0; r < table.records(); ++r) {
    const std::string& v = table.record(r)[1];
    Verdict verdict = Verdict::defer();
    if (v == "0" || v == "1") {
      verdict = Verdict::of_class(v == "1" ? 1 : 0);
    } else if (v != "DEFER") {
      table.fail(table.line_of(r), "verdict must be 0, 1 or DEFER");
    }
    out.emplace_back(table.integer(r, 0), verdict);
  }
  return out;
}

}  // namespace ldu
