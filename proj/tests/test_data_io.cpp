#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "ldu/data_io.hpp"
#include "ldu/file_util.hpp"
#include "test_support.hpp"

namespace ldu {
namespace {

double round9(double x) { return std::round(x * 1e9) / 1e9; }

bool close9(double a, double b) { return std::abs(a - b) <= 5e-10 + 1e-15 * std::abs(a); }

bool matrices_close9(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    if (!close9(a.values()[i], b.values()[i])) return false;
  }
  return true;
}

PredictionMatrix random_preds(std::mt19937_64& gen, std::size_t n, std::size_t k,
                              bool labeled) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PredictionMatrix m;
  m.probs = Matrix(n, k);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.ids.push_back(static_cast<std::int64_t>(i * 3 + 1));
    labels[i] = unit(gen) < 0.5 ? 0 : 1;
    for (std::size_t j = 0; j < k; ++j) m.probs(i, j) = unit(gen);
  }
  m.probs(0, 0) = 0.0;
  m.probs(n - 1, k - 1) = 1.0;
  if (labeled) m.labels = labels;
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text);
}

template <class Fn>
std::size_t parse_error_line(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("synthetic generator is deterministic and balanced") {
  SyntheticConfig config;
  config.n = 10000;
  config.seed = 77;
  const auto a = generate_synthetic(config);
  const auto b = generate_synthetic(config);
  CHECK(format_dataset_csv(a.dataset) == format_dataset_csv(b.dataset));
  CHECK(a.dataset.size() == 10000);
  CHECK(a.dataset.dim() == 8);
  const auto positives = std::count(a.clean_labels.begin(), a.clean_labels.end(), 1);
  CHECK(std::abs(static_cast<double>(positives) / 10000.0 - 0.5) <= 0.02);
  // Binomial(1000, 0.8): mean 800, sigma = sqrt(160).
  const double sigma = std::sqrt(1000.0 * 0.8 * 0.2);
  CHECK(std::abs(static_cast<double>(a.flipped) - 800.0) <= 3.0 * sigma);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    changed += a.dataset.labels[i] != a.clean_labels[i] ? 1 : 0;
  }
  CHECK(changed == a.flipped);
  config.seed = 78;
  CHECK(format_dataset_csv(generate_synthetic(config).dataset) !=
        format_dataset_csv(a.dataset));
}

TEST_CASE("flips only happen among the largest first features") {
  SyntheticConfig config;
  config.n = 2000;
  config.seed = 3;
  const auto data = generate_synthetic(config);
  std::vector<double> f0;
  for (std::size_t i = 0; i < 2000; ++i) f0.push_back(data.dataset.features(i, 0));
  std::vector<double> sorted = f0;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double cutoff = sorted[199];
  for (std::size_t i = 0; i < 2000; ++i) {
    if (data.dataset.labels[i] != data.clean_labels[i]) CHECK(f0[i] >= cutoff);
  }
}

TEST_CASE("degenerate generator config gives clean blobs") {
  SyntheticConfig config;
  config.n = 500;
  config.confound_fraction = 0.0;
  config.flip_prob = 0.0;
  config.seed = 4;
  const auto data = generate_synthetic(config);
  CHECK(data.flipped == 0);
  CHECK(data.dataset.labels == data.clean_labels);
  double mean_pos = 0.0, mean_neg = 0.0;
  for (std::size_t i = 0; i < 500; ++i) {
    (data.dataset.labels[i] ? mean_pos : mean_neg) += data.dataset.features(i, 0) / 250.0;
  }
  CHECK(mean_pos == doctest::Approx(1.0).epsilon(0.2));
  CHECK(mean_neg == doctest::Approx(-1.0).epsilon(0.2));
}

TEST_CASE("generator config validation") {
  SyntheticConfig config;
  config.n = 1;
  CHECK_THROWS_AS(gen_synthetic(config), std::invalid_argument);
  config.n = 10;
  config.flip_prob = 1.5;
  CHECK_THROWS_AS(gen_synthetic(config), std::invalid_argument);
  config.flip_prob = 0.5;
  config.confound_fraction = -0.1;
  CHECK_THROWS_AS(gen_synthetic(config), std::invalid_argument);
}

TEST_CASE("split sizes follow the floor rule and partition the ids") {
  SyntheticConfig config;
  config.n = 10;
  config.seed = 5;
  const auto data = gen_synthetic(config);
  const auto [train, test] = split_dataset(data, 0.7, 9);
  CHECK(train.size() == 7);
  CHECK(test.size() == 3);
  std::set<std::int64_t> seen(train.ids.begin(), train.ids.end());
  for (auto id : test.ids) CHECK(seen.insert(id).second);
  CHECK(seen == std::set<std::int64_t>(data.ids.begin(), data.ids.end()));
  const auto [train2, test2] = split_dataset(data, 0.7, 9);
  CHECK(train2.ids == train.ids);
  CHECK(test2.features == test.features);
  CHECK_THROWS_AS(split_dataset(data, 1.0, 9), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(data, 0.0, 9), std::invalid_argument);
}

TEST_CASE("dataset CSV round-trips at printed precision") {
  test::ScratchDir dir("dataset");
  SyntheticConfig config;
  config.n = 50;
  config.d = 3;
  config.seed = 6;
  const auto data = gen_synthetic(config);
  write_dataset_csv(dir / "d.csv", data);
  const auto back = read_dataset_csv(dir / "d.csv");
  CHECK(back.ids == data.ids);
  CHECK(back.labels == data.labels);
  CHECK(matrices_close9(back.features, data.features));
  const auto text = read_file(dir / "d.csv");
  CHECK(text.rfind("id,label,f0,f1,f2\n", 0) == 0);
  CHECK(text.back() == '\n');
  write_dataset_csv(dir / "d.csv", data);
  CHECK(read_file(dir / "d.csv") == text);
  // Reading the rounded values back and rewriting is a fixed point.
  write_dataset_csv(dir / "e.csv", back);
  CHECK(read_file(dir / "e.csv") == text);
}

TEST_CASE("preds CSV round-trips with and without labels") {
  test::ScratchDir dir("preds");
  std::mt19937_64 gen(7);
  for (bool labeled : {true, false}) {
    const auto m = random_preds(gen, 30, 5, labeled);
    write_preds_csv(dir / "p.csv", m);
    const auto text = read_file(dir / "p.csv");
    CHECK(text.rfind(labeled ? "id,label,p0," : "id,p0,", 0) == 0);
    const auto back = read_preds_csv(dir / "p.csv");
    CHECK(back.ids == m.ids);
    CHECK(back.labels == m.labels);
    CHECK(matrices_close9(back.probs, m.probs));
    CHECK(format_preds_csv(back) == text);
  }
}

TEST_CASE("features CSV round-trips") {
  test::ScratchDir dir("features");
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = build_defer_features(random_preds(gen, 20, 4 + trial, trial % 2 == 0));
    write_features_csv(dir / "f.csv", f);
    const auto back = read_features_csv(dir / "f.csv");
    CHECK(back.ids == f.ids);
    CHECK(back.labels == f.labels);
    CHECK(matrices_close9(back.rows, f.rows));
    CHECK(format_features_csv(back) == format_features_csv(f));
  }
  const auto text = format_features_csv(build_defer_features(random_preds(gen, 3, 2, true)));
  CHECK(text.rfind("id,label,p0,p1,u_e,u_d\n", 0) == 0);
}

TEST_CASE("curve CSV keeps missing fields empty") {
  test::ScratchDir dir("curve");
  std::vector<MetricsRow> rows(3);
  rows[0] = {0.5, 0.25, 0.8, 0.9, 0.75, 2.0 / 3.0, 1.0 / 3.0};
  rows[1] = {0.75, 1.0, std::nullopt, 1.0, std::nullopt, std::nullopt, std::nullopt};
  rows[2] = {1.0, 0.0, 0.0, 0.0, 0.5, 0.0, std::nullopt};
  write_curve_csv(dir / "c.csv", rows);
  const auto text = read_file(dir / "c.csv");
  CHECK(text ==
        "param,defer_rate,f1,f1_overall,accuracy,sensitivity,specificity\n"
        "0.500000000,0.250000000,0.800000000,0.900000000,0.750000000,0.666666667,0.333333333\n"
        "0.750000000,1.000000000,,1.000000000,,,\n"
        "1.000000000,0.000000000,0.000000000,0.000000000,0.500000000,0.000000000,\n");
  const auto back = read_curve_csv(dir / "c.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[1] == rows[1]);
  CHECK(back[2] == rows[2]);
  CHECK(*back[0].sensitivity == round9(2.0 / 3.0));
}

TEST_CASE("decisions CSV round-trips") {
  test::ScratchDir dir("decisions");
  const std::vector<std::int64_t> ids{4, 9, 11};
  const std::vector<Verdict> v{Verdict::of_class(1), Verdict::defer(), Verdict::of_class(0)};
  write_decisions_csv(dir / "x.csv", ids, v);
  CHECK(read_file(dir / "x.csv") == "id,verdict\n4,1\n9,DEFER\n11,0\n");
  const auto back = read_decisions_csv(dir / "x.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[1].first == 9);
  CHECK(back[1].second == Verdict::defer());
  CHECK(back[2].second == Verdict::of_class(0));
}

TEST_CASE("malformed files are rejected with line numbers") {
  test::ScratchDir dir("malformed");
  const auto path = dir / "bad.csv";

  write_text(path, "id,label,p0,p1\n0,1,0.2,0.3\n1,0,1.5,0.1\n");
  CHECK(parse_error_line([&] { read_preds_csv(path); }) == 3);
  try {
    read_preds_csv(path);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  write_text(path, "id,label,p0\n0,1,0.2,0.3\n");
  CHECK(parse_error_line([&] { read_preds_csv(path); }) == 2);

  write_text(path, "id,label,f0,f1\n0,1,0.5\n");
  CHECK(parse_error_line([&] { read_dataset_csv(path); }) == 2);

  write_text(path, "id,f0,f1\n0,0.1,0.2\n");
  CHECK(parse_error_line([&] { read_dataset_csv(path); }) == 1);

  write_text(path, "id,label,f0\n0,2,0.1\n");
  CHECK(parse_error_line([&] { read_dataset_csv(path); }) == 2);

  write_text(path, "id,label,f0\n0,1,abc\n");
  CHECK(parse_error_line([&] { read_dataset_csv(path); }) == 2);

  write_text(path, "id,label,f0\n0,1,0.1\n0,0,0.2\n");
  CHECK(parse_error_line([&] { read_dataset_csv(path); }) == 3);

  write_text(path, "id,label,p0,p1,u_e,u_d\n0,1,0.9,0.8,0.1,0.9\n");
  CHECK(parse_error_line([&] { read_features_csv(path); }) == 2);

  write_text(path, "param,defer_rate,f1,f1_overall,accuracy,sensitivity\n");
  CHECK(parse_error_line([&] { read_curve_csv(path); }) == 1);

  write_text(path, "id,verdict\n0,1\n1,maybe\n");
  CHECK(parse_error_line([&] { read_decisions_csv(path); }) == 3);

  write_text(path, "");
  CHECK(parse_error_line([&] { read_preds_csv(path); }) == 1);

  CHECK_THROWS_AS(read_preds_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("diagnostic entropy at ln 2 survives the printed precision") {
  test::ScratchDir dir("ln2");
  PredictionMatrix m;
  m.ids = {1};
  m.probs = Matrix(1, 2, std::vector<double>{0.9, 0.1});
  m.labels = std::vector<int>{1};
  const auto f = build_defer_features(m);
  CHECK(f.diagnostic_entropy(0) == std::numbers::ln2);
  write_features_csv(dir / "f.csv", f);
  const auto back = read_features_csv(dir / "f.csv");
  CHECK(back.diagnostic_entropy(0) <= std::numbers::ln2);
  CHECK(back.diagnostic_entropy(0) == doctest::Approx(std::numbers::ln2).epsilon(1e-9));
}

TEST_CASE("writing to an unwritable path raises an I/O error") {
  SyntheticConfig config;
  config.n = 4;
  const auto data = gen_synthetic(config);
  CHECK_THROWS_AS(write_dataset_csv("/nonexistent_dir_ldu/x/d.csv", data), IoError);
}

}  // namespace ldu
