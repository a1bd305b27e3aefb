#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ldu/data_io.hpp"
#include "ldu/metrics.hpp"

namespace ldu {
namespace {

const Verdict D = Verdict::defer();
const Verdict C0 = Verdict::of_class(0);
const Verdict C1 = Verdict::of_class(1);

struct Counts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Counts brute_counts(const std::vector<Verdict>& v, const std::vector<int>& y, bool fill) {
  Counts c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    int pred;
    if (v[i].is_defer()) {
      if (!fill) continue;
      pred = y[i];
    } else {
      pred = v[i].class_index();
    }
    if (pred == 1 && y[i] == 1) ++c.tp;
    if (pred == 1 && y[i] == 0) ++c.fp;
    if (pred == 0 && y[i] == 0) ++c.tn;
    if (pred == 0 && y[i] == 1) ++c.fn;
  }
  return c;
}

std::optional<double> brute_f1(const Counts& c) {
  if (c.tp + c.fp + c.fn == 0) return std::nullopt;
  return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

TEST_CASE("evaluate: deferred samples drop out of non-deferred metrics") {
  const std::vector<Verdict> v{C1, D, C0, D};
  const std::vector<int> y{1, 0, 0, 1};
  const auto row = evaluate(v, y, 0.3);
  CHECK(row.param == 0.3);
  CHECK(row.defer_rate == 0.5);
  CHECK(row.f1 == 1.0);
  CHECK(row.f1_overall == 1.0);
  CHECK(row.accuracy == 1.0);
  CHECK(row.sensitivity == 1.0);
  CHECK(row.specificity == 1.0);
}

TEST_CASE("evaluate: hand-counted confusion matrix") {
  const std::vector<Verdict> v{C1, C1, C0, C0};
  const std::vector<int> y{1, 0, 0, 1};
  const auto row = evaluate(v, y, 0.0);
  CHECK(row.defer_rate == 0.0);
  CHECK(row.f1 == 0.5);
  CHECK(row.f1_overall == 0.5);
  CHECK(row.accuracy == 0.5);
  CHECK(row.sensitivity == 0.5);
  CHECK(row.specificity == 0.5);
}

TEST_CASE("evaluate: everything deferred") {
  const std::vector<Verdict> v{D, D, D};
  const std::vector<int> y{1, 0, 1};
  const auto row = evaluate(v, y, 1.0);
  CHECK(row.defer_rate == 1.0);
  CHECK(row.f1_overall == 1.0);
  CHECK_FALSE(row.f1.has_value());
  CHECK_FALSE(row.accuracy.has_value());
  CHECK_FALSE(row.sensitivity.has_value());
  CHECK_FALSE(row.specificity.has_value());
}

TEST_CASE("f1 is zero with errors but no true positives") {
  CHECK(f1_score({0, 2, 3, 1}) == 0.0);
  CHECK_FALSE(f1_score({0, 0, 5, 0}).has_value());
  CHECK(f1_score({2, 0, 0, 0}) == 1.0);
}

TEST_CASE("evaluate input validation") {
  const std::vector<Verdict> v{C1, C0};
  CHECK_THROWS_AS(evaluate(v, std::vector<int>{1}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(v, std::vector<int>{1, 2}, 0.0), std::invalid_argument);
  const std::vector<Verdict> three_class{Verdict::of_class(2)};
  CHECK_THROWS_AS(evaluate(three_class, std::vector<int>{1}, 0.0), std::invalid_argument);
}

TEST_CASE("evaluate matches a brute-force counter and F1-overall dominates") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> verdict(0, 2);
  std::uniform_int_distribution<std::size_t> length(1, 40);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = length(gen);
    std::vector<Verdict> v(n, D);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int r = verdict(gen);
      v[i] = r == 2 ? D : Verdict::of_class(r);
      y[i] = coin(gen) ? 1 : 0;
    }
    const auto row = evaluate(v, y, 0.0);
    const auto kept = brute_counts(v, y, false);
    const auto filled = brute_counts(v, y, true);
    const std::size_t deferred = n - (kept.tp + kept.fp + kept.tn + kept.fn);
    CHECK(row.defer_rate == static_cast<double>(deferred) / static_cast<double>(n));
    CHECK(row.f1 == brute_f1(kept));
    CHECK(row.f1_overall == brute_f1(filled));
    CHECK(row.accuracy == ratio(kept.tp + kept.tn, kept.tp + kept.fp + kept.tn + kept.fn));
    CHECK(row.sensitivity == ratio(kept.tp, kept.tp + kept.fn));
    CHECK(row.specificity == ratio(kept.tn, kept.tn + kept.fp));
    if (row.f1 && row.f1_overall) CHECK(*row.f1_overall >= *row.f1);
  }
}

TEST_CASE("defer rate is an exact multiple of 1/N") {
  for (std::size_t n : {1u, 3u, 7u, 10u}) {
    for (std::size_t d = 0; d <= n; ++d) {
      std::vector<Verdict> v(n, C1);
      std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d), D);
      const auto row = evaluate(v, std::vector<int>(n, 1), 0.0);
      CHECK(row.defer_rate == static_cast<double>(d) / static_cast<double>(n));
    }
  }
}

TEST_CASE("sweep_alpha orders rows and isolates failures") {
  const std::vector<int> y{1, 0, 1, 0};
  const DecisionFn decide = [](double alpha) {
    if (alpha == 0.7) throw std::runtime_error("boom");
    // Defer more as alpha grows.
    std::vector<Verdict> v{C1, C0, C1, C0};
    const auto d = static_cast<std::size_t>(alpha * 4.0);
    for (std::size_t i = 0; i < std::min<std::size_t>(d, 4); ++i) v[i] = D;
    return v;
  };
  const std::vector<double> grid{1.0, 0.25, 0.7, 0.5, 0.25};
  for (std::size_t threads : {1u, 3u}) {
    const auto points = sweep_alpha(grid, decide, y, threads);
    REQUIRE(points.size() == 5);
    CHECK(points[0].param == 0.25);
    CHECK(points[1].param == 0.25);
    CHECK(points[2].param == 0.5);
    CHECK(points[3].param == 0.7);
    CHECK(points[4].param == 1.0);
    CHECK(points[0].row == points[1].row);
    CHECK(points[0].row->defer_rate == 0.25);
    CHECK_FALSE(points[3].row.has_value());
    CHECK(points[3].error.find("boom") != std::string::npos);
    CHECK(points[4].row->defer_rate == 1.0);
  }
  const std::vector<double> one{0.5};
  CHECK(sweep_alpha(one, decide, y, 1).size() == 1);
  CHECK_THROWS_AS(sweep_alpha(std::vector<double>{}, decide, y, 1), std::invalid_argument);
}

TEST_CASE("sweep_threshold examples") {
  PredictionMatrix m;
  m.ids = {0, 1, 2, 3, 4};
  m.probs = Matrix(5, 3, std::vector<double>{0.9, 0.8, 0.7,  //
                                             0.9, 0.2, 0.7,  //
                                             0.1, 0.2, 0.3,  //
                                             0.6, 0.4, 0.3,  //
                                             0.9, 0.95, 0.99});
  m.labels = std::vector<int>{1, 0, 0, 1, 0};
  const std::vector<double> grid{0.6, 0.3, 0.0, std::numbers::ln2};
  const auto rows = sweep_threshold(m, grid, EntropyMeasure::kDiagnostic);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].param == 0.6);
  CHECK(rows[2].param == 0.0);
  CHECK(rows[2].defer_rate == 0.4);
  CHECK(rows[1].defer_rate == 0.4);
  CHECK(rows[0].defer_rate == 0.4);
  CHECK(rows[3].defer_rate == 0.0);
  CHECK(rows[3] == [&] {
    auto plain = evaluate(majority_verdicts(m), *m.labels, std::numbers::ln2);
    return plain;
  }());
  CHECK(rows[0].defer_rate <= rows[1].defer_rate);
  CHECK(rows[1].defer_rate <= rows[2].defer_rate);
}

TEST_CASE("LDU and LD sweeps are deterministic per alpha") {
  SyntheticConfig sc;
  sc.n = 120;
  sc.d = 3;
  sc.seed = 31;
  const auto [train_set, test_set] = split_dataset(gen_synthetic(sc), 0.7, 32);
  TrainConfig config;
  config.epochs = 2;
  config.learning_rate = 0.01;
  config.seed = 33;
  const std::vector<double> grid{0.9, 0.6, 0.9};

  const auto ld = sweep_ld(train_set, test_set, grid, config, LdOptions{{4}, {}}, 2);
  REQUIRE(ld.size() == 3);
  CHECK(ld[0].param == 0.6);
  REQUIRE(ld[1].row.has_value());
  CHECK(ld[1].row == ld[2].row);

  PredictionMatrix pm;
  pm.ids = train_set.ids;
  pm.probs = Matrix(train_set.size(), 2);
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    pm.probs(i, 0) = 1.0 / (1.0 + std::exp(-train_set.features(i, 0)));
    pm.probs(i, 1) = 1.0 / (1.0 + std::exp(-train_set.features(i, 1)));
  }
  pm.labels = train_set.labels;
  const auto features = build_defer_features(pm);
  const auto ldu = sweep_ldu(features, features, grid, config, LduOptions{{5}, false}, 3);
  REQUIRE(ldu.size() == 3);
  REQUIRE(ldu[1].row.has_value());
  CHECK(ldu[1].row == ldu[2].row);
  const auto again = sweep_ldu(features, features, grid, config, LduOptions{{5}, false}, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again[i].row == ldu[i].row);
}

}  // namespace ldu
