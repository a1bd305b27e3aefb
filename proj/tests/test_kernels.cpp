#include <doctest.h>

#include <random>
#include <vector>

#include "ldu/kernels.hpp"
#include "test_support.hpp"

namespace ldu {
namespace {

using kernels::Backend;

std::vector<const kernels::KernelTable*> vector_tables() {
  std::vector<const kernels::KernelTable*> out;
  if (kernels::backend_available(Backend::kAvx2)) out.push_back(kernels::avx2_table());
  if (kernels::backend_available(Backend::kNeon)) out.push_back(kernels::neon_table());
  return out;
}

long double dot_reference(const std::vector<double>& a, const std::vector<double>& b) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  }
  return sum;
}

TEST_CASE("scalar table is always available") {
  CHECK(kernels::backend_available(Backend::kScalar));
  CHECK(kernels::scalar_table().backend == Backend::kScalar);
}

TEST_CASE("vector dot agrees with the scalar reference across tail lengths") {
  std::mt19937_64 gen(7);
  const auto& ref = kernels::scalar_table();
  for (const auto* table : vector_tables()) {
    CAPTURE(kernels::backend_name(table->backend));
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto a = test::random_vector(gen, n, -1.0, 1.0);
      const auto b = test::random_vector(gen, n, -1.0, 1.0);
      const double exact = static_cast<double>(dot_reference(a, b));
      double abs_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
      const double bound = 1e-15 * (abs_sum + 1.0) * static_cast<double>(n + 1);
      CHECK(std::abs(table->dot(a.data(), b.data(), n) - exact) <= bound);
      CHECK(std::abs(ref.dot(a.data(), b.data(), n) - exact) <= bound);
    }
  }
}

TEST_CASE("vector axpy agrees with the scalar reference") {
  std::mt19937_64 gen(11);
  for (const auto* table : vector_tables()) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 16u, 17u, 100u}) {
      const auto x = test::random_vector(gen, n, -2.0, 2.0);
      auto y_ref = test::random_vector(gen, n, -2.0, 2.0);
      auto y_vec = y_ref;
      kernels::scalar_table().axpy(0.37, x.data(), y_ref.data(), n);
      table->axpy(0.37, x.data(), y_vec.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        // FMA skips one rounding of alpha * x.
        CHECK(y_vec[i] == doctest::Approx(y_ref[i]).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("vector adam step is bit-identical to the scalar reference") {
  std::mt19937_64 gen(13);
  const kernels::AdamCoefficients c{1e-2, 0.9, 0.999, 1e-8, 1.0 - 0.9 * 0.9,
                                    1.0 - 0.999 * 0.999};
  for (const auto* table : vector_tables()) {
    for (std::size_t n : {1u, 4u, 7u, 33u}) {
      const auto g = test::random_vector(gen, n, -1.0, 1.0);
      auto w1 = test::random_vector(gen, n, -1.0, 1.0);
      auto m1 = test::random_vector(gen, n, -0.1, 0.1);
      auto v1 = test::random_vector(gen, n, 0.0, 0.1);
      auto w2 = w1, m2 = m1, v2 = v1;
      kernels::scalar_table().adam(w1.data(), g.data(), m1.data(), v1.data(), n, c);
      table->adam(w2.data(), g.data(), m2.data(), v2.data(), n, c);
      CHECK(w1 == w2);
      CHECK(m1 == m2);
      CHECK(v1 == v2);
    }
  }
}

TEST_CASE("set_backend switches the active table and rejects unavailable ones") {
  const Backend before = kernels::active().backend;
  REQUIRE(kernels::set_backend(Backend::kScalar));
  CHECK(kernels::active().backend == Backend::kScalar);
  if (!kernels::backend_available(Backend::kNeon)) {
    CHECK_FALSE(kernels::set_backend(Backend::kNeon));
    CHECK(kernels::active().backend == Backend::kScalar);
  }
  kernels::set_backend(before);
}

TEST_CASE("training is reproducible under either backend") {
  // Same backend twice: identical parameters. Across backends: close.
  const Backend before = kernels::active().backend;
  std::mt19937_64 gen(5);
  Matrix x(64, 4, test::random_vector(gen, 256, -1.0, 1.0));
  std::vector<int> y(64);
  for (std::size_t i = 0; i < 64; ++i) y[i] = x(i, 0) + x(i, 1) > 0 ? 1 : 0;
  const auto specs = mlp_specs(4, std::vector<std::size_t>{8}, 2);
  TrainConfig config;
  config.epochs = 5;
  config.learning_rate = 1e-2;

  kernels::set_backend(Backend::kScalar);
  const auto scalar_a = train(x, y, specs, config);
  const auto scalar_b = train(x, y, specs, config);
  CHECK(scalar_a == scalar_b);
  for (const auto* table : vector_tables()) {
    kernels::set_backend(table->backend);
    const auto vec = train(x, y, specs, config);
    CHECK(test::relative_error(test::flatten(vec), test::flatten(scalar_a)) < 1e-9);
  }
  kernels::set_backend(before);
}

}  // namespace
}  // namespace ldu
