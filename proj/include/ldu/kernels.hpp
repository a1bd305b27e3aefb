#pragma once
// Dense inner-loop kernels used by the feedforward network.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on aarch64) are compiled in when the target
// supports them and picked at runtime from CPU feature bits. Set
// LDU_KERNELS=scalar in the environment to force the reference path.

#include <cstddef>
#include <string_view>

namespace ldu::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct AdamCoefficients {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

using DotFn = double (*)(const double* a, const double* b, std::size_t n);
using AxpyFn = void (*)(double alpha, const double* x, double* y, std::size_t n);
using AdamFn = void (*)(double* w, const double* g, double* m, double* v,
                        std::size_t n, const AdamCoefficients& c);

struct KernelTable {
  Backend backend;
  DotFn dot;    // sum_i a[i] * b[i]
  AxpyFn axpy;  // y[i] += alpha * x[i]
  AdamFn adam;  // one bias-corrected Adam step, elementwise
};

// Reference implementations; always available.
const KernelTable& scalar_table();

// Null when the variant was not compiled into this binary.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// True when the backend was compiled in and the running CPU supports it.
bool backend_available(Backend backend);

// Table selected for this process. Chosen once, on first use, unless
// overridden with set_backend().
const KernelTable& active();

// Forces a backend (tests and benchmarks). Returns false, leaving the
// selection unchanged, when the backend is not available.
bool set_backend(Backend backend);

std::string_view backend_name(Backend backend);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}

inline void adam(double* w, const double* g, double* m, double* v,
                 std::size_t n, const AdamCoefficients& c) {
  active().adam(w, g, m, v, n, c);
}

}  // namespace ldu::kernels
