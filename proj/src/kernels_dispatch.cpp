#include <atomic>
#include <cstdlib>
#include <string>

#include "ldu/kernels.hpp"

namespace ldu::kernels {

#if !defined(LDU_BUILD_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(LDU_BUILD_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(LDU_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(LDU_BUILD_NEON)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &scalar_table();
    case Backend::kAvx2:
      return avx2_table();
    case Backend::kNeon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("LDU_KERNELS")) {
    const std::string requested(env);
    if (requested == "scalar") return &scalar_table();
    if (requested == "avx2" && backend_available(Backend::kAvx2)) return avx2_table();
    if (requested == "neon" && backend_available(Backend::kNeon)) return neon_table();
  }
  if (backend_available(Backend::kAvx2)) return avx2_table();
  if (backend_available(Backend::kNeon)) return neon_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

bool backend_available(Backend backend) {
  return table_for(backend) != nullptr && cpu_supports(backend);
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool set_backend(Backend backend) {
  if (!backend_available(backend)) return false;
  current().store(table_for(backend), std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

}  // namespace ldu::kernels
