#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace awgent::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, detail::complex_multiply_scalar,
                                 detail::overlap_scalar, detail::coherent_power_scalar,
                                 detail::uniform_norm_scalar};
  return table;
}

const KernelTable* avx2_table() {
#if defined(AWGENT_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  static const KernelTable table{Isa::avx2, detail::complex_multiply_avx2,
                                 detail::overlap_avx2, detail::coherent_power_avx2,
                                 detail::uniform_norm_avx2};
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(AWGENT_HAVE_NEON)
  static const KernelTable table{Isa::neon, detail::complex_multiply_neon,
                                 detail::overlap_neon, detail::coherent_power_neon,
                                 detail::uniform_norm_neon};
  return &table;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("AWGENT_SIMD"); env && std::string(env) == "scalar") {
    return &scalar_table();
  }
  if (const auto* t = avx2_table()) return t;
  if (const auto* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Isa active_isa() { return active().isa; }

void force(Isa isa) {
  const KernelTable* t = &scalar_table();
  if (isa == Isa::avx2 && avx2_table()) t = avx2_table();
  if (isa == Isa::neon && neon_table()) t = neon_table();
  current().store(t, std::memory_order_release);
}

}  // namespace awgent::kernels
