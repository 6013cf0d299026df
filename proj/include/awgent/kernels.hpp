#pragma once

// Data-parallel inner loops of the spectral quadratures.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a vectorized variant. The variant is picked once at runtime
// from CPU features; AWGENT_SIMD=scalar in the environment forces the
// reference path. Complex arrays are passed split into real/imag planes.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace awgent::kernels {

struct ComplexSpan {
  std::span<const double> re;
  std::span<const double> im;
  std::size_t size() const { return re.size(); }
};

struct ComplexOut {
  std::span<double> re;
  std::span<double> im;
  std::size_t size() const { return re.size(); }
};

// Weighted inner products over a shared quadrature:
//   cross  = sum w * a * conj(b)
//   norm_a = sum w * |a|^2,  norm_b = sum w * |b|^2
struct OverlapSums {
  std::complex<double> cross;
  double norm_a = 0.0;
  double norm_b = 0.0;
};

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // out = a * b elementwise
  void (*complex_multiply)(ComplexSpan a, ComplexSpan b, ComplexOut out);
  OverlapSums (*overlap)(ComplexSpan a, ComplexSpan b, std::span<const double> w);
  // sum w * |alpha * a + beta * b|^2
  double (*coherent_power)(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                           std::complex<double> beta, std::span<const double> w);
  // sum w * |a|^2 with a single scalar weight
  double (*uniform_norm)(ComplexSpan a, double weight);
};

const KernelTable& scalar_table();
// Null when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Table chosen for this process.
const KernelTable& active();
Isa active_isa();

// Test hook: override the dispatch (falls back to scalar if unavailable).
void force(Isa isa);

inline void complex_multiply(ComplexSpan a, ComplexSpan b, ComplexOut out) {
  active().complex_multiply(a, b, out);
}
inline OverlapSums overlap(ComplexSpan a, ComplexSpan b, std::span<const double> w) {
  return active().overlap(a, b, w);
}
inline double coherent_power(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                             std::complex<double> beta, std::span<const double> w) {
  return active().coherent_power(a, b, alpha, beta, w);
}
inline double uniform_norm(ComplexSpan a, double weight) {
  return active().uniform_norm(a, weight);
}

}  // namespace awgent::kernels
