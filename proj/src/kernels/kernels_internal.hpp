#pragma once

#include "awgent/kernels.hpp"

namespace awgent::kernels::detail {

void complex_multiply_scalar(ComplexSpan a, ComplexSpan b, ComplexOut out);
OverlapSums overlap_scalar(ComplexSpan a, ComplexSpan b, std::span<const double> w);
double coherent_power_scalar(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                             std::complex<double> beta, std::span<const double> w);
double uniform_norm_scalar(ComplexSpan a, double weight);

#if defined(AWGENT_HAVE_AVX2)
void complex_multiply_avx2(ComplexSpan a, ComplexSpan b, ComplexOut out);
OverlapSums overlap_avx2(ComplexSpan a, ComplexSpan b, std::span<const double> w);
double coherent_power_avx2(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                           std::complex<double> beta, std::span<const double> w);
double uniform_norm_avx2(ComplexSpan a, double weight);
#endif

#if defined(AWGENT_HAVE_NEON)
void complex_multiply_neon(ComplexSpan a, ComplexSpan b, ComplexOut out);
OverlapSums overlap_neon(ComplexSpan a, ComplexSpan b, std::span<const double> w);
double coherent_power_neon(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                           std::complex<double> beta, std::span<const double> w);
double uniform_norm_neon(ComplexSpan a, double weight);
#endif

}  // namespace awgent::kernels::detail
