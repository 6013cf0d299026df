// Compiled with -mavx2 -mfma; only called after a runtime CPU check.
#include "kernels_internal.hpp"

#include <immintrin.h>

#include <cassert>

namespace awgent::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void complex_multiply_avx2(ComplexSpan a, ComplexSpan b, ComplexOut out) {
  assert(a.size() == b.size() && a.size() == out.size());
  const std::size_t n = a.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d ar = _mm256_loadu_pd(a.re.data() + k);
    const __m256d ai = _mm256_loadu_pd(a.im.data() + k);
    const __m256d br = _mm256_loadu_pd(b.re.data() + k);
    const __m256d bi = _mm256_loadu_pd(b.im.data() + k);
    const __m256d re = _mm256_fmsub_pd(ar, br, _mm256_mul_pd(ai, bi));
    const __m256d im = _mm256_fmadd_pd(ar, bi, _mm256_mul_pd(ai, br));
    _mm256_storeu_pd(out.re.data() + k, re);
    _mm256_storeu_pd(out.im.data() + k, im);
  }
  for (; k < n; ++k) {
    const double re = a.re[k] * b.re[k] - a.im[k] * b.im[k];
    const double im = a.re[k] * b.im[k] + a.im[k] * b.re[k];
    out.re[k] = re;
    out.im[k] = im;
  }
}

OverlapSums overlap_avx2(ComplexSpan a, ComplexSpan b, std::span<const double> w) {
  assert(a.size() == b.size() && a.size() == w.size());
  const std::size_t n = a.size();
  __m256d cr = _mm256_setzero_pd(), ci = _mm256_setzero_pd();
  __m256d na = _mm256_setzero_pd(), nb = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d ar = _mm256_loadu_pd(a.re.data() + k);
    const __m256d ai = _mm256_loadu_pd(a.im.data() + k);
    const __m256d br = _mm256_loadu_pd(b.re.data() + k);
    const __m256d bi = _mm256_loadu_pd(b.im.data() + k);
    const __m256d wk = _mm256_loadu_pd(w.data() + k);
    const __m256d re = _mm256_fmadd_pd(ar, br, _mm256_mul_pd(ai, bi));
    const __m256d im = _mm256_fmsub_pd(ai, br, _mm256_mul_pd(ar, bi));
    cr = _mm256_fmadd_pd(wk, re, cr);
    ci = _mm256_fmadd_pd(wk, im, ci);
    na = _mm256_fmadd_pd(wk, _mm256_fmadd_pd(ar, ar, _mm256_mul_pd(ai, ai)), na);
    nb = _mm256_fmadd_pd(wk, _mm256_fmadd_pd(br, br, _mm256_mul_pd(bi, bi)), nb);
  }
  double scr = hsum(cr), sci = hsum(ci), sna = hsum(na), snb = hsum(nb);
  for (; k < n; ++k) {
    scr += w[k] * (a.re[k] * b.re[k] + a.im[k] * b.im[k]);
    sci += w[k] * (a.im[k] * b.re[k] - a.re[k] * b.im[k]);
    sna += w[k] * (a.re[k] * a.re[k] + a.im[k] * a.im[k]);
    snb += w[k] * (b.re[k] * b.re[k] + b.im[k] * b.im[k]);
  }
  return {{scr, sci}, sna, snb};
}

double coherent_power_avx2(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                           std::complex<double> beta, std::span<const double> w) {
  assert(a.size() == b.size() && a.size() == w.size());
  const std::size_t n = a.size();
  const __m256d var = _mm256_set1_pd(alpha.real()), vai = _mm256_set1_pd(alpha.imag());
  const __m256d vbr = _mm256_set1_pd(beta.real()), vbi = _mm256_set1_pd(beta.imag());
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d xr = _mm256_loadu_pd(a.re.data() + k);
    const __m256d xi = _mm256_loadu_pd(a.im.data() + k);
    const __m256d yr = _mm256_loadu_pd(b.re.data() + k);
    const __m256d yi = _mm256_loadu_pd(b.im.data() + k);
    __m256d re = _mm256_mul_pd(var, xr);
    re = _mm256_fnmadd_pd(vai, xi, re);
    re = _mm256_fmadd_pd(vbr, yr, re);
    re = _mm256_fnmadd_pd(vbi, yi, re);
    __m256d im = _mm256_mul_pd(var, xi);
    im = _mm256_fmadd_pd(vai, xr, im);
    im = _mm256_fmadd_pd(vbr, yi, im);
    im = _mm256_fmadd_pd(vbi, yr, im);
    const __m256d p = _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + k), p, acc);
  }
  double s = hsum(acc);
  const double ar = alpha.real(), ai = alpha.imag(), br = beta.real(), bi = beta.imag();
  for (; k < n; ++k) {
    const double re = ar * a.re[k] - ai * a.im[k] + br * b.re[k] - bi * b.im[k];
    const double im = ar * a.im[k] + ai * a.re[k] + br * b.im[k] + bi * b.re[k];
    s += w[k] * (re * re + im * im);
  }
  return s;
}

double uniform_norm_avx2(ComplexSpan a, double weight) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d xr = _mm256_loadu_pd(a.re.data() + k);
    const __m256d xi = _mm256_loadu_pd(a.im.data() + k);
    acc0 = _mm256_fmadd_pd(xr, xr, acc0);
    acc1 = _mm256_fmadd_pd(xi, xi, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += a.re[k] * a.re[k] + a.im[k] * a.im[k];
  return weight * s;
}

}  // namespace awgent::kernels::detail
