// AArch64 variant; Advanced SIMD is baseline there so no runtime check is needed.
#include "kernels_internal.hpp"

#include <arm_neon.h>

#include <cassert>

namespace awgent::kernels::detail {

void complex_multiply_neon(ComplexSpan a, ComplexSpan b, ComplexOut out) {
  assert(a.size() == b.size() && a.size() == out.size());
  const std::size_t n = a.size();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t ar = vld1q_f64(a.re.data() + k), ai = vld1q_f64(a.im.data() + k);
    const float64x2_t br = vld1q_f64(b.re.data() + k), bi = vld1q_f64(b.im.data() + k);
    vst1q_f64(out.re.data() + k, vfmsq_f64(vmulq_f64(ar, br), ai, bi));
    vst1q_f64(out.im.data() + k, vfmaq_f64(vmulq_f64(ai, br), ar, bi));
  }
  for (; k < n; ++k) {
    const double re = a.re[k] * b.re[k] - a.im[k] * b.im[k];
    const double im = a.re[k] * b.im[k] + a.im[k] * b.re[k];
    out.re[k] = re;
    out.im[k] = im;
  }
}

OverlapSums overlap_neon(ComplexSpan a, ComplexSpan b, std::span<const double> w) {
  assert(a.size() == b.size() && a.size() == w.size());
  const std::size_t n = a.size();
  float64x2_t cr = vdupq_n_f64(0), ci = vdupq_n_f64(0), na = vdupq_n_f64(0), nb = vdupq_n_f64(0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t ar = vld1q_f64(a.re.data() + k), ai = vld1q_f64(a.im.data() + k);
    const float64x2_t br = vld1q_f64(b.re.data() + k), bi = vld1q_f64(b.im.data() + k);
    const float64x2_t wk = vld1q_f64(w.data() + k);
    cr = vfmaq_f64(cr, wk, vfmaq_f64(vmulq_f64(ar, br), ai, bi));
    ci = vfmaq_f64(ci, wk, vfmsq_f64(vmulq_f64(ai, br), ar, bi));
    na = vfmaq_f64(na, wk, vfmaq_f64(vmulq_f64(ar, ar), ai, ai));
    nb = vfmaq_f64(nb, wk, vfmaq_f64(vmulq_f64(br, br), bi, bi));
  }
  double scr = vaddvq_f64(cr), sci = vaddvq_f64(ci), sna = vaddvq_f64(na), snb = vaddvq_f64(nb);
  for (; k < n; ++k) {
    scr += w[k] * (a.re[k] * b.re[k] + a.im[k] * b.im[k]);
    sci += w[k] * (a.im[k] * b.re[k] - a.re[k] * b.im[k]);
    sna += w[k] * (a.re[k] * a.re[k] + a.im[k] * a.im[k]);
    snb += w[k] * (b.re[k] * b.re[k] + b.im[k] * b.im[k]);
  }
  return {{scr, sci}, sna, snb};
}

double coherent_power_neon(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                           std::complex<double> beta, std::span<const double> w) {
  assert(a.size() == b.size() && a.size() == w.size());
  const std::size_t n = a.size();
  const float64x2_t var = vdupq_n_f64(alpha.real()), vai = vdupq_n_f64(alpha.imag());
  const float64x2_t vbr = vdupq_n_f64(beta.real()), vbi = vdupq_n_f64(beta.imag());
  float64x2_t acc = vdupq_n_f64(0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t xr = vld1q_f64(a.re.data() + k), xi = vld1q_f64(a.im.data() + k);
    const float64x2_t yr = vld1q_f64(b.re.data() + k), yi = vld1q_f64(b.im.data() + k);
    float64x2_t re = vmulq_f64(var, xr);
    re = vfmsq_f64(re, vai, xi);
    re = vfmaq_f64(re, vbr, yr);
    re = vfmsq_f64(re, vbi, yi);
    float64x2_t im = vmulq_f64(var, xi);
    im = vfmaq_f64(im, vai, xr);
    im = vfmaq_f64(im, vbr, yi);
    im = vfmaq_f64(im, vbi, yr);
    acc = vfmaq_f64(acc, vld1q_f64(w.data() + k), vfmaq_f64(vmulq_f64(re, re), im, im));
  }
  double s = vaddvq_f64(acc);
  const double ar = alpha.real(), ai = alpha.imag(), br = beta.real(), bi = beta.imag();
  for (; k < n; ++k) {
    const double re = ar * a.re[k] - ai * a.im[k] + br * b.re[k] - bi * b.im[k];
    const double im = ar * a.im[k] + ai * a.re[k] + br * b.im[k] + bi * b.re[k];
    s += w[k] * (re * re + im * im);
  }
  return s;
}

double uniform_norm_neon(ComplexSpan a, double weight) {
  const std::size_t n = a.size();
  float64x2_t acc = vdupq_n_f64(0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t xr = vld1q_f64(a.re.data() + k), xi = vld1q_f64(a.im.data() + k);
    acc = vfmaq_f64(vfmaq_f64(acc, xr, xr), xi, xi);
  }
  double s = vaddvq_f64(acc);
  for (; k < n; ++k) s += a.re[k] * a.re[k] + a.im[k] * a.im[k];
  return weight * s;
}

}  // namespace awgent::kernels::detail
