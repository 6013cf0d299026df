#include "kernels_internal.hpp"

#include <cassert>

namespace awgent::kernels::detail {

void complex_multiply_scalar(ComplexSpan a, ComplexSpan b, ComplexOut out) {
  assert(a.size() == b.size() && a.size() == out.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double re = a.re[k] * b.re[k] - a.im[k] * b.im[k];
    const double im = a.re[k] * b.im[k] + a.im[k] * b.re[k];
    out.re[k] = re;
    out.im[k] = im;
  }
}

OverlapSums overlap_scalar(ComplexSpan a, ComplexSpan b, std::span<const double> w) {
  assert(a.size() == b.size() && a.size() == w.size());
  double cr = 0.0, ci = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    // a * conj(b)
    cr += w[k] * (a.re[k] * b.re[k] + a.im[k] * b.im[k]);
    ci += w[k] * (a.im[k] * b.re[k] - a.re[k] * b.im[k]);
    na += w[k] * (a.re[k] * a.re[k] + a.im[k] * a.im[k]);
    nb += w[k] * (b.re[k] * b.re[k] + b.im[k] * b.im[k]);
  }
  return {{cr, ci}, na, nb};
}

double coherent_power_scalar(ComplexSpan a, ComplexSpan b, std::complex<double> alpha,
                             std::complex<double> beta, std::span<const double> w) {
  assert(a.size() == b.size() && a.size() == w.size());
  const double ar = alpha.real(), ai = alpha.imag();
  const double br = beta.real(), bi = beta.imag();
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double re = ar * a.re[k] - ai * a.im[k] + br * b.re[k] - bi * b.im[k];
    const double im = ar * a.im[k] + ai * a.re[k] + br * b.im[k] + bi * b.re[k];
    acc += w[k] * (re * re + im * im);
  }
  return acc;
}

double uniform_norm_scalar(ComplexSpan a, double weight) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += a.re[k] * a.re[k] + a.im[k] * a.im[k];
  }
  return weight * acc;
}

}  // namespace awgent::kernels::detail
