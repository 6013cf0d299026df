#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "awgent/kernels.hpp"

using namespace awgent::kernels;

namespace {

struct Planes {
  std::vector<double> re, im;
  ComplexSpan view() const { return {re, im}; }
};

Planes random_planes(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Planes p{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    p.re[k] = g(rng);
    p.im[k] = g(rng);
  }
  return p;
}

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Plain std::complex loop, independent of the kernel code.
double naive_coherent(const Planes& a, const Planes& b, std::complex<double> alpha,
                      std::complex<double> beta, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto v = alpha * std::complex<double>(a.re[k], a.im[k]) +
                   beta * std::complex<double>(b.re[k], b.im[k]);
    s += w[k] * std::norm(v);
  }
  return s;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar kernels agree with a std::complex loop") {
    std::mt19937_64 rng(11);
    const auto& t = scalar_table();
    for (std::size_t n : {0u, 1u, 3u, 17u, 64u}) {
      auto a = random_planes(n, rng), b = random_planes(n, rng);
      std::vector<double> w(n);
      for (auto& x : w) x = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      const std::complex<double> alpha(0.3, -0.7), beta(-1.1, 0.2);
      CHECK(close(t.coherent_power(a.view(), b.view(), alpha, beta, w),
                  naive_coherent(a, b, alpha, beta, w)));
      std::complex<double> cross;
      double na = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const std::complex<double> x(a.re[k], a.im[k]), y(b.re[k], b.im[k]);
        cross += w[k] * x * std::conj(y);
        na += w[k] * std::norm(x);
      }
      const auto o = t.overlap(a.view(), b.view(), w);
      CHECK(close(o.cross.real(), cross.real()));
      CHECK(close(o.cross.imag(), cross.imag()));
      CHECK(close(o.norm_a, na));
    }
  }

  TEST_CASE("vector kernels match the scalar reference") {
    const KernelTable* vec = avx2_table();
    if (vec == nullptr) vec = neon_table();
    if (vec == nullptr) {
      MESSAGE("no SIMD variant on this machine; equivalence not exercised");
      return;
    }
    const auto& ref = scalar_table();
    std::mt19937_64 rng(5);
    for (std::size_t n = 0; n < 70; ++n) {
      auto a = random_planes(n, rng), b = random_planes(n, rng);
      std::vector<double> w(n);
      for (auto& x : w) x = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      const std::complex<double> alpha(0.5, 0.25), beta(-0.5, 1.0);

      std::vector<double> r1(n), i1(n), r2(n), i2(n);
      ref.complex_multiply(a.view(), b.view(), {r1, i1});
      vec->complex_multiply(a.view(), b.view(), {r2, i2});
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(close(r1[k], r2[k]));
        CHECK(close(i1[k], i2[k]));
      }
      const auto o1 = ref.overlap(a.view(), b.view(), w);
      const auto o2 = vec->overlap(a.view(), b.view(), w);
      CHECK(close(o1.cross.real(), o2.cross.real()));
      CHECK(close(o1.cross.imag(), o2.cross.imag()));
      CHECK(close(o1.norm_a, o2.norm_a));
      CHECK(close(o1.norm_b, o2.norm_b));
      CHECK(close(ref.coherent_power(a.view(), b.view(), alpha, beta, w),
                  vec->coherent_power(a.view(), b.view(), alpha, beta, w)));
      CHECK(close(ref.uniform_norm(a.view(), 0.37), vec->uniform_norm(a.view(), 0.37)));
    }
  }

  TEST_CASE("dispatch can be forced to the scalar path") {
    const Isa before = active_isa();
    force(Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    CHECK(&active() == &scalar_table());
    force(before);
    CHECK(active_isa() == before);
  }
}
