#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace awgent {

// Uniformly spaced frequency samples: start + k * step, k in [0, count).
struct FrequencyGrid {
  double start_hz = 0.0;
  double step_hz = 0.0;
  std::size_t count = 0;

  static FrequencyGrid centered(double center_hz, double half_span_hz, double step_hz) {
    const auto half = static_cast<std::size_t>(std::ceil(half_span_hz / step_hz - 1e-9));
    return {center_hz - static_cast<double>(half) * step_hz, step_hz, 2 * half + 1};
  }

  double at(std::size_t k) const { return start_hz + static_cast<double>(k) * step_hz; }
  double stop_hz() const { return at(count == 0 ? 0 : count - 1); }
  double center_hz() const { return 0.5 * (start_hz + stop_hz()); }

  // Fractional index of a frequency (may be out of range).
  double index_of(double nu_hz) const { return (nu_hz - start_hz) / step_hz; }

  bool same_as(const FrequencyGrid& other, double rel_tol = 1e-9) const {
    return count == other.count &&
           std::abs(step_hz - other.step_hz) <= rel_tol * std::abs(step_hz) &&
           std::abs(start_hz - other.start_hz) <= rel_tol * std::abs(step_hz) * 1e3;
  }

  // Composite trapezoid weights.
  std::vector<double> trapezoid_weights() const {
    std::vector<double> w(count, step_hz);
    if (count > 0) {
      w.front() *= 0.5;
      w.back() *= 0.5;
    }
    return w;
  }
};

}  // namespace awgent
