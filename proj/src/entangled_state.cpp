#include "awgent/entangled_state.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "awgent/constants.hpp"
#include "awgent/errors.hpp"
#include "awgent/kernels.hpp"

namespace awgent {

bool PathState::is_product() const {
  int active = 0;
  for (const auto& c : coefficients) {
    if (std::norm(c) > 1e-24) ++active;
  }
  return active < 2;
}

PathState build_state(std::vector<JointSpectralAmplitude> jsas, std::span<const double> phases,
                      std::span<const double> amplitudes) {
  if (jsas.empty() || jsas.size() != phases.size() || jsas.size() != amplitudes.size()) {
    throw Error(ErrorCode::parameter, "state needs equal, non-empty lists of JSAs, phases and amplitudes");
  }
  double total = 0.0;
  for (double a : amplitudes) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::parameter, "source amplitudes must be finite and non-negative");
    }
    total += a * a;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::normalization, "all source amplitudes are zero");

  PathState state;
  const double scale = 1.0 / std::sqrt(total);
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    state.coefficients.push_back(amplitudes[j] * scale * std::polar(1.0, -phases[j]));
  }
  state.per_source_jsa = std::move(jsas);
  return state;
}

std::vector<double> collection_amplitudes(const std::vector<JointSpectralAmplitude>& jsas) {
  std::vector<double> out;
  out.reserve(jsas.size());
  for (const auto& j : jsas) out.push_back(j.collection_norm());
  return out;
}

ProjectionSetting::ProjectionSetting(double phi_s, double phi_i, double offset_s, double offset_i)
    : phi_s_(wrap_phase(phi_s)),
      phi_i_(wrap_phase(phi_i)),
      offset_s_(wrap_phase(offset_s)),
      offset_i_(wrap_phase(offset_i)) {}

ProjectionSetting ProjectionSetting::from_pump_phases(double phi_A, double phi_B, double offset_s,
                                                      double offset_i) {
  return {phi_A - offset_s, phi_B - offset_i, offset_s, offset_i};
}

double ProjectionSetting::phi_A() const { return wrap_phase(phi_s_ + offset_s_); }
double ProjectionSetting::phi_B() const { return wrap_phase(phi_i_ + offset_i_); }

namespace {

void require_two_path(const PathState& state) {
  if (state.n_modes() != 2 || state.per_source_jsa.size() != 2) {
    throw Error(ErrorCode::parameter, "projection is implemented for two paths only");
  }
  if (!state.per_source_jsa[0].same_grid(state.per_source_jsa[1])) {
    throw Error(ErrorCode::grid_mismatch, "the two JSAs are sampled on different grids");
  }
}

}  // namespace

double coincidence_probability(const PathState& state, const ProjectionSetting& setting) {
  require_two_path(state);
  const auto& s1 = state.per_source_jsa[0];
  const auto& s2 = state.per_source_jsa[1];
  const std::complex<double> alpha =
      0.5 * state.coefficients[0] * std::polar(1.0, setting.phi_s() + setting.phi_i());
  const std::complex<double> beta = 0.5 * state.coefficients[1];
  const std::vector<double> area(s1.size(), s1.cell_area());
  return kernels::coherent_power(s1.view(), s2.view(), alpha, beta, area);
}

FringeParameters fringe_from_overlap(const PathState& state, double offset_s, double offset_i) {
  require_two_path(state);
  const auto& s1 = state.per_source_jsa[0];
  const auto& s2 = state.per_source_jsa[1];
  const std::vector<double> area(s1.size(), s1.cell_area());
  const auto ov = kernels::overlap(s1.view(), s2.view(), area);
  const auto c1 = state.coefficients[0];
  const auto c2 = state.coefficients[1];
  // P(theta) = A + Re(e^{i theta} X), theta = phi_s + phi_i
  const double A = 0.25 * (std::norm(c1) * ov.norm_a + std::norm(c2) * ov.norm_b);
  const std::complex<double> X = 0.5 * c1 * std::conj(c2) * ov.cross;
  FringeParameters fp;
  fp.c0 = A;
  fp.v = A > 0.0 ? std::abs(X) / A : 0.0;
  // -v cos(theta + delta) = |X|/A cos(theta + arg X)  =>  delta = arg X + pi,
  // then shift to pump-phase coordinates.
  fp.delta_phi = wrap_phase(std::arg(X) + kPi - offset_s - offset_i);
  fp.method = "overlap";
  return fp;
}

double max_circular_gap(std::vector<double> phases) {
  if (phases.empty()) return kTwoPi;
  for (auto& p : phases) p = wrap_phase(p);
  std::sort(phases.begin(), phases.end());
  double gap = phases.front() + kTwoPi - phases.back();
  for (std::size_t k = 1; k < phases.size(); ++k) gap = std::max(gap, phases[k] - phases[k - 1]);
  return gap;
}

FringeParameters fringe_model_parameters(const PathState& state,
                                         std::span<const ProjectionSetting> sweep) {
  require_two_path(state);
  std::vector<double> sums;
  for (const auto& s : sweep) sums.push_back(s.phi_A() + s.phi_B());
  if (sweep.size() < 3 || max_circular_gap(sums) >= kPi) {
    throw Error(ErrorCode::ill_conditioned,
                "phase sweep does not cover a fringe period (need >= 3 settings, gaps < 180 deg)");
  }
  Eigen::MatrixXd design(static_cast<Eigen::Index>(sweep.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(sweep.size()));
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    design(r, 0) = 1.0;
    design(r, 1) = std::cos(sums[k]);
    design(r, 2) = std::sin(sums[k]);
    y(r) = coincidence_probability(state, sweep[k]);
  }
  const Eigen::Vector3d p = design.colPivHouseholderQr().solve(y);
  FringeParameters fp;
  fp.c0 = p(0);
  fp.v = fp.c0 != 0.0 ? std::hypot(p(1), p(2)) / fp.c0 : 0.0;
  fp.delta_phi = wrap_phase(std::atan2(p(2), -p(1)));
  fp.method = "sweep";
  return fp;
}

std::vector<ProjectionSetting> sum_phase_sweep(int n, double offset_s, double offset_i) {
  std::vector<ProjectionSetting> out;
  for (int k = 0; k < n; ++k) out.emplace_back(kTwoPi * k / n, 0.0, offset_s, offset_i);
  return out;
}

namespace {

// g(2 nu_p - nu) sampled on the nodes of `target`.
std::vector<std::complex<double>> reflect_onto(const TransmissionSpectrum& g,
                                               const FrequencyGrid& target, double nu_pump) {
  std::vector<std::complex<double>> out(target.count);
  const double mirror_start = 2.0 * nu_pump - g.grid.stop_hz();
  const bool exact_mirror =
      g.grid.count == target.count &&
      std::abs(g.grid.step_hz - target.step_hz) <= 1e-9 * target.step_hz &&
      std::abs(mirror_start - target.start_hz) <= 1e-6 * target.step_hz;
  for (std::size_t k = 0; k < target.count; ++k) {
    out[k] = exact_mirror ? g.amplitude[target.count - 1 - k] : g.at(2.0 * nu_pump - target.at(k));
  }
  return out;
}

struct Planes {
  std::vector<double> re, im;
  explicit Planes(std::size_t n) : re(n), im(n) {}
  explicit Planes(const std::vector<std::complex<double>>& v) : re(v.size()), im(v.size()) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      re[k] = v[k].real();
      im[k] = v[k].imag();
    }
  }
  kernels::ComplexSpan view() const { return {re, im}; }
  kernels::ComplexOut out() { return {re, im}; }
};

}  // namespace

double visibility_from_spectra(const TransmissionSpectrum& f1, const TransmissionSpectrum& g1,
                               const TransmissionSpectrum& f2, const TransmissionSpectrum& g2,
                               double nu_pump_hz) {
  if (!f1.grid.same_as(f2.grid) || !g1.grid.same_as(g2.grid)) {
    throw Error(ErrorCode::grid_mismatch, "f1/f2 and g1/g2 must be sampled on common grids");
  }
  const auto& grid = f1.grid;
  const Planes pf1(f1.amplitude), pf2(f2.amplitude);
  const Planes pg1(reflect_onto(g1, grid, nu_pump_hz));
  const Planes pg2(reflect_onto(g2, grid, nu_pump_hz));
  Planes p1(grid.count), p2(grid.count);
  kernels::complex_multiply(pf1.view(), pg1.view(), p1.out());
  kernels::complex_multiply(pf2.view(), pg2.view(), p2.out());
  const auto w = grid.trapezoid_weights();
  const auto ov = kernels::overlap(p1.view(), p2.view(), w);
  const double den = ov.norm_a + ov.norm_b;
  if (!(den > 0.0)) {
    throw Error(ErrorCode::undefined_visibility, "both transmission products vanish");
  }
  return 2.0 * ov.cross.real() / den;
}

}  // namespace awgent
