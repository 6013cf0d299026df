#pragma once

// Path-entangled two-photon state, interferometric projection, coincidence
// probability and the spectral-overlap visibility.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "awgent/awg_optics.hpp"
#include "awgent/pair_source.hpp"

namespace awgent {

struct PathState {
  // Normalized amplitude of source j, including its e^{-i phi_j} phase.
  std::vector<std::complex<double>> coefficients;
  std::vector<JointSpectralAmplitude> per_source_jsa;

  int n_modes() const { return static_cast<int>(coefficients.size()); }
  // Fewer than two sources carry amplitude.
  bool is_product() const;
};

// coefficients_j ~ amplitudes_j * exp(-i phases_j), normalized.
PathState build_state(std::vector<JointSpectralAmplitude> jsas, std::span<const double> phases,
                      std::span<const double> amplitudes);

// Per-source pair-collection amplitudes carried by the JSAs. Feeding these to
// build_state weights each path by how much of its pair spectrum survives its
// two passbands, which is what the raw transmission products do.
std::vector<double> collection_amplitudes(const std::vector<JointSpectralAmplitude>& jsas);

// Interferometer phases of the projection c1 = (e^{-i phi_s} a1 + i a2)/sqrt2
// (and likewise d1 for the idler). The pump-mode phases retrieved from leaked
// pump light are phi_A = phi_s + offset_s and phi_B = phi_i + offset_i.
class ProjectionSetting {
 public:
  ProjectionSetting(double phi_s, double phi_i, double offset_s = 0.0, double offset_i = 0.0);

  static ProjectionSetting from_pump_phases(double phi_A, double phi_B, double offset_s,
                                            double offset_i);

  double phi_s() const { return phi_s_; }
  double phi_i() const { return phi_i_; }
  double offset_s() const { return offset_s_; }
  double offset_i() const { return offset_i_; }
  double phi_A() const;
  double phi_B() const;

 private:
  double phi_s_;
  double phi_i_;
  double offset_s_;
  double offset_i_;
};

// Probability that the pair exits through the monitored ports of both
// interferometers (N = 2):
//   sum over cells of |c1 e^{i(phi_s+phi_i)} S1 / 2 + c2 S2 / 2|^2 * cell area.
double coincidence_probability(const PathState& state, const ProjectionSetting& setting);

// Spectral-overlap visibility
//   V = 2 Re int f1 g1' conj(f2 g2') / int (|f1 g1'|^2 + |f2 g2'|^2),
// g'(nu) = g(2 nu_p - nu). f1/f2 must share a grid, as must g1/g2. For real
// spectra the conjugate has no effect.
double visibility_from_spectra(const TransmissionSpectrum& f1, const TransmissionSpectrum& g1,
                               const TransmissionSpectrum& f2, const TransmissionSpectrum& g2,
                               double nu_pump_hz);

// C(phi_A, phi_B) = c0 (1 - v cos(phi_A + phi_B + delta_phi))
struct FringeParameters {
  double c0 = 0.0;
  double v = 0.0;
  double delta_phi = 0.0;  // radians in [0, 2pi)
  std::string method;
};

// Closed-form fringe of coincidence_probability obtained from the JSA overlap
// integrals, in pump-phase coordinates for the given offsets.
FringeParameters fringe_from_overlap(const PathState& state, double offset_s = 0.0,
                                     double offset_i = 0.0);

// Least-squares extraction of (c0, v, delta_phi) from coincidence_probability
// evaluated at each setting of the sweep.
FringeParameters fringe_model_parameters(const PathState& state,
                                         std::span<const ProjectionSetting> sweep);

// n equally spaced sum phases (phi_s swept, phi_i = 0).
std::vector<ProjectionSetting> sum_phase_sweep(int n, double offset_s = 0.0, double offset_i = 0.0);

// Largest circular gap between sorted phases (radians).
double max_circular_gap(std::vector<double> phases);

}  // namespace awgent
