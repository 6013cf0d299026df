#pragma once

// SFWM photon-pair model: energy-conserving channel pairing, the quasi-cw
// joint spectral amplitude and the pulsed-pump joint spectral intensity.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "awgent/awg_optics.hpp"
#include "awgent/frequency_grid.hpp"
#include "awgent/kernels.hpp"

namespace awgent {

struct PumpSpec {
  double center_frequency = 0.0;  // nu_p (Hz)
  double repetition_rate = 0.0;   // Hz
  double pulse_width = 0.0;       // s
  double bandwidth_fwhm = 0.0;    // Hz, intensity FWHM of the pump spectrum
  std::vector<double> per_source_pair_probability;  // mean pairs per gate, per source
  double leakage_rejection_db = 0.0;

  void validate() const;
  double mu(std::size_t source_j) const { return per_source_pair_probability.at(source_j); }
  double total_mu() const;
};

// Time-bandwidth limited Gaussian pulse: FWHM bandwidth = 2 ln2 / (pi * duration).
double transform_limited_bandwidth(double pulse_width_s);

struct ChannelPair {
  double nu_s = 0.0;
  double nu_i = 0.0;
};

ChannelPair sfwm_channel_pair(const PumpSpec& pump, double delta_nu, int channel_offset);

// Complex two-photon amplitude on a (signal x idler) grid, row-major by signal
// index, stored as split real/imag planes. Normalized so that
// sum |S|^2 * cell_area = 1.
class JointSpectralAmplitude {
 public:
  JointSpectralAmplitude() = default;
  JointSpectralAmplitude(FrequencyGrid signal, FrequencyGrid idler, double pump_frequency);

  const FrequencyGrid& signal_grid() const { return signal_; }
  const FrequencyGrid& idler_grid() const { return idler_; }
  double pump_frequency() const { return pump_frequency_; }
  double cell_area() const { return signal_.step_hz * idler_.step_hz; }
  std::size_t size() const { return re_.size(); }

  std::complex<double> at(std::size_t ks, std::size_t ki) const {
    const std::size_t idx = ks * idler_.count + ki;
    return {re_[idx], im_[idx]};
  }
  void set(std::size_t ks, std::size_t ki, std::complex<double> v) {
    const std::size_t idx = ks * idler_.count + ki;
    re_[idx] = v.real();
    im_[idx] = v.imag();
  }

  kernels::ComplexSpan view() const { return {re_, im_}; }

  // sum |S|^2 * cell_area
  double norm() const;
  // Rescales to unit norm and records the pre-normalization norm.
  void normalize();
  // sqrt(sum |S_raw|^2 * cell_area) before normalization: the relative pair
  // collection amplitude of this source through its two passbands.
  double collection_norm() const { return collection_norm_; }

  bool same_grid(const JointSpectralAmplitude& other) const;

  // Largest |nu_s + nu_i - 2 nu_p| over cells with nonzero amplitude.
  double max_energy_mismatch() const;

 private:
  FrequencyGrid signal_;
  FrequencyGrid idler_;
  double pump_frequency_ = 0.0;
  double collection_norm_ = 1.0;
  std::vector<double> re_;
  std::vector<double> im_;
};

// Crop window for joint-spectrum grids: +-half_width_hz around each parent
// grid's center. Zero keeps the full grids.
struct JsaWindow {
  double half_width_hz = 0.0;
};

// Smallest window (plus one grid step) around each spectrum's grid center that
// contains every sample above rel_threshold of that spectrum's peak amplitude.
JsaWindow support_window(const std::vector<const TransmissionSpectrum*>& spectra,
                         double rel_threshold = 1e-6);

// Quasi-cw joint spectral amplitude f(nu_s) g(nu_i) delta(2 nu_p - nu_s - nu_i).
// The delta ridge is discretized by the overlap of the line nu_s + nu_i = 2 nu_p
// with each cell.
JointSpectralAmplitude build_jsa_quasi_cw(const TransmissionSpectrum& f,
                                          const TransmissionSpectrum& g,
                                          const PumpSpec& pump, JsaWindow window = {});

struct JointSpectralIntensity {
  FrequencyGrid signal_grid;
  FrequencyGrid idler_grid;
  std::vector<double> intensity;  // row-major by signal, unit maximum
  double pump_frequency = 0.0;

  double at(std::size_t ks, std::size_t ki) const { return intensity[ks * idler_grid.count + ki]; }
};

// |S|^2 ~ |f(nu_s)|^2 |g(nu_i)|^2 |alpha(nu_s + nu_i - 2 nu_p)|^2 for a
// transform-limited Gaussian pump; cells beyond three pump FWHM from the
// energy-conservation line are zero.
JointSpectralIntensity build_jsi_pulsed(const TransmissionSpectrum& f,
                                        const TransmissionSpectrum& g, const PumpSpec& pump,
                                        JsaWindow window = {});

// Energy-sum envelope |alpha|^2 of a Gaussian pump with intensity FWHM B:
// exp(-2 ln2 (sum / B)^2), i.e. FWHM sqrt(2) B on the sum-frequency axis.
double pump_envelope_intensity(double bandwidth_fwhm, double sum_detuning_hz);

void write_jsi_csv(std::ostream& os, const JointSpectralIntensity& jsi, std::size_t stride = 1);

}  // namespace awgent
