#pragma once

// Parametric model of the AWG demultiplexer: dispersion relations, port
// planning for an N-source path-entanglement device, per-port passbands and
// fabrication-tolerance propagation.

#include <complex>
#include <string>
#include <vector>

#include "awgent/frequency_grid.hpp"

namespace awgent {

struct AwgDesign {
  double d = 0.0;        // waveguide pitch at the slab facets (m)
  double f = 0.0;        // slab focal length (m)
  double delta_L = 0.0;  // array path-length increment (m)
  double n_s = 0.0;      // slab effective index
  double n_a = 0.0;      // array-waveguide group index
  double lambda0 = 0.0;  // center wavelength (m)
  int array_count = 0;
  int grating_order = 0;
  double insertion_loss_db = 0.0;  // <= 0

  // Throws ErrorCode::invalid_design naming the offending field.
  void validate() const;

  double center_frequency() const;  // c / lambda0
};

struct ChannelSpacing {
  double delta_lambda = 0.0;  // m
  double delta_nu = 0.0;      // Hz
};

ChannelSpacing channel_spacing(const AwgDesign& design);

// Focal-spot displacement per unit wavelength on the output facet (m/m).
double spatial_dispersion(const AwgDesign& design);

// Returns a copy of `design` with n_a chosen so that the channel spacing is
// `target_delta_nu`; n_s and the geometry are kept.
AwgDesign calibrate_array_index(const AwgDesign& design, double target_delta_nu);

// Logarithmic sensitivities d ln(delta_lambda) / d ln(x) for each design input.
struct SpacingSensitivity {
  double d = 2.0;
  double f = -1.0;
  double delta_L = -1.0;
  double n_s = 1.0;
  double n_a = -1.0;
  double lambda0 = 1.0;
};

SpacingSensitivity spacing_sensitivity(const AwgDesign& design);

// First-order relative channel-spacing error caused by a relative change of
// the array group index (signed; delta_lambda scales as 1/n_a).
double tolerance_propagation(const AwgDesign& design, double delta_na_rel);

// Grid indices are integer multiples of the facet pitch d, counted from the
// slab center. Output indices grow with optical frequency.
struct PortAssignment {
  int n_sources = 0;
  int channel_offset = 0;
  std::vector<int> input_ports;
  std::vector<int> output_ports_signal;  // A_j
  std::vector<int> output_ports_idler;   // B_j
  std::vector<int> pump_focus_ports;

  // Throws ErrorCode::layout when the disjointness or midpoint invariant fails.
  void check_invariants() const;
};

// Highest usable |grid index| on a facet for the given array size.
int facet_half_width(const AwgDesign& design);

PortAssignment plan_ports(const AwgDesign& design, int n_sources, int channel_offset);

enum class PassbandShape { gaussian, flat_top };
enum class PhotonRole { signal, idler };

std::string to_string(PassbandShape shape);
PassbandShape parse_passband_shape(const std::string& text);

struct PassbandModel {
  PassbandShape shape = PassbandShape::gaussian;
  double fwhm_hz = 90e9;
  // Center-frequency error per port (Hz), indexed by source; empty means zero.
  std::vector<double> signal_offset_hz;
  std::vector<double> idler_offset_hz;
  double grid_step_hz = 0.5e9;
  double half_span_channels = 3.0;

  double offset_for(int source_j, PhotonRole role) const;
};

// Unit-peak amplitude response at `detuning_hz` from the passband center.
// Intensity is exactly one half at detuning = +-fwhm/2 for both shapes.
double passband_amplitude(PassbandShape shape, double fwhm_hz, double detuning_hz);

struct TransmissionSpectrum {
  FrequencyGrid grid;
  std::vector<std::complex<double>> amplitude;
  double center_frequency = 0.0;
  double fwhm = 0.0;

  // Linear interpolation; zero outside the grid.
  std::complex<double> at(double nu_hz) const;
  double peak_intensity() const;
};

// Nominal carrier of a collected photon: nu_p +/- m * delta_nu.
double nominal_port_frequency(const AwgDesign& design, const PortAssignment& assignment,
                              PhotonRole role);

TransmissionSpectrum port_transmission(const AwgDesign& design,
                                       const PortAssignment& assignment, int source_j,
                                       PhotonRole role, const PassbandModel& passband);

// Intensity full width at half maximum measured from the samples.
double measure_fwhm(const TransmissionSpectrum& spectrum);

}  // namespace awgent
