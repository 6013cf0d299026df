#include "awgent/awg_optics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "awgent/constants.hpp"
#include "awgent/errors.hpp"

namespace awgent {

namespace {

// Refractive-index bounds. The upper bound admits the array index obtained when
// a published geometry is calibrated to a measured channel spacing.
constexpr double kIndexMin = 1.0;
constexpr double kIndexMax = 16.0;

void require(bool ok, const std::string& field, const std::string& detail) {
  if (!ok) throw Error(ErrorCode::invalid_design, fmt::format("awg.{}: {}", field, detail));
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void AwgDesign::validate() const {
  require(positive_finite(d), "d", "must be a positive length");
  require(positive_finite(f), "f", "must be a positive length");
  require(positive_finite(delta_L), "delta_L", "must be a positive length");
  require(std::isfinite(n_s) && n_s > kIndexMin && n_s < kIndexMax, "n_s",
          fmt::format("must lie in ({}, {})", kIndexMin, kIndexMax));
  require(std::isfinite(n_a) && n_a > kIndexMin && n_a < kIndexMax, "n_a",
          fmt::format("must lie in ({}, {})", kIndexMin, kIndexMax));
  require(std::isfinite(lambda0) && lambda0 > 1.0e-6 && lambda0 < 2.0e-6, "lambda0",
          "must lie in (1000 nm, 2000 nm)");
  require(array_count > 0, "array_count", "must be positive");
  require(grating_order > 0, "grating_order", "must be positive");
  require(std::isfinite(insertion_loss_db) && insertion_loss_db <= 0.0, "insertion_loss_db",
          "must be <= 0 dB");
}

double AwgDesign::center_frequency() const { return kSpeedOfLight / lambda0; }

ChannelSpacing channel_spacing(const AwgDesign& design) {
  design.validate();
  const double dl =
      design.n_s * design.lambda0 * design.d * design.d / (design.n_a * design.f * design.delta_L);
  const double dnu = kSpeedOfLight * dl / (design.lambda0 * design.lambda0);
  if (!std::isfinite(dl) || !(dl > 0.0) || !std::isfinite(dnu)) {
    throw Error(ErrorCode::invalid_design, "channel spacing is not finite");
  }
  return {dl, dnu};
}

double spatial_dispersion(const AwgDesign& design) {
  design.validate();
  const double disp =
      design.n_a * design.f * design.delta_L / (design.n_s * design.d * design.lambda0);
  if (!std::isfinite(disp) || !(disp > 0.0)) {
    throw Error(ErrorCode::invalid_design, "spatial dispersion is not finite");
  }
  return disp;
}

AwgDesign calibrate_array_index(const AwgDesign& design, double target_delta_nu) {
  if (!positive_finite(target_delta_nu)) {
    throw Error(ErrorCode::invalid_design, "awg.target_spacing: must be positive");
  }
  AwgDesign out = design;
  const double target_dl = target_delta_nu * design.lambda0 * design.lambda0 / kSpeedOfLight;
  out.n_a = design.n_s * design.lambda0 * design.d * design.d / (design.f * design.delta_L * target_dl);
  out.validate();
  return out;
}

SpacingSensitivity spacing_sensitivity(const AwgDesign& design) {
  design.validate();
  return {};
}

double tolerance_propagation(const AwgDesign& design, double delta_na_rel) {
  design.validate();
  if (!(std::abs(delta_na_rel) < 0.1)) {
    throw Error(ErrorCode::parameter, "relative index perturbation must satisfy |delta| < 0.1");
  }
  return spacing_sensitivity(design).n_a * delta_na_rel;
}

void PortAssignment::check_invariants() const {
  const auto n = static_cast<std::size_t>(n_sources);
  if (input_ports.size() != n || output_ports_signal.size() != n ||
      output_ports_idler.size() != n || pump_focus_ports.size() != n) {
    throw Error(ErrorCode::layout, "port lists do not match the number of sources");
  }
  std::map<int, std::string> owner;
  std::vector<std::string> clashes;
  auto claim = [&](int port, const std::string& name) {
    auto [it, inserted] = owner.emplace(port, name);
    if (!inserted) {
      clashes.push_back(fmt::format("{} and {} at grid {}", it->second, name, port));
    }
  };
  for (std::size_t j = 0; j < n; ++j) {
    claim(pump_focus_ports[j], fmt::format("pump focus P_{}", j + 1));
  }
  for (std::size_t j = 0; j < n; ++j) {
    claim(output_ports_signal[j], fmt::format("signal A_{}", j + 1));
  }
  for (std::size_t j = 0; j < n; ++j) {
    claim(output_ports_idler[j], fmt::format("idler B_{}", j + 1));
  }
  if (!clashes.empty()) {
    std::string msg = "port collision:";
    for (const auto& c : clashes) msg += " [" + c + "]";
    throw Error(ErrorCode::layout, msg);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (output_ports_signal[j] + output_ports_idler[j] != 2 * pump_focus_ports[j]) {
      throw Error(ErrorCode::layout,
                  fmt::format("source {}: signal/idler ports not centred on the pump focus", j + 1));
    }
  }
}

int facet_half_width(const AwgDesign& design) { return (design.array_count - 1) / 2; }

PortAssignment plan_ports(const AwgDesign& design, int n_sources, int channel_offset) {
  design.validate();
  if (n_sources < 1) throw Error(ErrorCode::parameter, "ports.n_sources must be >= 1");
  if (channel_offset < 1) throw Error(ErrorCode::parameter, "ports.channel_offset must be >= 1");

  PortAssignment pa;
  pa.n_sources = n_sources;
  pa.channel_offset = channel_offset;
  // Consecutive central grid lines; for even N the extra line goes to +1.
  const int first = -((n_sources - 1) / 2);
  for (int j = 0; j < n_sources; ++j) {
    const int input = first + j;
    // An input displaced by +k pitches focuses the pump k pitches the other way.
    const int pump = -input;
    pa.input_ports.push_back(input);
    pa.pump_focus_ports.push_back(pump);
    pa.output_ports_signal.push_back(pump + channel_offset);
    pa.output_ports_idler.push_back(pump - channel_offset);
  }

  pa.check_invariants();

  const int limit = facet_half_width(design);
  auto check = [&](const std::vector<int>& ports, const char* what) {
    for (std::size_t j = 0; j < ports.size(); ++j) {
      if (std::abs(ports[j]) > limit) {
        throw Error(ErrorCode::capacity,
                    fmt::format("{} port of source {} at grid {} exceeds facet capacity +-{}",
                                what, j + 1, ports[j], limit));
      }
    }
  };
  check(pa.input_ports, "input");
  check(pa.output_ports_signal, "signal");
  check(pa.output_ports_idler, "idler");
  return pa;
}

std::string to_string(PassbandShape shape) {
  return shape == PassbandShape::gaussian ? "gaussian" : "flat_top";
}

PassbandShape parse_passband_shape(const std::string& text) {
  if (text == "gaussian") return PassbandShape::gaussian;
  if (text == "flat_top" || text == "flat-top" || text == "flattop") return PassbandShape::flat_top;
  throw Error(ErrorCode::config, fmt::format("unknown passband model '{}'", text));
}

double PassbandModel::offset_for(int source_j, PhotonRole role) const {
  const auto& v = role == PhotonRole::signal ? signal_offset_hz : idler_offset_hz;
  if (v.empty()) return 0.0;
  return v.at(static_cast<std::size_t>(source_j));
}

double passband_amplitude(PassbandShape shape, double fwhm_hz, double detuning_hz) {
  const double x = 2.0 * detuning_hz / fwhm_hz;
  // intensity = exp(-ln2 * x^(2p)); p = 1 Gaussian, p = 3 flat-top super-Gaussian
  const double x2 = x * x;
  const double power = shape == PassbandShape::gaussian ? x2 : x2 * x2 * x2;
  return std::exp(-0.5 * kLn2 * power);
}

std::complex<double> TransmissionSpectrum::at(double nu_hz) const {
  const double pos = grid.index_of(nu_hz);
  if (grid.count == 0 || pos < 0.0 || pos > static_cast<double>(grid.count - 1)) return {};
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= grid.count) return amplitude[grid.count - 1];
  const double t = pos - static_cast<double>(k);
  return (1.0 - t) * amplitude[k] + t * amplitude[k + 1];
}

double TransmissionSpectrum::peak_intensity() const {
  double peak = 0.0;
  for (const auto& a : amplitude) peak = std::max(peak, std::norm(a));
  return peak;
}

double nominal_port_frequency(const AwgDesign& design, const PortAssignment& assignment,
                              PhotonRole role) {
  const double detuning = assignment.channel_offset * channel_spacing(design).delta_nu;
  return design.center_frequency() + (role == PhotonRole::signal ? detuning : -detuning);
}

TransmissionSpectrum port_transmission(const AwgDesign& design,
                                       const PortAssignment& assignment, int source_j,
                                       PhotonRole role, const PassbandModel& passband) {
  if (source_j < 0 || source_j >= assignment.n_sources) {
    throw Error(ErrorCode::parameter, fmt::format("source index {} out of range", source_j));
  }
  const double spacing = channel_spacing(design).delta_nu;
  if (!(passband.fwhm_hz > 0.0) || passband.fwhm_hz >= spacing) {
    throw Error(ErrorCode::model_validity,
                fmt::format("passband fwhm {:.3f} GHz must be positive and below the channel "
                            "spacing {:.3f} GHz",
                            passband.fwhm_hz * 1e-9, spacing * 1e-9));
  }
  if (!(passband.grid_step_hz > 0.0) || !(passband.half_span_channels > 0.0)) {
    throw Error(ErrorCode::parameter, "passband grid step and span must be positive");
  }

  const double nominal = nominal_port_frequency(design, assignment, role);
  const double center = nominal + passband.offset_for(source_j, role);
  const double peak = db_to_amplitude(design.insertion_loss_db);

  TransmissionSpectrum ts;
  ts.grid = FrequencyGrid::centered(nominal, passband.half_span_channels * spacing,
                                    passband.grid_step_hz);
  ts.center_frequency = center;
  ts.fwhm = passband.fwhm_hz;
  ts.amplitude.resize(ts.grid.count);
  for (std::size_t k = 0; k < ts.grid.count; ++k) {
    ts.amplitude[k] = peak * passband_amplitude(passband.shape, passband.fwhm_hz,
                                                ts.grid.at(k) - center);
  }
  const double edge = std::max(std::abs(ts.amplitude.front()), std::abs(ts.amplitude.back()));
  if (edge > 1e-6 * peak) {
    throw Error(ErrorCode::model_validity, "passband is not contained in the frequency grid");
  }
  return ts;
}

double measure_fwhm(const TransmissionSpectrum& spectrum) {
  const auto& a = spectrum.amplitude;
  if (a.empty()) return 0.0;
  std::size_t kmax = 0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (std::norm(a[k]) > std::norm(a[kmax])) kmax = k;
  }
  const double half = 0.5 * std::norm(a[kmax]);
  auto crossing = [&](std::size_t k0, std::size_t k1) {
    const double y0 = std::norm(a[k0]), y1 = std::norm(a[k1]);
    const double t = (half - y0) / (y1 - y0);
    return spectrum.grid.at(k0) + t * (spectrum.grid.at(k1) - spectrum.grid.at(k0));
  };
  std::size_t lo = kmax;
  while (lo > 0 && std::norm(a[lo - 1]) >= half) --lo;
  std::size_t hi = kmax;
  while (hi + 1 < a.size() && std::norm(a[hi + 1]) >= half) ++hi;
  if (lo == 0 || hi + 1 == a.size()) return 0.0;
  return crossing(hi, hi + 1) - crossing(lo - 1, lo);
}

}  // namespace awgent
