#include "awgent/pair_source.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "awgent/constants.hpp"
#include "awgent/errors.hpp"

namespace awgent {

void PumpSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::parameter, "pump." + msg); };
  if (!(std::isfinite(center_frequency) && center_frequency > 0.0)) fail("center frequency must be positive");
  if (!(std::isfinite(repetition_rate) && repetition_rate > 0.0)) fail("repetition rate must be positive");
  if (!(std::isfinite(pulse_width) && pulse_width > 0.0)) fail("pulse width must be positive");
  if (!(std::isfinite(bandwidth_fwhm) && bandwidth_fwhm > 0.0)) fail("bandwidth must be positive");
  if (per_source_pair_probability.empty()) fail("mu_per_source needs at least one value");
  for (double mu : per_source_pair_probability) {
    if (!(mu >= 0.0 && mu <= 0.5)) fail(fmt::format("mu {} outside [0, 0.5]", mu));
  }
  if (!(leakage_rejection_db <= 0.0)) fail("leakage_db must be <= 0");
}

double PumpSpec::total_mu() const {
  double s = 0.0;
  for (double mu : per_source_pair_probability) s += mu;
  return s;
}

double transform_limited_bandwidth(double pulse_width_s) {
  return 2.0 * kLn2 / (kPi * pulse_width_s);
}

ChannelPair sfwm_channel_pair(const PumpSpec& pump, double delta_nu, int channel_offset) {
  if (channel_offset == 0) {
    throw Error(ErrorCode::degeneracy, "channel offset 0 gives degenerate signal and idler");
  }
  if (channel_offset < 0) throw Error(ErrorCode::parameter, "channel offset must be >= 1");
  if (!(delta_nu > 0.0)) throw Error(ErrorCode::parameter, "channel spacing must be positive");
  const double nu_s = pump.center_frequency + channel_offset * delta_nu;
  return {nu_s, 2.0 * pump.center_frequency - nu_s};
}

JointSpectralAmplitude::JointSpectralAmplitude(FrequencyGrid signal, FrequencyGrid idler,
                                               double pump_frequency)
    : signal_(signal),
      idler_(idler),
      pump_frequency_(pump_frequency),
      re_(signal.count * idler.count, 0.0),
      im_(signal.count * idler.count, 0.0) {}

double JointSpectralAmplitude::norm() const { return kernels::uniform_norm(view(), cell_area()); }

void JointSpectralAmplitude::normalize() {
  const double n2 = norm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw Error(ErrorCode::empty_jsa, "joint spectral amplitude has zero norm");
  }
  const double n = std::sqrt(n2);
  for (auto& x : re_) x /= n;
  for (auto& x : im_) x /= n;
  collection_norm_ = n;
}

bool JointSpectralAmplitude::same_grid(const JointSpectralAmplitude& other) const {
  return signal_.same_as(other.signal_) && idler_.same_as(other.idler_);
}

double JointSpectralAmplitude::max_energy_mismatch() const {
  double worst = 0.0;
  for (std::size_t ks = 0; ks < signal_.count; ++ks) {
    for (std::size_t ki = 0; ki < idler_.count; ++ki) {
      const std::size_t idx = ks * idler_.count + ki;
      if (re_[idx] != 0.0 || im_[idx] != 0.0) {
        worst = std::max(worst,
                         std::abs(signal_.at(ks) + idler_.at(ki) - 2.0 * pump_frequency_));
      }
    }
  }
  return worst;
}

namespace {

struct Crop {
  FrequencyGrid grid;
  std::size_t offset = 0;  // first parent index
};

Crop crop(const FrequencyGrid& parent, JsaWindow window) {
  if (!(window.half_width_hz > 0.0)) return {parent, 0};
  const double center = parent.center_hz();
  const auto lo = static_cast<std::size_t>(
      std::max(0.0, std::ceil(parent.index_of(center - window.half_width_hz) - 1e-9)));
  const auto hi = static_cast<std::size_t>(std::min(
      static_cast<double>(parent.count - 1),
      std::floor(parent.index_of(center + window.half_width_hz) + 1e-9)));
  if (hi < lo) throw Error(ErrorCode::parameter, "JSA window is empty");
  return {{parent.at(lo), parent.step_hz, hi - lo + 1}, lo};
}

void check_steps(const TransmissionSpectrum& f, const TransmissionSpectrum& g) {
  if (f.grid.count < 2 || g.grid.count < 2) {
    throw Error(ErrorCode::grid_mismatch, "spectra need at least two samples");
  }
  if (std::abs(f.grid.step_hz - g.grid.step_hz) > 1e-9 * f.grid.step_hz) {
    throw Error(ErrorCode::grid_mismatch, "signal and idler spectra must share a grid step");
  }
}

}  // namespace

JsaWindow support_window(const std::vector<const TransmissionSpectrum*>& spectra,
                         double rel_threshold) {
  double half = 0.0;
  for (const auto* s : spectra) {
    const double thr = rel_threshold * std::sqrt(s->peak_intensity());
    const double center = s->grid.center_hz();
    for (std::size_t k = 0; k < s->grid.count; ++k) {
      if (std::abs(s->amplitude[k]) >= thr) {
        half = std::max(half, std::abs(s->grid.at(k) - center) + s->grid.step_hz);
      }
    }
  }
  return {half};
}

JointSpectralAmplitude build_jsa_quasi_cw(const TransmissionSpectrum& f,
                                          const TransmissionSpectrum& g,
                                          const PumpSpec& pump, JsaWindow window) {
  pump.validate();
  check_steps(f, g);
  const double collection = std::min(f.fwhm, g.fwhm);
  if (!(pump.bandwidth_fwhm < 0.1 * collection)) {
    throw Error(ErrorCode::model_validity,
                fmt::format("quasi-cw needs pump bandwidth ({:.3g} GHz) below 0.1 x passband "
                            "fwhm ({:.3g} GHz)",
                            pump.bandwidth_fwhm * 1e-9, collection * 1e-9));
  }

  const Crop cs = crop(f.grid, window);
  const Crop ci = crop(g.grid, window);
  JointSpectralAmplitude jsa(cs.grid, ci.grid, pump.center_frequency);

  const double step = cs.grid.step_hz;
  const double target = 2.0 * pump.center_frequency;
  for (std::size_t ks = 0; ks < cs.grid.count; ++ks) {
    const double nu_s = cs.grid.at(ks);
    const auto fs = f.amplitude[cs.offset + ks];
    if (fs == 0.0) continue;
    // Idler cells whose square is crossed by nu_s + nu_i = 2 nu_p.
    const double center = ci.grid.index_of(target - nu_s);
    const auto lo = static_cast<long>(std::floor(center)) - 1;
    for (long ki = std::max(0L, lo); ki <= lo + 3 && ki < static_cast<long>(ci.grid.count); ++ki) {
      const auto k = static_cast<std::size_t>(ki);
      const double u = nu_s + ci.grid.at(k) - target;
      const double w = 1.0 - std::abs(u) / step;
      if (w <= 0.0) continue;
      jsa.set(ks, k, fs * g.amplitude[ci.offset + k] * w);
    }
  }
  if (!(jsa.norm() > 0.0)) {
    throw Error(ErrorCode::empty_jsa, "signal passband and reflected idler passband do not overlap");
  }
  jsa.normalize();
  return jsa;
}

double pump_envelope_intensity(double bandwidth_fwhm, double sum_detuning_hz) {
  const double x = sum_detuning_hz / bandwidth_fwhm;
  return std::exp(-2.0 * kLn2 * x * x);
}

JointSpectralIntensity build_jsi_pulsed(const TransmissionSpectrum& f,
                                        const TransmissionSpectrum& g, const PumpSpec& pump,
                                        JsaWindow window) {
  pump.validate();
  check_steps(f, g);
  if (f.grid.step_hz > 0.5 * pump.bandwidth_fwhm) {
    throw Error(ErrorCode::resolution,
                fmt::format("grid step {:.3g} GHz cannot resolve a {:.3g} GHz pump ridge",
                            f.grid.step_hz * 1e-9, pump.bandwidth_fwhm * 1e-9));
  }
  const Crop cs = crop(f.grid, window);
  const Crop ci = crop(g.grid, window);
  JointSpectralIntensity jsi{cs.grid, ci.grid,
                             std::vector<double>(cs.grid.count * ci.grid.count, 0.0),
                             pump.center_frequency};
  const double cutoff = 3.0 * pump.bandwidth_fwhm;
  const double target = 2.0 * pump.center_frequency;
  double peak = 0.0;
  for (std::size_t ks = 0; ks < cs.grid.count; ++ks) {
    const double fs = std::norm(f.amplitude[cs.offset + ks]);
    if (fs == 0.0) continue;
    const double nu_s = cs.grid.at(ks);
    for (std::size_t ki = 0; ki < ci.grid.count; ++ki) {
      const double sum = nu_s + ci.grid.at(ki) - target;
      if (std::abs(sum) > cutoff) continue;
      const double v = fs * std::norm(g.amplitude[ci.offset + ki]) *
                       pump_envelope_intensity(pump.bandwidth_fwhm, sum);
      jsi.intensity[ks * ci.grid.count + ki] = v;
      peak = std::max(peak, v);
    }
  }
  if (!(peak > 0.0)) throw Error(ErrorCode::empty_jsa, "joint spectral intensity is empty");
  for (auto& v : jsi.intensity) v /= peak;
  return jsi;
}

void write_jsi_csv(std::ostream& os, const JointSpectralIntensity& jsi, std::size_t stride) {
  stride = std::max<std::size_t>(stride, 1);
  os << "nu_s_hz,nu_i_hz,intensity\n";
  for (std::size_t ks = 0; ks < jsi.signal_grid.count; ks += stride) {
    for (std::size_t ki = 0; ki < jsi.idler_grid.count; ki += stride) {
      fmt::print(os, "{:.6f},{:.6f},{:.9e}\n", jsi.signal_grid.at(ks), jsi.idler_grid.at(ki),
                 jsi.at(ks, ki));
    }
  }
}

}  // namespace awgent
