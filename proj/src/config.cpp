#include "awgent/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "awgent/constants.hpp"
#include "awgent/errors.hpp"

namespace awgent {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::config, fmt::format("{}: expected {}, got '{}'", key, what, value));
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(x)) bad_value(key, value, "a finite number");
    return x;
  } catch (const std::logic_error&) {
    bad_value(key, value, "a finite number");
  }
}

long long to_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value, "an integer");
    return x;
  } catch (const std::logic_error&) {
    bad_value(key, value, "an integer");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value.front() == '-') bad_value(key, value, "a non-negative integer");
    const unsigned long long x = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value, "a non-negative integer");
    return x;
  } catch (const std::logic_error&) {
    bad_value(key, value, "a non-negative integer");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(key, item));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [](auto get, double scale = 1.0) -> Setter {
      return [get, scale](RunConfig& c, const std::string& k, const std::string& v) {
        get(c) = to_double(k, v) * scale;
      };
    };
    // [awg]
    t["awg.d_um"] = dbl([](RunConfig& c) -> double& { return c.awg.d; }, 1e-6);
    t["awg.f_mm"] = dbl([](RunConfig& c) -> double& { return c.awg.f; }, 1e-3);
    t["awg.delta_L_um"] = dbl([](RunConfig& c) -> double& { return c.awg.delta_L; }, 1e-6);
    t["awg.n_s"] = dbl([](RunConfig& c) -> double& { return c.awg.n_s; });
    t["awg.n_a"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "auto") {
        c.calibrate_n_a = true;
      } else {
        c.calibrate_n_a = false;
        c.awg.n_a = to_double(k, v);
      }
    };
    t["awg.lambda0_nm"] = dbl([](RunConfig& c) -> double& { return c.awg.lambda0; }, 1e-9);
    t["awg.array_count"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.awg.array_count = static_cast<int>(to_integer(k, v));
    };
    t["awg.grating_order"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.awg.grating_order = static_cast<int>(to_integer(k, v));
    };
    t["awg.insertion_loss_db"] = dbl([](RunConfig& c) -> double& { return c.awg.insertion_loss_db; });
    t["awg.passband_model"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      try {
        c.passband.shape = parse_passband_shape(v);
      } catch (const Error&) {
        bad_value(k, v, "'gaussian' or 'flat_top'");
      }
    };
    t["awg.fwhm_ghz"] = dbl([](RunConfig& c) -> double& { return c.passband.fwhm_hz; }, 1e9);
    t["awg.port_offset_errors_ghz"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      const auto list = to_list(k, v);
      if (list.size() % 2 != 0) bad_value(k, v, "signal,idler pairs per source");
      c.passband.signal_offset_hz.clear();
      c.passband.idler_offset_hz.clear();
      for (std::size_t n = 0; n < list.size(); n += 2) {
        c.passband.signal_offset_hz.push_back(list[n] * 1e9);
        c.passband.idler_offset_hz.push_back(list[n + 1] * 1e9);
      }
    };
    t["awg.target_spacing_ghz"] = dbl([](RunConfig& c) -> double& { return c.target_spacing_hz; }, 1e9);
    t["awg.grid_step_ghz"] = dbl([](RunConfig& c) -> double& { return c.passband.grid_step_hz; }, 1e9);
    t["awg.half_span_channels"] = dbl([](RunConfig& c) -> double& { return c.passband.half_span_channels; });
    // [ports]
    t["ports.n_sources"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.n_sources = static_cast<int>(to_integer(k, v));
    };
    t["ports.channel_offset"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.channel_offset = static_cast<int>(to_integer(k, v));
    };
    // [pump]
    t["pump.center_nm"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      const double nm = to_double(k, v);
      if (!(nm > 0.0)) bad_value(k, v, "a positive wavelength");
      c.pump.center_frequency = kSpeedOfLight / (nm * 1e-9);
    };
    t["pump.rep_rate_mhz"] = dbl([](RunConfig& c) -> double& { return c.pump.repetition_rate; }, 1e6);
    t["pump.pulse_ps"] = dbl([](RunConfig& c) -> double& { return c.pump.pulse_width; }, 1e-12);
    t["pump.bandwidth_ghz"] = dbl([](RunConfig& c) -> double& { return c.pump.bandwidth_fwhm; }, 1e9);
    t["pump.mu_per_source"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.pump.per_source_pair_probability = to_list(k, v);
      if (c.pump.per_source_pair_probability.empty()) bad_value(k, v, "one or more values");
    };
    t["pump.leakage_db"] = dbl([](RunConfig& c) -> double& { return c.pump.leakage_rejection_db; });
    t["pump.leakage_background"] = dbl([](RunConfig& c) -> double& { return c.leakage_background; });
    // [detectors]
    t["detectors.efficiency"] = dbl([](RunConfig& c) -> double& { return c.detectors.efficiency; });
    t["detectors.gate_ns"] = dbl([](RunConfig& c) -> double& { return c.detectors.gate_width; }, 1e-9);
    t["detectors.dark_hz"] = dbl([](RunConfig& c) -> double& { return c.detectors.dark_count_rate; });
    t["detectors.dead_us"] = dbl([](RunConfig& c) -> double& { return c.detectors.dead_time; }, 1e-6);
    t["detectors.gate_rate_mhz"] = dbl([](RunConfig& c) -> double& { return c.detectors.gate_rate; }, 1e6);
    // [losses]
    t["losses.collection_db"] = dbl([](RunConfig& c) -> double& { return c.losses.collection_db; });
    auto item = [](std::size_t n) -> Setter {
      return [n](RunConfig& c, const std::string& k, const std::string& v) {
        c.losses.components.at(n).db = to_double(k, v);
      };
    };
    t["losses.facet_db"] = item(0);
    t["losses.awg_db"] = item(1);
    t["losses.filters_db"] = item(2);
    t["losses.fiber_db"] = item(3);
    // [drift]
    t["drift.step_deg"] = dbl([](RunConfig& c) -> double& { return c.drift.step_std; }, kPi / 180.0);
    t["drift.record_s"] = dbl([](RunConfig& c) -> double& { return c.drift.record_interval; });
    t["drift.fast_noise_deg"] = dbl([](RunConfig& c) -> double& { return c.drift.fast_noise_std; }, kPi / 180.0);
    t["drift.intensity_noise"] = dbl([](RunConfig& c) -> double& { return c.drift.intensity_noise_std; });
    t["drift.offset_s_deg"] = dbl([](RunConfig& c) -> double& { return c.offset_s; }, kPi / 180.0);
    t["drift.offset_i_deg"] = dbl([](RunConfig& c) -> double& { return c.offset_i; }, kPi / 180.0);
    t["drift.polarization_visibility"] = dbl([](RunConfig& c) -> double& { return c.polarization_visibility; });
    t["drift.branch"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "quadrature") {
        c.branch = BranchReference::quadrature;
      } else if (v == "previous") {
        c.branch = BranchReference::previous_estimate;
      } else {
        bad_value(k, v, "'quadrature' or 'previous'");
      }
    };
    // [run]
    t["run.duration_s"] = dbl([](RunConfig& c) -> double& { return c.duration_s; });
    t["run.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = to_unsigned(k, v);
    };
    t["run.threads"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.threads = static_cast<int>(to_integer(k, v));
    };
    // [analysis]
    t["analysis.fine_bin_deg"] = dbl([](RunConfig& c) -> double& { return c.analysis.retrieval.fine_bin; }, kPi / 180.0);
    t["analysis.coarse_bin_deg"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.analysis.retrieval.coarse_bin = deg_to_rad(to_double(k, v));
      c.analysis.retrieval.slope_threshold = 0.5 * std::sin(0.5 * c.analysis.retrieval.coarse_bin);
    };
    t["analysis.slices_deg"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.analysis.slices_deg = to_list(k, v);
    };
    t["analysis.chsh_min_counts"] = dbl([](RunConfig& c) -> double& { return c.analysis.chsh_min_counts; });
    t["analysis.chsh_map"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "subtracted") {
        c.analysis.chsh_subtracted = true;
      } else if (v == "raw") {
        c.analysis.chsh_subtracted = false;
      } else {
        bad_value(k, v, "'raw' or 'subtracted'");
      }
    };
    return t;
  }();
  return table;
}

RunConfig preset(const std::string& name) {
  if (name == "paper") return default_config();
  if (name == "reproduce-paper") return reproduce_paper_config();
  throw Error(ErrorCode::config, fmt::format("defaults: unknown preset '{}'", name));
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::config, fmt::format("unknown key '{}'", key));
  it->second(cfg, key, trim(value));
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.awg.d = 30e-6;
  c.awg.f = 1.75e-3;
  c.awg.delta_L = 63e-6;
  c.awg.n_s = 1.45;
  c.awg.n_a = 1.45;  // replaced by calibration while calibrate_n_a is set
  c.awg.lambda0 = 1560.6e-9;
  c.awg.array_count = 100;
  c.awg.grating_order = 53;
  c.awg.insertion_loss_db = -6.7;
  c.target_spacing_hz = 200e9;
  c.calibrate_n_a = true;

  c.pump.center_frequency = kSpeedOfLight / c.awg.lambda0;
  c.pump.repetition_rate = 100e6;
  c.pump.pulse_width = 200e-12;
  c.pump.bandwidth_fwhm = 2.2e9;
  c.pump.per_source_pair_probability = {0.005};
  c.pump.leakage_rejection_db = -35.0;
  return c;
}

RunConfig reproduce_paper_config() {
  RunConfig c = default_config();
  c.preset = "reproduce-paper";
  c.duration_s = 600.0;
  c.pump.per_source_pair_probability = {0.05};
  c.drift.record_interval = 0.01;
  c.drift.step_std = deg_to_rad(3.0);
  c.analysis.retrieval.fine_bin = deg_to_rad(15.0);
  c.passband.signal_offset_hz = {0.0, 10e9};
  c.passband.idler_offset_hz = {0.0, -10e9};
  c.polarization_visibility = 0.82;
  c.offset_s = deg_to_rad(30.0);
  c.offset_i = deg_to_rad(-20.0);
  c.seed = 2024;
  return c;
}

AwgDesign RunConfig::resolved_awg() const {
  return calibrate_n_a ? calibrate_array_index(awg, target_spacing_hz) : awg;
}

void RunConfig::validate() const {
  const auto design = resolved_awg();
  design.validate();
  if (n_sources < 1) throw Error(ErrorCode::config, "ports.n_sources must be >= 1");
  if (channel_offset < 1) throw Error(ErrorCode::config, "ports.channel_offset must be >= 1");
  plan_ports(design, n_sources, channel_offset);
  const auto spacing = channel_spacing(design).delta_nu;
  if (!(passband.fwhm_hz > 0.0 && passband.fwhm_hz < spacing)) {
    throw Error(ErrorCode::model_validity,
                fmt::format("awg.fwhm_ghz: {:.3f} GHz must be positive and below the channel "
                            "spacing {:.3f} GHz",
                            passband.fwhm_hz * 1e-9, spacing * 1e-9));
  }
  if (!(passband.grid_step_hz > 0.0)) throw Error(ErrorCode::config, "awg.grid_step_ghz must be positive");
  const auto n = static_cast<std::size_t>(n_sources);
  if (!passband.signal_offset_hz.empty() && passband.signal_offset_hz.size() != n) {
    throw Error(ErrorCode::config,
                fmt::format("awg.port_offset_errors_ghz: need {} signal,idler pairs", n));
  }
  const auto& mu = pump.per_source_pair_probability;
  if (mu.size() != 1 && mu.size() != n) {
    throw Error(ErrorCode::config, fmt::format("pump.mu_per_source: need 1 or {} values", n));
  }
  PumpSpec p = pump;
  p.validate();
  detectors.validate();
  losses.validate();
  drift.validate();
  if (!(leakage_background >= 0.0 && leakage_background < 1.0)) {
    throw Error(ErrorCode::config, "pump.leakage_background must lie in [0, 1)");
  }
  if (!(polarization_visibility >= 0.0 && polarization_visibility <= 1.0)) {
    throw Error(ErrorCode::config, "drift.polarization_visibility must lie in [0, 1]");
  }
  const double total = mu.size() == 1 ? mu[0] * static_cast<double>(n) : p.total_mu();
  if (!(total < 0.5)) throw Error(ErrorCode::config, "pump.mu_per_source: total must be < 0.5");
  if (!(duration_s >= drift.record_interval)) {
    throw Error(ErrorCode::config, "run.duration_s must be at least drift.record_s");
  }
  if (threads < 1) throw Error(ErrorCode::config, "run.threads must be >= 1");
  const auto& r = analysis.retrieval;
  if (!(r.fine_bin > 0.0 && r.coarse_bin > 0.0 && r.coarse_bin < kPi)) {
    throw Error(ErrorCode::config, "analysis bin sizes must be positive and the coarse bin < 180 deg");
  }
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::config, fmt::format("override '{}' is not section.key=value", text));
  }
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

RunConfig apply_overrides(RunConfig cfg, const Overrides& overrides) {
  for (const auto& [k, v] : overrides) set_key(cfg, k, v);
  return cfg;
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config, fmt::format("config line {}: {}", e.line(), e.message()));
  }
  std::string preset_name = "paper";
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      if (name != "defaults") throw Error(ErrorCode::config, fmt::format("unknown key '{}'", name));
      preset_name = trim(node.data());
    }
  }
  RunConfig cfg = preset(preset_name);
  for (const auto& [section, node] : tree) {
    if (node.empty()) continue;
    for (const auto& [key, value] : node) {
      set_key(cfg, section + "." + key, value.data());
    }
  }
  cfg = apply_overrides(std::move(cfg), overrides);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

DevicePipeline build_pipeline(const RunConfig& cfg) {
  cfg.validate();
  DevicePipeline p;
  p.design = cfg.resolved_awg();
  p.spacing = channel_spacing(p.design);
  p.ports = plan_ports(p.design, cfg.n_sources, cfg.channel_offset);
  std::vector<const TransmissionSpectrum*> all;
  for (int j = 0; j < cfg.n_sources; ++j) {
    p.signal_spectra.push_back(port_transmission(p.design, p.ports, j, PhotonRole::signal, cfg.passband));
    p.idler_spectra.push_back(port_transmission(p.design, p.ports, j, PhotonRole::idler, cfg.passband));
  }
  for (int j = 0; j < cfg.n_sources; ++j) {
    all.push_back(&p.signal_spectra[j]);
    all.push_back(&p.idler_spectra[j]);
  }
  const auto window = support_window(all);
  PumpSpec pump = cfg.pump;
  if (pump.per_source_pair_probability.size() == 1) {
    pump.per_source_pair_probability.assign(static_cast<std::size_t>(cfg.n_sources),
                                            pump.per_source_pair_probability[0]);
  }
  for (int j = 0; j < cfg.n_sources; ++j) {
    p.jsas.push_back(build_jsa_quasi_cw(p.signal_spectra[j], p.idler_spectra[j], pump, window));
  }
  auto amplitudes = collection_amplitudes(p.jsas);
  if (pump.total_mu() > 0.0) {
    for (std::size_t j = 0; j < amplitudes.size(); ++j) amplitudes[j] *= std::sqrt(pump.mu(j));
  }
  const std::vector<double> phases(static_cast<std::size_t>(cfg.n_sources), 0.0);
  p.state = build_state(p.jsas, phases, amplitudes);
  return p;
}

ExperimentSetup make_setup(const RunConfig& cfg, const PathState& state) {
  if (cfg.n_sources != 2) {
    throw Error(ErrorCode::config, "ports.n_sources: the projection experiment needs exactly 2 sources");
  }
  ExperimentSetup s;
  s.projection = CoincidenceModel::from_state(state);
  const auto& mu = cfg.pump.per_source_pair_probability;
  s.mu_total = mu.size() == 1 ? mu[0] * cfg.n_sources : cfg.pump.total_mu();
  s.losses = cfg.losses;
  s.detectors = cfg.detectors;
  s.leakage_probability = cfg.leakage_background;
  s.offset_s = cfg.offset_s;
  s.offset_i = cfg.offset_i;
  s.polarization_visibility = cfg.polarization_visibility;
  s.retrieval = cfg.analysis.retrieval;
  s.branch = cfg.branch;
  return s;
}

}  // namespace awgent
