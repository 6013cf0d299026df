#pragma once

// INI-style run configuration. Every physical parameter defaults to the
// published device and experiment values.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "awgent/analysis.hpp"
#include "awgent/awg_optics.hpp"
#include "awgent/entangled_state.hpp"
#include "awgent/experiment_sim.hpp"
#include "awgent/pair_source.hpp"

namespace awgent {

struct AnalysisOptions {
  RetrievalSpec retrieval;
  std::vector<double> slices_deg{51.0, 141.0};
  bool chsh_subtracted = true;
  double chsh_min_counts = 10.0;
};

struct RunConfig {
  std::string preset = "paper";

  AwgDesign awg;
  double target_spacing_hz = 200e9;  // used when n_a is "auto"
  bool calibrate_n_a = true;
  PassbandModel passband;

  int n_sources = 2;
  int channel_offset = 3;

  PumpSpec pump;
  double leakage_background = 0.0;  // per-gate background click probability

  DetectorSpec detectors;
  LossBudget losses = LossBudget::paper();
  DriftModel drift;
  double offset_s = 0.0;  // rad
  double offset_i = 0.0;
  double polarization_visibility = 1.0;
  BranchReference branch = BranchReference::quadrature;

  double duration_s = 86400.0;
  std::uint64_t seed = 1;
  int threads = 1;

  AnalysisOptions analysis;

  // The AWG design after optional n_a calibration.
  AwgDesign resolved_awg() const;
  void validate() const;
};

// Section.key -> value overrides, e.g. {"run.seed", "7"}.
using Overrides = std::map<std::string, std::string>;

RunConfig default_config();
// Preset for the ten-minute reproduction of the published analysis.
RunConfig reproduce_paper_config();

RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::string& path, const Overrides& overrides = {});
RunConfig apply_overrides(RunConfig cfg, const Overrides& overrides);
// Parses "section.key=value".
std::pair<std::string, std::string> parse_override(const std::string& text);

// Everything the simulator and reports need, derived from a config.
struct DevicePipeline {
  AwgDesign design;
  ChannelSpacing spacing;
  PortAssignment ports;
  std::vector<TransmissionSpectrum> signal_spectra;
  std::vector<TransmissionSpectrum> idler_spectra;
  std::vector<JointSpectralAmplitude> jsas;
  PathState state;
};

DevicePipeline build_pipeline(const RunConfig& cfg);
ExperimentSetup make_setup(const RunConfig& cfg, const PathState& state);

}  // namespace awgent
