#pragma once

// Monte Carlo model of the coincidence experiment: losses, gated detectors
// with dark counts and dead time, accidentals, interferometer phase drift,
// pump-leakage phase retrieval and the fixed record cadence.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "awgent/constants.hpp"
#include "awgent/entangled_state.hpp"

namespace awgent {

struct DetectorSpec {
  double efficiency = 0.21;
  double gate_width = 1.0e-9;        // s
  double dark_count_rate = 2.1e3;    // Hz
  double dead_time = 10.0e-6;        // s
  double gate_rate = 100.0e6;        // Hz

  void validate() const;
  double dark_probability() const { return dark_count_rate * gate_width; }
  // Gates blanked after each click.
  std::int64_t blanking_gates() const;
};

struct LossItem {
  std::string name;
  double db = 0.0;
};

struct LossBudget {
  double collection_db = -17.5;
  std::vector<LossItem> components;

  static LossBudget paper();
  void validate() const;
  double components_db() const;
  // Power transmission of the collection path, excluding the detector.
  double transmission() const { return db_to_intensity(collection_db); }
};

struct DriftModel {
  double step_std = deg_to_rad(2.0);  // rad per record, per interferometer
  double record_interval = 0.2;       // s
  double fast_noise_std = 0.0;        // rad, intra-record jitter per interferometer
  double intensity_noise_std = 0.0;   // normalized leak-intensity noise

  void validate() const;
};

struct GateProbabilities {
  double p_single_s = 0.0;
  double p_single_i = 0.0;
  double p_true_coinc = 0.0;  // phase-averaged
  double p_dark = 0.0;
  double t_s = 0.0;           // per-photon detection probability
  double t_i = 0.0;
};

// First-order per-gate click probabilities for a total pair probability mu.
GateProbabilities per_gate_probabilities(double mu, const LossBudget& losses,
                                         const DetectorSpec& det,
                                         double leakage_probability = 0.0);

double accidental_probability(double p_single_s, double p_single_i);

// Fraction of gates a detector is armed when it clicks with probability p and
// is blanked for k gates after each click.
double dead_time_availability(double p_click, std::int64_t blanking_gates);

struct RetrievalSpec {
  double fine_bin = deg_to_rad(3.0);
  double coarse_bin = deg_to_rad(45.0);
  // |dI/dphi| below this marks the flat region; the default makes the flat
  // region the 45 deg windows centred on 0 and 180 deg.
  double slope_threshold = 0.5 * std::sin(deg_to_rad(22.5));

  double bin_size_for(double phi) const;
  bool is_flat(double phi) const;
};

struct PhaseEstimate {
  double phi = 0.0;       // [0, 2pi)
  double bin_size = 0.0;  // rad
  bool flat_region = false;
  double sigma = 0.0;     // noise-propagated phase error (rad), capped at pi
};

// Inverts I = (1 + cos phi)/2; the arccos branch is the one closer to
// previous_phase.
PhaseEstimate retrieve_phase(double leak_intensity, double previous_phase, double noise_std,
                             const RetrievalSpec& spec = {});

// P(theta) = mean + Re(e^{i theta} interference), theta = phi_s + phi_i.
struct CoincidenceModel {
  double mean = 0.25;
  std::complex<double> interference{0.25, 0.0};

  static CoincidenceModel from_state(const PathState& state);
  double at(double theta) const { return mean + (std::polar(1.0, theta) * interference).real(); }
};

enum class BranchReference { quadrature, previous_estimate };

struct ExperimentSetup {
  CoincidenceModel projection;
  double mu_total = 0.02;
  LossBudget losses = LossBudget::paper();
  DetectorSpec detectors;
  double leakage_probability = 0.0;
  double offset_s = 0.0;  // phi_A = phi_s + offset_s
  double offset_i = 0.0;
  double polarization_visibility = 1.0;
  RetrievalSpec retrieval;
  BranchReference branch = BranchReference::quadrature;
  std::optional<double> initial_phi_s;  // random when unset
  std::optional<double> initial_phi_i;

  void validate() const;
};

struct CoincidenceRecord {
  double timestamp = 0.0;
  double phi_A_est = 0.0;
  double phi_B_est = 0.0;
  double phi_bin_size_A = 0.0;
  double phi_bin_size_B = 0.0;
  std::int64_t singles_1 = 0;
  std::int64_t singles_2 = 0;
  std::int64_t coincidences = 0;
  double accidental_estimate = 0.0;
  bool discarded = false;
};

struct RunSummary {
  std::int64_t records = 0;
  std::int64_t gates_per_record = 0;
  std::int64_t discarded = 0;
  double total_gates = 0.0;
  double singles_rate_1 = 0.0;  // Hz
  double singles_rate_2 = 0.0;
  double coincidence_rate = 0.0;
};

struct RunResult {
  std::vector<CoincidenceRecord> records;
  std::int64_t gates_per_record = 0;
  double gate_rate = 0.0;
  std::uint64_t seed = 0;

  RunSummary summary() const;
};

// Deterministic in (setup, drift, duration, seed); the record stream does not
// depend on `threads`.
RunResult simulate_run(const ExperimentSetup& setup, const DriftModel& drift, double duration,
                       std::uint64_t seed, int threads = 1);

std::int64_t record_count(const DriftModel& drift, double duration);

// Gate-by-gate Monte Carlo at a fixed phase sum, for checking the per-record
// rate model.
struct GateCounts {
  std::int64_t gates = 0;
  std::int64_t singles_s = 0;
  std::int64_t singles_i = 0;
  std::int64_t coincidences = 0;
};

GateCounts simulate_gates(const ExperimentSetup& setup, double theta, std::int64_t n_gates,
                          std::uint64_t seed);

// Per-gate coincidence probability at phase sum theta (before dead time).
double true_coincidence_probability(const ExperimentSetup& setup, double theta);

// Deterministic substream seeding shared by the simulators.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t lane);

// CSV: t_s,phi_a_deg,phi_b_deg,bin_a_deg,bin_b_deg,singles1,singles2,coinc,acc_est,discarded
// preceded by '#' metadata lines (seed, gates_per_record, gate_rate_hz).
void write_records_csv(std::ostream& os, const RunResult& run);
RunResult read_records_csv(std::istream& is);

}  // namespace awgent
