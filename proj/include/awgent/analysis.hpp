#pragma once

// Coincidence map, fringe fitting, accidental subtraction, fringe slices and
// the CHSH scan.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "awgent/experiment_sim.hpp"

namespace awgent {

// Bin edges over one period. edges.front() may be negative; the last edge is
// edges.front() + 2pi.
class AxisBinning {
 public:
  explicit AxisBinning(std::vector<double> edges);

  // Coarse bins of width spec.coarse_bin centred on 0 and pi, fine bins
  // elsewhere.
  static AxisBinning from_retrieval(const RetrievalSpec& spec = {});
  static AxisBinning uniform(int count);

  int size() const { return static_cast<int>(edges_.size()) - 1; }
  int index_of(double phi) const;
  double center(int k) const;  // [0, 2pi)
  double width(int k) const { return edges_[k + 1] - edges_[k]; }
  double lower(int k) const { return edges_[k]; }
  // Bin containing center(k) + pi.
  int conjugate(int k) const { return index_of(center(k) + kPi); }
  const std::vector<double>& edges() const { return edges_; }

 private:
  std::vector<double> edges_;
};

struct CoincidenceBin {
  double counts = 0.0;
  double raw_counts = 0.0;    // before accidental subtraction
  double accidentals = 0.0;
  double exposure_gates = 0.0;
  std::int64_t records = 0;
  double phi_A = 0.0;         // mean record phase
  double phi_B = 0.0;
  // Exposure-weighted means of cos and sin of phi_A + phi_B; the fringe model
  // is linear in these.
  double mean_cos = 1.0;
  double mean_sin = 0.0;
  double sigma_phi_A = 0.0;
  double sigma_phi_B = 0.0;
  double sigma_count = 1.0;
};

class CoincidenceMap {
 public:
  CoincidenceMap(AxisBinning axis_A, AxisBinning axis_B, double gate_rate);

  const AxisBinning& axis_A() const { return axis_A_; }
  const AxisBinning& axis_B() const { return axis_B_; }
  double gate_rate() const { return gate_rate_; }
  bool accidentals_subtracted() const { return subtracted_; }
  void set_accidentals_subtracted(bool s) { subtracted_ = s; }

  CoincidenceBin& at(int i, int j) { return bins_[static_cast<std::size_t>(i * axis_B_.size() + j)]; }
  const CoincidenceBin& at(int i, int j) const {
    return bins_[static_cast<std::size_t>(i * axis_B_.size() + j)];
  }
  bool populated(int i, int j) const { return at(i, j).exposure_gates > 0.0; }
  double exposure_seconds(int i, int j) const { return at(i, j).exposure_gates / gate_rate_; }
  // Coincidences per second and its 1-sigma count error.
  double rate(int i, int j) const;
  double rate_sigma(int i, int j) const;
  std::int64_t populated_bins() const;
  double total_counts() const;

  // Fills every bin with the centre phases, sigma = width/sqrt(12), the given
  // exposure and counts = rate_fn(phi_A, phi_B) * exposure_seconds.
  template <typename F>
  static CoincidenceMap from_function(AxisBinning a, AxisBinning b, double gate_rate,
                                      double exposure_gates, F&& rate_fn);

 private:
  void init_bin(int i, int j, double exposure_gates);

  AxisBinning axis_A_;
  AxisBinning axis_B_;
  double gate_rate_;
  bool subtracted_ = false;
  std::vector<CoincidenceBin> bins_;
};

CoincidenceMap bin_records(const RunResult& run, const AxisBinning& axis_A, const AxisBinning& axis_B);
CoincidenceMap bin_records(const RunResult& run, const RetrievalSpec& spec = {});

// Counts reduced by the accidental estimate (floored at 0); the two Poisson
// terms combine in quadrature.
CoincidenceMap subtract_accidentals(const CoincidenceMap& map);

struct FitResult {
  double c0 = 0.0, c0_sigma = 0.0;
  double v = 0.0, v_sigma = 0.0;
  double delta_phi = 0.0, delta_phi_sigma = 0.0;  // rad, delta_phi in [0, 2pi)
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
  bool accidentals_subtracted = false;
  bool v_out_of_range = false;  // V outside [0, 1.05]
};

struct FitOptions {
  int max_iterations = 10;
  double tolerance = 1e-8;
  // Use the model for the Poisson variance after the first pass.
  bool model_variance = true;
};

// Weighted fit of C0 (1 - V cos(phi_A + phi_B + delta_phi)) with effective
// variance from count and phase errors.
FitResult fit_fringe(const CoincidenceMap& map, const FitOptions& options = {});

struct SliceResult {
  double phi_A = 0.0;  // centre of the selected row, rad
  int row = 0;
  int bins_used = 0;
  FitResult fit;
};

SliceResult slice_fringe(const CoincidenceMap& map, double phi_A_deg, const FitOptions& options = {});

struct ChshResult {
  double s = 0.0;
  double s_sigma = 0.0;
  // a, a', b, b' as bin centres (rad) and bin indices.
  std::array<double, 4> settings{};
  std::array<int, 4> bins{};
  bool accidentals_subtracted = false;
};

// E(a,b) from the four bins {a, a+pi} x {b, b+pi}; exhaustive scan of
// S = E(a,b) - E(a,b') + E(a',b) + E(a',b') over available bins, i.e.
// populated bins holding at least min_counts raw coincidences.
ChshResult chsh_scan(const CoincidenceMap& map, double min_counts = 0.0);

struct BellFlags {
  bool violates_chsh = false;           // |S| - 2 > 2 sigma_S
  bool exceeds_visibility_bound = false;  // V > 1/sqrt2
};

BellFlags bell_flags(const ChshResult& chsh, const FitResult& fit);

// Map export: phi_a_deg,phi_b_deg,rate_hz,sigma (populated bins only).
void write_map_csv(std::ostream& os, const CoincidenceMap& map);

template <typename F>
CoincidenceMap CoincidenceMap::from_function(AxisBinning a, AxisBinning b, double gate_rate,
                                             double exposure_gates, F&& rate_fn) {
  CoincidenceMap m(std::move(a), std::move(b), gate_rate);
  for (int i = 0; i < m.axis_A().size(); ++i) {
    for (int j = 0; j < m.axis_B().size(); ++j) {
      m.init_bin(i, j, exposure_gates);
      auto& bin = m.at(i, j);
      bin.counts = rate_fn(bin.phi_A, bin.phi_B) * m.exposure_seconds(i, j);
      bin.raw_counts = bin.counts;
      bin.sigma_count = std::max(std::sqrt(bin.counts), 1.0);
    }
  }
  return m;
}

}  // namespace awgent
