#pragma once

// JSON and CSV reports for the command-line front end.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "awgent/analysis.hpp"
#include "awgent/config.hpp"

namespace awgent {

struct SliceOutcome {
  double phi_A_deg = 0.0;
  std::optional<SliceResult> result;
  std::string error;
};

struct AnalysisOutcome {
  std::int64_t records = 0;
  std::int64_t discarded = 0;
  std::int64_t populated_bins = 0;
  FitResult fit;
  FitResult fit_subtracted;
  std::vector<SliceOutcome> slices;
  std::optional<ChshResult> chsh;
  std::string chsh_error;
  BellFlags flags;
};

// Bins, fits (raw and accidental-subtracted), slices the raw map and scans
// CHSH on the map selected by options.chsh_subtracted.
AnalysisOutcome analyze_run(const RunResult& run, const AnalysisOptions& options,
                            CoincidenceMap* raw_map_out = nullptr);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const ChshResult& chsh);
nlohmann::json to_json(const FringeParameters& fringe);
nlohmann::json analysis_report(const AnalysisOutcome& outcome, std::uint64_t seed);

nlohmann::json design_report(const RunConfig& cfg);
std::string design_text(const nlohmann::json& report);

// frequency_hz,amplitude_re,amplitude_im
void write_spectrum_csv(std::ostream& os, const TransmissionSpectrum& spectrum);

}  // namespace awgent
