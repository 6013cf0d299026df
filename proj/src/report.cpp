#include "awgent/report.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <ostream>

#include "awgent/constants.hpp"
#include "awgent/errors.hpp"

namespace awgent {

using nlohmann::json;

AnalysisOutcome analyze_run(const RunResult& run, const AnalysisOptions& options,
                            CoincidenceMap* raw_map_out) {
  AnalysisOutcome out;
  out.records = static_cast<std::int64_t>(run.records.size());
  for (const auto& r : run.records) out.discarded += r.discarded ? 1 : 0;

  const auto raw = bin_records(run, options.retrieval);
  const auto sub = subtract_accidentals(raw);
  out.populated_bins = raw.populated_bins();
  out.fit = fit_fringe(raw);
  out.fit_subtracted = fit_fringe(sub);

  for (double phi : options.slices_deg) {
    SliceOutcome s;
    s.phi_A_deg = phi;
    try {
      s.result = slice_fringe(raw, phi);
    } catch (const Error& e) {
      s.error = e.what();
    }
    out.slices.push_back(std::move(s));
  }

  try {
    out.chsh = chsh_scan(options.chsh_subtracted ? sub : raw, options.chsh_min_counts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::coverage) throw;
    out.chsh_error = e.what();
  }
  const auto& v_fit = options.chsh_subtracted ? out.fit_subtracted : out.fit;
  if (out.chsh) {
    out.flags = bell_flags(*out.chsh, v_fit);
  } else {
    out.flags.exceeds_visibility_bound = v_fit.v > 1.0 / std::sqrt(2.0);
  }
  if (raw_map_out != nullptr) *raw_map_out = raw;
  return out;
}

json to_json(const FitResult& fit) {
  return {{"c0", fit.c0},
          {"c0_sigma", fit.c0_sigma},
          {"v", fit.v},
          {"v_sigma", fit.v_sigma},
          {"delta_phi_deg", rad_to_deg(fit.delta_phi)},
          {"delta_phi_sigma_deg", rad_to_deg(fit.delta_phi_sigma)},
          {"chi2", fit.chi2},
          {"dof", fit.dof},
          {"iterations", fit.iterations},
          {"accidentals_subtracted", fit.accidentals_subtracted},
          {"v_out_of_range", fit.v_out_of_range}};
}

json to_json(const ChshResult& chsh) {
  json settings = json::array();
  for (double s : chsh.settings) settings.push_back(rad_to_deg(s));
  return {{"s", chsh.s},
          {"s_sigma", chsh.s_sigma},
          {"settings_deg", settings},
          {"accidentals_subtracted", chsh.accidentals_subtracted}};
}

json to_json(const FringeParameters& fringe) {
  return {{"v", fringe.v}, {"c0", fringe.c0}, {"delta_phi_rad", fringe.delta_phi}, {"method", fringe.method}};
}

json analysis_report(const AnalysisOutcome& o, std::uint64_t seed) {
  json slices = json::array();
  for (const auto& s : o.slices) {
    json item{{"phi_a_deg", s.phi_A_deg}};
    if (s.result) {
      item["row_center_deg"] = rad_to_deg(s.result->phi_A);
      item["v"] = s.result->fit.v;
      item["v_sigma"] = s.result->fit.v_sigma;
      item["c0"] = s.result->fit.c0;
      item["bins"] = s.result->bins_used;
    } else {
      item["error"] = s.error;
    }
    slices.push_back(std::move(item));
  }
  json report{{"seed", seed},
              {"records", o.records},
              {"discarded", o.discarded},
              {"populated_bins", o.populated_bins},
              {"fit", to_json(o.fit)},
              {"fit_subtracted", to_json(o.fit_subtracted)},
              {"slices", slices},
              {"bell_violation", o.flags.violates_chsh},
              {"exceeds_bell_visibility_threshold", o.flags.exceeds_visibility_bound}};
  if (o.chsh) {
    report["chsh"] = to_json(*o.chsh);
  } else {
    report["chsh"] = json{{"error", o.chsh_error}};
  }
  return report;
}

json design_report(const RunConfig& cfg) {
  const auto design = cfg.resolved_awg();
  const auto spacing = channel_spacing(design);
  const double disp = spatial_dispersion(design);
  const auto ports = plan_ports(design, cfg.n_sources, cfg.channel_offset);
  const auto sens = spacing_sensitivity(design);

  json table = json::array();
  for (int j = 0; j < ports.n_sources; ++j) {
    const double dnu = ports.channel_offset * spacing.delta_nu;
    table.push_back({{"source", j + 1},
                     {"input", ports.input_ports[j]},
                     {"pump_focus", ports.pump_focus_ports[j]},
                     {"signal", ports.output_ports_signal[j]},
                     {"idler", ports.output_ports_idler[j]},
                     {"signal_detuning_ghz", dnu * 1e-9},
                     {"idler_detuning_ghz", -dnu * 1e-9}});
  }
  return {{"awg",
           {{"d_um", design.d * 1e6},
            {"f_mm", design.f * 1e3},
            {"delta_L_um", design.delta_L * 1e6},
            {"n_s", design.n_s},
            {"n_a", design.n_a},
            {"n_a_calibrated", cfg.calibrate_n_a},
            {"lambda0_nm", design.lambda0 * 1e9},
            {"array_count", design.array_count},
            {"grating_order", design.grating_order},
            {"insertion_loss_db", design.insertion_loss_db}}},
          {"channel_spacing",
           {{"delta_lambda_nm", spacing.delta_lambda * 1e9}, {"delta_nu_ghz", spacing.delta_nu * 1e-9}}},
          {"spatial_dispersion_um_per_nm", disp * 1e-3},
          {"dispersion_times_spacing_um", disp * spacing.delta_lambda * 1e6},
          {"passband", {{"model", to_string(cfg.passband.shape)}, {"fwhm_ghz", cfg.passband.fwhm_hz * 1e-9}}},
          {"ports", {{"n_sources", ports.n_sources}, {"channel_offset", ports.channel_offset}, {"table", table}}},
          {"sensitivities",
           {{"d", sens.d},
            {"f", sens.f},
            {"delta_L", sens.delta_L},
            {"n_s", sens.n_s},
            {"n_a", sens.n_a},
            {"lambda0", sens.lambda0}}},
          {"tolerance_n_a_1e-3", tolerance_propagation(design, 1e-3)}};
}

std::string design_text(const json& r) {
  std::string s;
  const auto& a = r["awg"];
  s += fmt::format("AWG  d={:.3f} um  f={:.4f} mm  dL={:.3f} um  n_s={:.4f}  n_a={:.6f}{}\n",
                   a["d_um"].get<double>(), a["f_mm"].get<double>(), a["delta_L_um"].get<double>(),
                   a["n_s"].get<double>(), a["n_a"].get<double>(),
                   a["n_a_calibrated"].get<bool>() ? " (calibrated)" : "");
  s += fmt::format("     lambda0={:.3f} nm  order={}  array={}  loss={:.2f} dB\n",
                   a["lambda0_nm"].get<double>(), a["grating_order"].get<int>(),
                   a["array_count"].get<int>(), a["insertion_loss_db"].get<double>());
  s += fmt::format("spacing  {:.5f} nm  {:.3f} GHz\n", r["channel_spacing"]["delta_lambda_nm"].get<double>(),
                   r["channel_spacing"]["delta_nu_ghz"].get<double>());
  s += fmt::format("dispersion  {:.4f} um/nm\n", r["spatial_dispersion_um_per_nm"].get<double>());
  s += fmt::format("ports  N={} m={}\n", r["ports"]["n_sources"].get<int>(),
                   r["ports"]["channel_offset"].get<int>());
  s += "  src  input  pump  signal(A)  idler(B)\n";
  for (const auto& row : r["ports"]["table"]) {
    s += fmt::format("  {:>3}  {:>5}  {:>4}  {:>9}  {:>8}\n", row["source"].get<int>(),
                     row["input"].get<int>(), row["pump_focus"].get<int>(), row["signal"].get<int>(),
                     row["idler"].get<int>());
  }
  s += fmt::format("d(ln dlambda)/d(ln n_a) = {:.1f};  dn_a/n_a = 1e-3 -> ddlambda/dlambda = {:.3g}\n",
                   r["sensitivities"]["n_a"].get<double>(), r["tolerance_n_a_1e-3"].get<double>());
  return s;
}

void write_spectrum_csv(std::ostream& os, const TransmissionSpectrum& spectrum) {
  os << "frequency_hz,amplitude_re,amplitude_im\n";
  for (std::size_t k = 0; k < spectrum.grid.count; ++k) {
    fmt::print(os, "{:.6f},{:.12g},{:.12g}\n", spectrum.grid.at(k), spectrum.amplitude[k].real(),
               spectrum.amplitude[k].imag());
  }
}

}  // namespace awgent
