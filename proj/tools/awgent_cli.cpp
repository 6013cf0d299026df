// Command-line front end: design, spectra, simulate, analyze, reproduce-paper.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "awgent/analysis.hpp"
#include "awgent/config.hpp"
#include "awgent/errors.hpp"
#include "awgent/kernels.hpp"
#include "awgent/report.hpp"

namespace fs = std::filesystem;
using namespace awgent;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> duration;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "INI configuration file");
  cmd->add_option("--set", o.sets, "Override a key, e.g. --set run.seed=7")->take_all();
}

void add_run_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--threads", o.threads, "Worker threads");
  cmd->add_option("--duration", o.duration, "Run duration in seconds");
}

RunConfig resolve(const CommonOptions& o, RunConfig base) {
  Overrides ov;
  for (const auto& s : o.sets) ov.insert_or_assign(parse_override(s).first, parse_override(s).second);
  if (o.seed) ov["run.seed"] = std::to_string(*o.seed);
  if (o.threads) ov["run.threads"] = std::to_string(*o.threads);
  if (o.duration) ov["run.duration_s"] = fmt::format("{:.17g}", *o.duration);
  RunConfig cfg = o.config_path.empty() ? apply_overrides(std::move(base), ov)
                                        : load_config(o.config_path, ov);
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io, fmt::format("write to '{}' failed", path.string()));
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("awgent");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("AWGENT_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

int cmd_design(const CommonOptions& o, const std::string& json_path) {
  const auto cfg = resolve(o, default_config());
  const auto report = design_report(cfg);
  std::cout << design_text(report);
  if (!json_path.empty()) {
    auto out = open_out(json_path);
    out << report.dump(2) << '\n';
    finish(out, json_path);
  }
  return 0;
}

int cmd_spectra(const CommonOptions& o, const fs::path& dir, std::size_t stride) {
  const auto cfg = resolve(o, default_config());
  const auto p = build_pipeline(cfg);
  for (int j = 0; j < cfg.n_sources; ++j) {
    for (const auto& [name, spec] : {std::pair{"signal", &p.signal_spectra[j]}, {"idler", &p.idler_spectra[j]}}) {
      const auto path = dir / fmt::format("{}_{}.csv", name, j + 1);
      auto out = open_out(path);
      write_spectrum_csv(out, *spec);
      finish(out, path);
    }
    PumpSpec pump = cfg.pump;
    const auto jsi = build_jsi_pulsed(p.signal_spectra[j], p.idler_spectra[j], pump,
                                      support_window({&p.signal_spectra[j], &p.idler_spectra[j]}));
    const auto path = dir / fmt::format("jsi_{}.csv", j + 1);
    auto out = open_out(path);
    write_jsi_csv(out, jsi, stride);
    finish(out, path);
  }
  if (cfg.n_sources == 2) {
    auto fringe = fringe_from_overlap(p.state, cfg.offset_s, cfg.offset_i);
    nlohmann::json report = to_json(fringe);
    report["v_spectral_overlap"] =
        visibility_from_spectra(p.signal_spectra[0], p.idler_spectra[0], p.signal_spectra[1],
                                p.idler_spectra[1], cfg.pump.center_frequency);
    const auto path = dir / "visibility.json";
    auto out = open_out(path);
    out << report.dump(2) << '\n';
    finish(out, path);
    fmt::print("V = {:.6f} (overlap), {:.6f} (spectra)\n", fringe.v,
               report["v_spectral_overlap"].get<double>());
  }
  return 0;
}

RunResult run_simulation(const RunConfig& cfg) {
  const auto p = build_pipeline(cfg);
  const auto setup = make_setup(cfg, p.state);
  spdlog::info("simulating {:.0f} s with seed {} on {} thread(s), {} SIMD kernels", cfg.duration_s,
               cfg.seed, cfg.threads, kernels::to_string(kernels::active_isa()));
  const auto t0 = std::chrono::steady_clock::now();
  auto run = simulate_run(setup, cfg.drift, cfg.duration_s, cfg.seed, cfg.threads);
  spdlog::info("simulation took {:.2f} s",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return run;
}

void print_summary(const RunResult& run) {
  const auto s = run.summary();
  fmt::print("seed={} records={} discarded={} gates={:.0f} singles1={:.1f}/s singles2={:.1f}/s "
             "coincidences={:.3f}/s\n",
             run.seed, s.records, s.discarded, s.total_gates, s.singles_rate_1, s.singles_rate_2,
             s.coincidence_rate);
}

int cmd_simulate(const CommonOptions& o, const fs::path& out_path) {
  const auto cfg = resolve(o, default_config());
  const auto run = run_simulation(cfg);
  auto out = open_out(out_path);
  write_records_csv(out, run);
  finish(out, out_path);
  print_summary(run);
  return 0;
}

void write_analysis(const RunResult& run, const AnalysisOptions& opts, const fs::path& report_path,
                    const fs::path& map_path) {
  CoincidenceMap raw(AxisBinning::uniform(1), AxisBinning::uniform(1), 1.0);
  const auto outcome = analyze_run(run, opts, &raw);
  const auto report = analysis_report(outcome, run.seed);
  if (!report_path.empty()) {
    auto out = open_out(report_path);
    out << report.dump(2) << '\n';
    finish(out, report_path);
  }
  if (!map_path.empty()) {
    auto out = open_out(map_path);
    write_map_csv(out, raw);
    finish(out, map_path);
  }
  fmt::print("V_raw = {:.4f} +- {:.4f}   V_subtracted = {:.4f} +- {:.4f}\n", outcome.fit.v,
             outcome.fit.v_sigma, outcome.fit_subtracted.v, outcome.fit_subtracted.v_sigma);
  for (const auto& s : outcome.slices) {
    if (s.result) {
      fmt::print("slice phi_A = {:.0f} deg: V = {:.4f} +- {:.4f}\n", s.phi_A_deg, s.result->fit.v,
                 s.result->fit.v_sigma);
    } else {
      fmt::print("slice phi_A = {:.0f} deg: {}\n", s.phi_A_deg, s.error);
    }
  }
  if (outcome.chsh) {
    fmt::print("|S| = {:.3f} +- {:.3f}   CHSH violated: {}\n", outcome.chsh->s, outcome.chsh->s_sigma,
               outcome.flags.violates_chsh ? "yes" : "no");
  } else {
    fmt::print("CHSH: {}\n", outcome.chsh_error);
  }
}

int cmd_analyze(const CommonOptions& o, const fs::path& records, const fs::path& report_path,
                const fs::path& map_path) {
  const auto cfg = resolve(o, default_config());
  std::ifstream in(records);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot read '{}'", records.string()));
  const auto run = read_records_csv(in);
  write_analysis(run, cfg.analysis, report_path, map_path);
  return 0;
}

int cmd_reproduce(const CommonOptions& o, const fs::path& dir) {
  const auto cfg = resolve(o, reproduce_paper_config());
  const auto run = run_simulation(cfg);
  const auto records_path = dir / "records.csv";
  auto out = open_out(records_path);
  write_records_csv(out, run);
  finish(out, records_path);
  print_summary(run);
  write_analysis(run, cfg.analysis, dir / "report.json", dir / "map.csv");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"AWG path-entanglement source: design, simulation and analysis"};
  app.require_subcommand(1);

  CommonOptions design_o, spectra_o, sim_o, ana_o, rep_o;
  std::string design_json;
  auto* design = app.add_subcommand("design", "Channel spacing, dispersion and port table");
  add_common(design, design_o);
  design->add_option("--json", design_json, "Write the JSON report here");

  std::string spectra_dir = "spectra";
  std::size_t stride = 4;
  auto* spectra = app.add_subcommand("spectra", "Export port spectra, JSI and visibility");
  add_common(spectra, spectra_o);
  spectra->add_option("-o,--out-dir", spectra_dir, "Output directory");
  spectra->add_option("--jsi-stride", stride, "Write every n-th JSI grid point")->check(CLI::PositiveNumber);

  std::string sim_out = "records.csv";
  auto* simulate = app.add_subcommand("simulate", "Simulate the coincidence experiment");
  add_common(simulate, sim_o);
  add_run_options(simulate, sim_o);
  simulate->add_option("-o,--out", sim_out, "Records CSV");

  std::string records, report_path = "report.json", map_path = "map.csv";
  auto* analyze = app.add_subcommand("analyze", "Fit, slice and CHSH-scan a records file");
  add_common(analyze, ana_o);
  analyze->add_option("records", records, "Records CSV")->required();
  analyze->add_option("--report", report_path, "Report JSON");
  analyze->add_option("--map", map_path, "Map CSV");

  std::string rep_dir = "reproduce";
  auto* reproduce = app.add_subcommand("reproduce-paper", "Ten-minute reproduction of the published analysis");
  add_common(reproduce, rep_o);
  add_run_options(reproduce, rep_o);
  reproduce->add_option("-o,--out-dir", rep_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*design) return cmd_design(design_o, design_json);
    if (*spectra) return cmd_spectra(spectra_o, spectra_dir, stride);
    if (*simulate) return cmd_simulate(sim_o, sim_out);
    if (*analyze) return cmd_analyze(ana_o, records, report_path, map_path);
    if (*reproduce) return cmd_reproduce(rep_o, rep_dir);
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return e.code() == ErrorCode::io ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
