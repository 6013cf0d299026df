#include "awgent/experiment_sim.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "awgent/errors.hpp"

namespace awgent {

void DetectorSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::parameter, "detectors." + m); };
  if (!(efficiency > 0.0 && efficiency <= 1.0)) fail("efficiency must lie in (0, 1]");
  if (!(gate_width > 0.0)) fail("gate width must be positive");
  if (!(dark_count_rate >= 0.0)) fail("dark count rate must be >= 0");
  if (!(dead_time >= 0.0)) fail("dead time must be >= 0");
  if (!(gate_rate > 0.0)) fail("gate rate must be positive");
  if (!(dark_probability() < 1.0)) fail("dark probability per gate must be < 1");
}

std::int64_t DetectorSpec::blanking_gates() const {
  return static_cast<std::int64_t>(std::ceil(dead_time * gate_rate - 1e-9));
}

LossBudget LossBudget::paper() {
  return {-17.5,
          {{"facet coupling", -1.0},
           {"awg", -6.7},
           {"spectral filters", -2.8},
           {"other fiber components", -7.0}}};
}

double LossBudget::components_db() const {
  double s = 0.0;
  for (const auto& c : components) s += c.db;
  return s;
}

void LossBudget::validate() const {
  if (!(collection_db <= 0.0)) throw Error(ErrorCode::parameter, "losses.collection_db must be <= 0");
  for (const auto& c : components) {
    if (!(c.db <= 0.0)) {
      throw Error(ErrorCode::parameter, fmt::format("losses.{} must be <= 0 dB", c.name));
    }
  }
  if (!components.empty() && std::abs(components_db() - collection_db) > 0.3) {
    throw Error(ErrorCode::parameter,
                fmt::format("losses: itemized total {:.2f} dB differs from collection_db {:.2f} dB "
                            "by more than 0.3 dB",
                            components_db(), collection_db));
  }
}

void DriftModel::validate() const {
  if (!(step_std >= 0.0)) throw Error(ErrorCode::parameter, "drift.step must be >= 0");
  if (!(record_interval > 0.0)) throw Error(ErrorCode::parameter, "drift.record_interval must be > 0");
  if (!(fast_noise_std >= 0.0)) throw Error(ErrorCode::parameter, "drift.fast_noise must be >= 0");
  if (!(intensity_noise_std >= 0.0)) throw Error(ErrorCode::parameter, "drift.intensity_noise must be >= 0");
}

GateProbabilities per_gate_probabilities(double mu, const LossBudget& losses,
                                         const DetectorSpec& det, double leakage_probability) {
  if (!(mu >= 0.0 && mu < 0.5)) {
    throw Error(ErrorCode::parameter, "pair probability per gate must lie in [0, 0.5)");
  }
  losses.validate();
  det.validate();
  if (!(leakage_probability >= 0.0 && leakage_probability < 1.0)) {
    throw Error(ErrorCode::parameter, "leakage probability must lie in [0, 1)");
  }
  GateProbabilities p;
  p.t_s = losses.transmission() * det.efficiency;
  p.t_i = p.t_s;
  p.p_dark = det.dark_probability();
  p.p_single_s = mu * p.t_s + p.p_dark + leakage_probability;
  p.p_single_i = mu * p.t_i + p.p_dark + leakage_probability;
  p.p_true_coinc = mu * p.t_s * p.t_i;
  if (p.p_single_s > 1.0 || p.p_single_i > 1.0) {
    throw Error(ErrorCode::parameter, "per-gate click probability exceeds 1");
  }
  return p;
}

double accidental_probability(double p_single_s, double p_single_i) {
  return p_single_s * p_single_i;
}

double dead_time_availability(double p_click, std::int64_t blanking_gates) {
  return 1.0 / (1.0 + static_cast<double>(blanking_gates) * p_click);
}

double RetrievalSpec::bin_size_for(double phi) const { return is_flat(phi) ? coarse_bin : fine_bin; }

bool RetrievalSpec::is_flat(double phi) const {
  return 0.5 * std::abs(std::sin(phi)) < slope_threshold - 1e-12;
}

PhaseEstimate retrieve_phase(double leak_intensity, double previous_phase, double noise_std,
                             const RetrievalSpec& spec) {
  if (!(leak_intensity >= 0.0 && leak_intensity <= 1.0)) {
    throw Error(ErrorCode::calibration,
                fmt::format("leak intensity {} outside [0, 1] after calibration", leak_intensity));
  }
  const double a = std::acos(std::clamp(2.0 * leak_intensity - 1.0, -1.0, 1.0));
  const double b = wrap_phase(kTwoPi - a);
  const double phi =
      std::abs(phase_difference(a, previous_phase)) <= std::abs(phase_difference(b, previous_phase)) ? a : b;
  PhaseEstimate est;
  est.phi = wrap_phase(phi);
  est.flat_region = spec.is_flat(est.phi);
  est.bin_size = est.flat_region ? spec.coarse_bin : spec.fine_bin;
  const double slope = 0.5 * std::abs(std::sin(est.phi));
  est.sigma = slope > 0.0 ? std::min(kPi, noise_std / slope) : (noise_std > 0.0 ? kPi : 0.0);
  return est;
}

CoincidenceModel CoincidenceModel::from_state(const PathState& state) {
  const auto fp = fringe_from_overlap(state);
  return {fp.c0, -fp.c0 * fp.v * std::polar(1.0, fp.delta_phi)};
}

void ExperimentSetup::validate() const {
  if (!(mu_total >= 0.0 && mu_total < 0.5)) {
    throw Error(ErrorCode::parameter, "total pair probability per gate must lie in [0, 0.5)");
  }
  losses.validate();
  detectors.validate();
  if (!(polarization_visibility >= 0.0 && polarization_visibility <= 1.0)) {
    throw Error(ErrorCode::parameter, "polarization visibility factor must lie in [0, 1]");
  }
  if (!(leakage_probability >= 0.0 && leakage_probability < 1.0)) {
    throw Error(ErrorCode::parameter, "leakage probability must lie in [0, 1)");
  }
  const double t = losses.transmission() * detectors.efficiency;
  if (2.0 * t > 1.0) {
    throw Error(ErrorCode::parameter, "collection path transmits more than the coupler allows");
  }
  if (!(projection.mean >= 0.0) || std::abs(projection.interference) > projection.mean + 1e-12) {
    throw Error(ErrorCode::parameter, "projection model is not a valid probability fringe");
  }
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t lane) {
  // splitmix64 over a mixed key
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ index) ^ (lane * 0xd1b54a32d192ed03ULL));
}

namespace {

using Rng = std::mt19937_64;

double projection_probability(const ExperimentSetup& setup, double theta, double damping) {
  const double interference =
      (std::polar(1.0, theta) * setup.projection.interference).real();
  return setup.projection.mean + setup.polarization_visibility * damping * interference;
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

constexpr std::uint64_t kLaneSteps = 0, kLaneCounts = 1, kLaneLeak = 2, kLaneInit = 3;

}  // namespace

double true_coincidence_probability(const ExperimentSetup& setup, double theta) {
  const auto p = per_gate_probabilities(setup.mu_total, setup.losses, setup.detectors,
                                        setup.leakage_probability);
  return 4.0 * p.p_true_coinc * projection_probability(setup, theta, 1.0);
}

std::int64_t record_count(const DriftModel& drift, double duration) {
  drift.validate();
  if (!(duration >= drift.record_interval)) {
    throw Error(ErrorCode::parameter, "run duration must be at least one record interval");
  }
  return static_cast<std::int64_t>(std::floor(duration / drift.record_interval + 1e-9));
}

RunResult simulate_run(const ExperimentSetup& setup, const DriftModel& drift, double duration,
                       std::uint64_t seed, int threads) {
  setup.validate();
  const std::int64_t n_records = record_count(drift, duration);
  const auto probs = per_gate_probabilities(setup.mu_total, setup.losses, setup.detectors,
                                            setup.leakage_probability);
  const auto n_gates =
      static_cast<std::int64_t>(std::llround(setup.detectors.gate_rate * drift.record_interval));
  const auto n = static_cast<double>(n_gates);
  const auto blank = setup.detectors.blanking_gates();
  const double avail_s = dead_time_availability(probs.p_single_s, blank);
  const double avail_i = dead_time_availability(probs.p_single_i, blank);
  const double p_acc = accidental_probability(probs.p_single_s, probs.p_single_i);
  const double fast_damping = std::exp(-drift.fast_noise_std * drift.fast_noise_std);

  // Random-walk increments per record and leak-intensity noise per retrieval.
  std::vector<double> step_s(n_records), step_i(n_records);
  parallel_for(n_records, threads, [&](std::int64_t r) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(r), kLaneSteps));
    std::normal_distribution<double> gauss(0.0, 1.0);
    step_s[r] = drift.step_std * gauss(rng);
    step_i[r] = drift.step_std * gauss(rng);
  });
  std::vector<double> noise_A(n_records + 1), noise_B(n_records + 1);
  parallel_for(n_records + 1, threads, [&](std::int64_t b) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(b), kLaneLeak));
    std::normal_distribution<double> gauss(0.0, 1.0);
    noise_A[b] = drift.intensity_noise_std * gauss(rng);
    noise_B[b] = drift.intensity_noise_std * gauss(rng);
  });

  // True phases at record boundaries, then sequential retrieval.
  std::vector<double> phi_s(n_records + 1), phi_i(n_records + 1);
  {
    Rng rng(substream_seed(seed, 0, kLaneInit));
    std::uniform_real_distribution<double> uni(0.0, kTwoPi);
    const double u_s = uni(rng), u_i = uni(rng);
    phi_s[0] = setup.initial_phi_s.value_or(u_s);
    phi_i[0] = setup.initial_phi_i.value_or(u_i);
  }
  for (std::int64_t r = 0; r < n_records; ++r) {
    phi_s[r + 1] = phi_s[r] + step_s[r];
    phi_i[r + 1] = phi_i[r] + step_i[r];
  }
  std::vector<double> est_A(n_records + 1), est_B(n_records + 1);
  for (std::int64_t b = 0; b <= n_records; ++b) {
    const double true_A = wrap_phase(phi_s[b] + setup.offset_s);
    const double true_B = wrap_phase(phi_i[b] + setup.offset_i);
    const double I_A = std::clamp(0.5 * (1.0 + std::cos(true_A)) + noise_A[b], 0.0, 1.0);
    const double I_B = std::clamp(0.5 * (1.0 + std::cos(true_B)) + noise_B[b], 0.0, 1.0);
    const bool quadrature = setup.branch == BranchReference::quadrature || b == 0;
    const double ref_A = quadrature ? true_A : est_A[b - 1];
    const double ref_B = quadrature ? true_B : est_B[b - 1];
    est_A[b] = retrieve_phase(I_A, ref_A, drift.intensity_noise_std, setup.retrieval).phi;
    est_B[b] = retrieve_phase(I_B, ref_B, drift.intensity_noise_std, setup.retrieval).phi;
  }

  RunResult out;
  out.gates_per_record = n_gates;
  out.gate_rate = setup.detectors.gate_rate;
  out.seed = seed;
  out.records.resize(static_cast<std::size_t>(n_records));
  const double scale = 4.0 * probs.p_true_coinc;
  parallel_for(n_records, threads, [&](std::int64_t r) {
    auto& rec = out.records[static_cast<std::size_t>(r)];
    rec.timestamp = static_cast<double>(r) * drift.record_interval;

    const double theta0 = phi_s[r] + phi_i[r];
    const double theta1 = phi_s[r + 1] + phi_i[r + 1];
    // Mean of cos over a linear sweep from theta0 to theta1.
    const double damping = fast_damping * sinc(0.5 * (theta1 - theta0));
    const double p_true = scale * projection_probability(setup, 0.5 * (theta0 + theta1), damping);
    const double lambda_c = n * (p_true + p_acc) * avail_s * avail_i;

    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(r), kLaneCounts));
    auto poisson = [&rng](double mean) -> std::int64_t {
      if (!(mean > 0.0)) return 0;
      return std::poisson_distribution<std::int64_t>(mean)(rng);
    };
    rec.coincidences = poisson(lambda_c);
    rec.singles_1 = rec.coincidences + poisson(std::max(0.0, n * probs.p_single_s * avail_s - lambda_c));
    rec.singles_2 = rec.coincidences + poisson(std::max(0.0, n * probs.p_single_i * avail_i - lambda_c));
    rec.accidental_estimate =
        static_cast<double>(rec.singles_1) * static_cast<double>(rec.singles_2) / n;

    const double dA = phase_difference(est_A[r + 1], est_A[r]);
    const double dB = phase_difference(est_B[r + 1], est_B[r]);
    rec.phi_A_est = wrap_phase(est_A[r] + 0.5 * dA);
    rec.phi_B_est = wrap_phase(est_B[r] + 0.5 * dB);
    rec.phi_bin_size_A = setup.retrieval.bin_size_for(rec.phi_A_est);
    rec.phi_bin_size_B = setup.retrieval.bin_size_for(rec.phi_B_est);
    rec.discarded = std::abs(dA) > rec.phi_bin_size_A || std::abs(dB) > rec.phi_bin_size_B;
  });
  return out;
}

RunSummary RunResult::summary() const {
  RunSummary s;
  s.records = static_cast<std::int64_t>(records.size());
  s.gates_per_record = gates_per_record;
  s.total_gates = static_cast<double>(gates_per_record) * static_cast<double>(records.size());
  double s1 = 0, s2 = 0, c = 0;
  for (const auto& r : records) {
    s1 += static_cast<double>(r.singles_1);
    s2 += static_cast<double>(r.singles_2);
    c += static_cast<double>(r.coincidences);
    if (r.discarded) ++s.discarded;
  }
  const double seconds = gate_rate > 0.0 ? s.total_gates / gate_rate : 0.0;
  if (seconds > 0.0) {
    s.singles_rate_1 = s1 / seconds;
    s.singles_rate_2 = s2 / seconds;
    s.coincidence_rate = c / seconds;
  }
  return s;
}

GateCounts simulate_gates(const ExperimentSetup& setup, double theta, std::int64_t n_gates,
                          std::uint64_t seed) {
  setup.validate();
  const auto probs = per_gate_probabilities(setup.mu_total, setup.losses, setup.detectors,
                                            setup.leakage_probability);
  // The per-photon probability t includes the 3 dB of the projection coupler;
  // the port choice itself is drawn from the two-photon projection.
  const double tau_s = 2.0 * probs.t_s, tau_i = 2.0 * probs.t_i;
  const double p_both = projection_probability(setup, theta, 1.0);
  const auto blank = setup.detectors.blanking_gates();

  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::poisson_distribution<int> pairs(setup.mu_total);
  GateCounts out;
  out.gates = n_gates;
  std::int64_t dead_s = 0, dead_i = 0;
  for (std::int64_t g = 0; g < n_gates; ++g) {
    bool photon_s = false, photon_i = false;
    const int k = setup.mu_total > 0.0 ? pairs(rng) : 0;
    for (int p = 0; p < k; ++p) {
      const bool keep_s = uni(rng) < tau_s;
      const bool keep_i = uni(rng) < tau_i;
      if (keep_s && keep_i) {
        const double u = uni(rng);
        if (u < p_both) {
          photon_s = photon_i = true;
        } else if (u < 0.5) {
          photon_s = true;
        } else if (u < 1.0 - p_both) {
          photon_i = true;
        }
      } else if (keep_s) {
        photon_s = photon_s || uni(rng) < 0.5;
      } else if (keep_i) {
        photon_i = photon_i || uni(rng) < 0.5;
      }
    }
    const bool noise_s = uni(rng) < probs.p_dark || uni(rng) < setup.leakage_probability;
    const bool noise_i = uni(rng) < probs.p_dark || uni(rng) < setup.leakage_probability;
    bool click_s = false, click_i = false;
    if (dead_s > 0) {
      --dead_s;
    } else if (photon_s || noise_s) {
      click_s = true;
      dead_s = blank;
    }
    if (dead_i > 0) {
      --dead_i;
    } else if (photon_i || noise_i) {
      click_i = true;
      dead_i = blank;
    }
    out.singles_s += click_s;
    out.singles_i += click_i;
    out.coincidences += click_s && click_i;
  }
  return out;
}

void write_records_csv(std::ostream& os, const RunResult& run) {
  fmt::print(os, "# seed={}\n# gates_per_record={}\n# gate_rate_hz={:.17g}\n", run.seed,
             run.gates_per_record, run.gate_rate);
  os << "t_s,phi_a_deg,phi_b_deg,bin_a_deg,bin_b_deg,singles1,singles2,coinc,acc_est,discarded\n";
  for (const auto& r : run.records) {
    fmt::print(os, "{:.3f},{:.9f},{:.9f},{:.6g},{:.6g},{},{},{},{:.9g},{}\n", r.timestamp,
               rad_to_deg(r.phi_A_est), rad_to_deg(r.phi_B_est), rad_to_deg(r.phi_bin_size_A),
               rad_to_deg(r.phi_bin_size_B), r.singles_1, r.singles_2, r.coincidences,
               r.accidental_estimate, r.discarded ? 1 : 0);
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      value = std::stod(text, &used);
      return used == text.size() && std::isfinite(value);
    } catch (const std::exception&) {
      return false;
    }
  } else {
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end;
  }
}

}  // namespace

RunResult read_records_csv(std::istream& is) {
  constexpr std::string_view kHeader =
      "t_s,phi_a_deg,phi_b_deg,bin_a_deg,bin_b_deg,singles1,singles2,coinc,acc_est,discarded";
  RunResult run;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::size_t> bad;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const auto value = line.substr(eq + 1);
      if (key == "seed") parse_number(value, run.seed);
      if (key == "gates_per_record") parse_number(value, run.gates_per_record);
      if (key == "gate_rate_hz") parse_number(value, run.gate_rate);
      continue;
    }
    if (!header_seen) {
      if (line != kHeader) {
        throw Error(ErrorCode::config, fmt::format("line {}: unexpected header '{}'", line_no, line));
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    CoincidenceRecord r;
    double a = 0, b = 0, ba = 0, bb = 0;
    int disc = 0;
    const bool ok = f.size() == 10 && parse_number(f[0], r.timestamp) && parse_number(f[1], a) &&
                    parse_number(f[2], b) && parse_number(f[3], ba) && parse_number(f[4], bb) &&
                    parse_number(f[5], r.singles_1) && parse_number(f[6], r.singles_2) &&
                    parse_number(f[7], r.coincidences) &&
                    parse_number(f[8], r.accidental_estimate) && parse_number(f[9], disc) &&
                    (disc == 0 || disc == 1) && r.singles_1 >= 0 && r.singles_2 >= 0 &&
                    r.coincidences >= 0 && ba > 0 && bb > 0;
    if (!ok) {
      bad.push_back(line_no);
      continue;
    }
    r.phi_A_est = wrap_phase(deg_to_rad(a));
    r.phi_B_est = wrap_phase(deg_to_rad(b));
    r.phi_bin_size_A = deg_to_rad(ba);
    r.phi_bin_size_B = deg_to_rad(bb);
    r.discarded = disc == 1;
    run.records.push_back(r);
  }
  if (!bad.empty()) {
    std::string lines;
    for (std::size_t k = 0; k < bad.size() && k < 20; ++k) {
      lines += (k ? "," : "") + std::to_string(bad[k]);
    }
    if (bad.size() > 20) lines += ",...";
    throw Error(ErrorCode::config, fmt::format("malformed record rows at lines {}", lines));
  }
  if (!header_seen || run.records.empty()) {
    throw Error(ErrorCode::no_data, "records file contains no data rows");
  }
  return run;
}

}  // namespace awgent
