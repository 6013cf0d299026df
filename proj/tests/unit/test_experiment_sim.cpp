#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "awgent/experiment_sim.hpp"
#include "fixtures.hpp"

using namespace awgent;
using fixtures::code_of;

namespace {

ExperimentSetup frozen_setup(double theta) {
  ExperimentSetup s;
  s.mu_total = 0.01;
  s.initial_phi_s = theta;
  s.initial_phi_i = 0.0;
  return s;
}

DriftModel still() {
  DriftModel d;
  d.step_std = 0.0;
  return d;
}

bool same_records(const RunResult& a, const RunResult& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    const auto& x = a.records[k];
    const auto& y = b.records[k];
    if (x.timestamp != y.timestamp || x.phi_A_est != y.phi_A_est || x.phi_B_est != y.phi_B_est ||
        x.singles_1 != y.singles_1 || x.singles_2 != y.singles_2 ||
        x.coincidences != y.coincidences || x.accidental_estimate != y.accidental_estimate ||
        x.discarded != y.discarded || x.phi_bin_size_A != y.phi_bin_size_A) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("experiment_sim") {
  TEST_CASE("published detector and loss arithmetic") {
    DetectorSpec det;
    CHECK(det.dark_probability() == doctest::Approx(2.1e-6).epsilon(1e-12));
    CHECK(det.blanking_gates() == 1000);
    const auto p = per_gate_probabilities(0.01, LossBudget::paper(), det);
    // 0.01 * 10^(-1.75) * 0.21
    CHECK(p.p_single_s - p.p_dark == doctest::Approx(3.7345e-5).epsilon(1e-4));
    CHECK(p.t_s == doctest::Approx(std::pow(10.0, -1.75) * 0.21).epsilon(1e-14));
    CHECK(p.p_true_coinc == doctest::Approx(0.01 * p.t_s * p.t_i).epsilon(1e-14));
    CHECK(LossBudget::paper().components_db() == doctest::Approx(-17.5));
  }

  TEST_CASE("source-off limit") {
    const auto p = per_gate_probabilities(0.0, LossBudget::paper(), DetectorSpec{}, 1e-6);
    CHECK(p.p_true_coinc == 0.0);
    CHECK(p.p_single_s == doctest::Approx(2.1e-6 + 1e-6).epsilon(1e-12));
    CHECK(accidental_probability(0.0, 0.3) == 0.0);
    CHECK(accidental_probability(1e-4, 1e-4) == doctest::Approx(1e-8).epsilon(1e-12));
  }

  TEST_CASE("parameter validation") {
    DetectorSpec det;
    det.efficiency = 0.0;
    CHECK(code_of([&] { det.validate(); }) == ErrorCode::parameter);
    LossBudget lb = LossBudget::paper();
    lb.collection_db = -18.0;
    CHECK(code_of([&] { lb.validate(); }) == ErrorCode::parameter);
    lb.collection_db = -17.7;
    CHECK_NOTHROW(lb.validate());
    CHECK(code_of([&] { per_gate_probabilities(0.5, LossBudget::paper(), DetectorSpec{}); }) ==
          ErrorCode::parameter);
    DriftModel d;
    d.step_std = -1.0;
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::parameter);
    auto s = frozen_setup(0.0);
    s.polarization_visibility = 1.5;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::parameter);
  }

  TEST_CASE("dead-time availability") {
    CHECK(dead_time_availability(0.0, 1000) == 1.0);
    CHECK(dead_time_availability(1e-3, 1000) == doctest::Approx(0.5));
    CHECK(dead_time_availability(1e-3, 0) == 1.0);
  }

  TEST_CASE("phase retrieval branches and bins") {
    const RetrievalSpec spec;
    auto e = retrieve_phase(1.0, 0.0, 0.0, spec);
    CHECK(e.phi == doctest::Approx(0.0));
    CHECK(e.flat_region);
    CHECK(e.bin_size == doctest::Approx(deg_to_rad(45.0)));
    e = retrieve_phase(0.5, deg_to_rad(80.0), 0.0, spec);
    CHECK(rad_to_deg(e.phi) == doctest::Approx(90.0));
    CHECK_FALSE(e.flat_region);
    CHECK(e.bin_size == doctest::Approx(deg_to_rad(3.0)));
    e = retrieve_phase(0.5, deg_to_rad(280.0), 0.0, spec);
    CHECK(rad_to_deg(e.phi) == doctest::Approx(270.0));
    CHECK(retrieve_phase(0.0, 3.0, 0.0, spec).flat_region);
    CHECK(code_of([&] { retrieve_phase(1.2, 0.0, 0.0, spec); }) == ErrorCode::calibration);
    // flat region boundary at 22.5 deg from 0 and pi
    CHECK(spec.is_flat(deg_to_rad(20.0)));
    CHECK_FALSE(spec.is_flat(deg_to_rad(25.0)));
    CHECK(spec.is_flat(deg_to_rad(170.0)));
  }

  TEST_CASE("retrieval noise propagates through the slope") {
    const double sigma_I = 0.01, phi0 = kPi / 2;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, sigma_I);
    const int n = 20000;
    double s2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double I = 0.5 * (1.0 + std::cos(phi0)) + g(rng);
      const auto e = retrieve_phase(I, phi0, sigma_I);
      s2 += std::pow(phase_difference(e.phi, phi0), 2);
    }
    const double measured = std::sqrt(s2 / n);
    const double expected = sigma_I / 0.5;  // |dphi/dI| = 2 at quadrature
    CHECK(std::abs(measured - expected) < 3.0 * expected / std::sqrt(2.0 * n));
    CHECK(retrieve_phase(0.5, phi0, sigma_I).sigma == doctest::Approx(expected));
  }

  TEST_CASE("record cadence") {
    DriftModel d;
    CHECK(record_count(d, 86400.0) == 432000);
    CHECK(code_of([&] { record_count(d, 0.1); }) == ErrorCode::parameter);
  }

  TEST_CASE("replay is bit-identical and independent of the thread count") {
    ExperimentSetup s;
    DriftModel d;
    d.intensity_noise_std = 0.005;
    const auto a = simulate_run(s, d, 200.0, 42, 1);
    const auto b = simulate_run(s, d, 200.0, 42, 1);
    const auto c = simulate_run(s, d, 200.0, 42, 4);
    CHECK(same_records(a, b));
    CHECK(same_records(a, c));
    CHECK_FALSE(same_records(a, simulate_run(s, d, 200.0, 43, 1)));
  }

  TEST_CASE("frozen phase reproduces the per-gate mean") {
    for (double theta : {0.0, kPi / 2, kPi}) {
      const auto s = frozen_setup(theta);
      const auto run = simulate_run(s, still(), 400.0, 9);
      const auto p = per_gate_probabilities(s.mu_total, s.losses, s.detectors);
      const auto blank = s.detectors.blanking_gates();
      // identical channels: P(theta) = (1 + cos theta)/4
      const double p_c = 4.0 * p.p_true_coinc * (1.0 + std::cos(theta)) / 4.0;
      const double expect = static_cast<double>(run.gates_per_record) *
                            (p_c + p.p_single_s * p.p_single_i) /
                            std::pow(1.0 + static_cast<double>(blank) * p.p_single_s, 2);
      double total = 0.0;
      for (const auto& r : run.records) total += static_cast<double>(r.coincidences);
      const double n = static_cast<double>(run.records.size());
      CHECK(std::abs(total / n - expect) < 3.0 * std::sqrt(expect / n) + 1e-12);
      for (const auto& r : run.records) CHECK_FALSE(r.discarded);
    }
  }

  TEST_CASE("counts are conserved") {
    ExperimentSetup s;
    s.mu_total = 0.2;
    const auto run = simulate_run(s, DriftModel{}, 100.0, 3);
    for (const auto& r : run.records) {
      CHECK(r.coincidences <= std::min(r.singles_1, r.singles_2));
      CHECK(r.coincidences >= 0);
    }
  }

  TEST_CASE("longer dead time never raises the singles") {
    double prev = 1e300;
    for (double dead : {0.0, 2e-6, 10e-6, 40e-6}) {
      ExperimentSetup s;
      s.detectors.dead_time = dead;
      const auto sum = simulate_run(s, DriftModel{}, 200.0, 5).summary();
      CHECK(sum.singles_rate_1 <= prev);
      prev = sum.singles_rate_1;
    }
  }

  TEST_CASE("fast drift discards records") {
    ExperimentSetup s;
    DriftModel d;
    d.step_std = deg_to_rad(30.0);
    const auto sum = simulate_run(s, d, 200.0, 8).summary();
    CHECK(sum.discarded > sum.records / 2);
    CHECK(simulate_run(s, still(), 200.0, 8).summary().discarded == 0);
  }

  TEST_CASE("gate-level counts at mu = 0 are dark only") {
    auto s = frozen_setup(0.0);
    s.mu_total = 0.0;
    s.detectors.dead_time = 0.0;
    const auto g = simulate_gates(s, 0.0, 2'000'000, 4);
    const double p = s.detectors.dark_probability();
    const double n = 2e6;
    CHECK(std::abs(g.singles_s - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));
    CHECK(g.coincidences <= 1);
  }

  TEST_CASE("records csv round trip") {
    ExperimentSetup s;
    const auto run = simulate_run(s, DriftModel{}, 20.0, 11);
    std::stringstream ss;
    write_records_csv(ss, run);
    const auto back = read_records_csv(ss);
    REQUIRE(back.records.size() == run.records.size());
    CHECK(back.seed == 11);
    CHECK(back.gates_per_record == run.gates_per_record);
    CHECK(back.gate_rate == run.gate_rate);
    for (std::size_t k = 0; k < run.records.size(); ++k) {
      CHECK(back.records[k].coincidences == run.records[k].coincidences);
      CHECK(back.records[k].discarded == run.records[k].discarded);
      CHECK(std::abs(phase_difference(back.records[k].phi_A_est, run.records[k].phi_A_est)) < 1e-9);
    }
  }

  TEST_CASE("malformed and empty record files") {
    const std::string header =
        "t_s,phi_a_deg,phi_b_deg,bin_a_deg,bin_b_deg,singles1,singles2,coinc,acc_est,discarded\n";
    std::istringstream bad(header + "0,1,2,3,3,10,10,1,0.1,0\n0.2,x,2,3,3,10,10,1,0.1,0\n0.4,1,2,3,3,10,10,-1,0.1,0\n");
    try {
      read_records_csv(bad);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      CHECK(std::string(e.what()).find("3,4") != std::string::npos);
    }
    std::istringstream empty("");
    CHECK(code_of([&] { read_records_csv(empty); }) == ErrorCode::no_data);
    std::istringstream only(header);
    CHECK(code_of([&] { read_records_csv(only); }) == ErrorCode::no_data);
  }
}
