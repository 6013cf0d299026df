#include <doctest.h>

#include <cmath>
#include <string>

#include "awgent/config.hpp"
#include "awgent/report.hpp"
#include "fixtures.hpp"

using namespace awgent;
using fixtures::code_of;

TEST_SUITE("config") {
  TEST_CASE("published constants are the defaults") {
    const auto c = default_config();
    CHECK(c.awg.d == doctest::Approx(30e-6));
    CHECK(c.awg.f == doctest::Approx(1.75e-3));
    CHECK(c.awg.delta_L == doctest::Approx(63e-6));
    CHECK(c.awg.lambda0 == doctest::Approx(1560.6e-9));
    CHECK(c.awg.insertion_loss_db == -6.7);
    CHECK(c.passband.fwhm_hz == 90e9);
    CHECK(c.pump.repetition_rate == 100e6);
    CHECK(c.pump.pulse_width == 200e-12);
    CHECK(c.pump.bandwidth_fwhm == 2.2e9);
    CHECK(c.pump.leakage_rejection_db == -35.0);
    CHECK(c.detectors.efficiency == 0.21);
    CHECK(c.detectors.gate_width == 1e-9);
    CHECK(c.detectors.dark_count_rate == 2.1e3);
    CHECK(c.detectors.dead_time == 10e-6);
    CHECK(c.losses.collection_db == -17.5);
    CHECK(c.drift.record_interval == 0.2);
    CHECK(c.duration_s == 86400.0);
    CHECK(channel_spacing(c.resolved_awg()).delta_nu == doctest::Approx(200e9).epsilon(1e-12));
    CHECK(c.resolved_awg().n_a == doctest::Approx(11.369229).epsilon(1e-6));
  }

  TEST_CASE("ini sections and overrides") {
    const auto c = parse_config("[run]\nseed = 7\nduration_s = 60\n[detectors]\ndark_hz = 100\n",
                                {{"run.seed", "9"}});
    CHECK(c.seed == 9);
    CHECK(c.duration_s == 60.0);
    CHECK(c.detectors.dark_count_rate == 100.0);
    const auto kv = parse_override("drift.step_deg = 1.5");
    CHECK(kv.first == "drift.step_deg");
    CHECK(kv.second == "1.5");
    CHECK(apply_overrides(default_config(), {kv}).drift.step_std == doctest::Approx(deg_to_rad(1.5)));
    CHECK(code_of([] { parse_override("nonsense"); }) == ErrorCode::config);
  }

  TEST_CASE("unknown keys and bad values are rejected") {
    try {
      parse_config("[awg]\nfoo = 1\n");
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      CHECK(std::string(e.what()).find("awg.foo") != std::string::npos);
    }
    CHECK(code_of([] { parse_config("[run]\nseed = abc\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("[drift]\nbranch = sideways\n"); }) == ErrorCode::config);
    CHECK(code_of([] { parse_config("defaults = nowhere\n"); }) == ErrorCode::config);
    CHECK(code_of([] { load_config("/nonexistent/awgent.ini"); }) == ErrorCode::io);
  }

  TEST_CASE("reproduction preset") {
    const auto c = parse_config("defaults = reproduce-paper\n");
    CHECK(c.preset == "reproduce-paper");
    CHECK(c.duration_s == 600.0);
    CHECK(c.seed == reproduce_paper_config().seed);
    CHECK(parse_config("defaults = paper\n").preset == "paper");
  }

  TEST_CASE("n_a may be fixed instead of calibrated") {
    const auto c = parse_config("[awg]\nn_a = 12.0\n");
    CHECK_FALSE(c.calibrate_n_a);
    CHECK(c.resolved_awg().n_a == 12.0);
    CHECK(channel_spacing(c.resolved_awg()).delta_nu < 200e9);
  }

  TEST_CASE("port layout is echoed in the design report") {
    const auto c = parse_config("[ports]\nn_sources = 3\nchannel_offset = 4\n");
    const auto rep = design_report(c);
    const auto& table = rep["ports"]["table"];
    REQUIRE(table.size() == 3);
    CHECK(table[0]["signal"] == 5);
    CHECK(table[2]["idler"] == -5);
    CHECK(rep["channel_spacing"]["delta_nu_ghz"].get<double>() == doctest::Approx(200.0));
    CHECK(code_of([] { design_report(parse_config("[ports]\nn_sources = 3\nchannel_offset = 2\n")); }) ==
          ErrorCode::layout);
  }

  TEST_CASE("pipeline and setup") {
    const auto c = default_config();
    const auto p = build_pipeline(c);
    CHECK(p.jsas.size() == 2);
    const auto s = make_setup(c, p.state);
    CHECK(s.mu_total == doctest::Approx(0.01));
    // identical channels: mean 1/4 of the pair, full interference
    CHECK(s.projection.mean == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(std::abs(s.projection.interference) == doctest::Approx(0.25).epsilon(1e-9));
    auto three = parse_config("[ports]\nn_sources = 3\nchannel_offset = 4\n");
    CHECK(code_of([&] { make_setup(three, build_pipeline(three).state); }) == ErrorCode::config);
  }
}
