#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "awgent/awg_optics.hpp"
#include "awgent/constants.hpp"
#include "awgent/errors.hpp"
#include "fixtures.hpp"

using namespace awgent;

namespace {

AwgDesign textbook() {
  AwgDesign d;
  d.d = 15e-6;
  d.f = 10e-3;
  d.delta_L = 100e-6;
  d.n_s = 1.45;
  d.n_a = 1.45;
  d.lambda0 = 1550e-9;
  d.array_count = 100;
  d.grating_order = 94;
  d.insertion_loss_db = -3.0;
  return d;
}

AwgDesign published_geometry() { return fixtures::published_design(); }

using fixtures::code_of;

}  // namespace

TEST_SUITE("awg_optics") {
  TEST_CASE("channel spacing of the textbook design") {
    // 1.45 * 1550 nm * (15 um)^2 / (1.45 * 10 mm * 100 um) = 0.34875 nm
    const auto cs = channel_spacing(textbook());
    CHECK(cs.delta_lambda == doctest::Approx(0.34875e-9).epsilon(1e-12));
    CHECK(cs.delta_nu == doctest::Approx(kSpeedOfLight * 0.34875e-9 / (1550e-9 * 1550e-9)).epsilon(1e-12));
    CHECK(cs.delta_lambda * 1e9 == doctest::Approx(0.349).epsilon(1e-3));
  }

  TEST_CASE("spacing is quadratic in the pitch") {
    auto d2 = textbook();
    d2.d *= 2.0;
    CHECK(channel_spacing(d2).delta_lambda ==
          doctest::Approx(4.0 * channel_spacing(textbook()).delta_lambda).epsilon(1e-14));
  }

  TEST_CASE("spatial dispersion of the textbook design") {
    // 10 mm * 100 um / (15 um * 1550 nm) = 43.01 um/nm
    CHECK(spatial_dispersion(textbook()) * 1e-3 == doctest::Approx(43.0107).epsilon(1e-5));
  }

  TEST_CASE("swapping the indices inverts the index ratio") {
    auto d = textbook();
    d.n_s = 1.5;
    d.n_a = 3.0;
    auto s = d;
    std::swap(s.n_s, s.n_a);
    CHECK(spatial_dispersion(s) / spatial_dispersion(d) == doctest::Approx(0.25).epsilon(1e-14));
  }

  TEST_CASE("dispersion times spacing is the pitch") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      AwgDesign d = textbook();
      d.d = (5 + 40 * u(rng)) * 1e-6;
      d.f = (0.5 + 20 * u(rng)) * 1e-3;
      d.delta_L = (10 + 200 * u(rng)) * 1e-6;
      d.n_s = 1.01 + 2.9 * u(rng);
      d.n_a = 1.01 + 2.9 * u(rng);
      d.lambda0 = (1.05 + 0.9 * u(rng)) * 1e-6;
      const double prod = spatial_dispersion(d) * channel_spacing(d).delta_lambda;
      CHECK(std::abs(prod / d.d - 1.0) < 1e-12);
    }
  }

  TEST_CASE("published geometry calibrated to 200 GHz") {
    const auto d = published_geometry();
    CHECK(channel_spacing(d).delta_nu == doctest::Approx(200e9).epsilon(1e-12));
    CHECK(d.n_s / d.n_a == doctest::Approx(0.12754).epsilon(1e-4));
  }

  TEST_CASE("invalid designs name the field") {
    auto d = textbook();
    d.f = -1.0;
    try {
      channel_spacing(d);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_design);
      CHECK(std::string(e.what()).find("awg.f") != std::string::npos);
    }
    d = textbook();
    d.lambda0 = 800e-9;
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::invalid_design);
    d = textbook();
    d.insertion_loss_db = 1.0;
    CHECK(code_of([&] { d.validate(); }) == ErrorCode::invalid_design);
  }

  TEST_CASE("tolerance propagation") {
    const auto d = published_geometry();
    CHECK(tolerance_propagation(d, 0.0) == 0.0);
    CHECK(std::abs(tolerance_propagation(d, 1e-3)) == doctest::Approx(1e-3).epsilon(1e-9));
    // central finite difference of ln(delta_lambda) in ln(n_a)
    const double h = 1e-6;
    auto lo = d, hi = d;
    lo.n_a *= 1.0 - h;
    hi.n_a *= 1.0 + h;
    const double fd = (std::log(channel_spacing(hi).delta_lambda) - std::log(channel_spacing(lo).delta_lambda)) /
                      (std::log1p(h) - std::log1p(-h));
    CHECK(std::abs(fd - spacing_sensitivity(d).n_a) < 1e-6);
    CHECK(code_of([&] { tolerance_propagation(d, 0.2); }) == ErrorCode::parameter);
  }

  TEST_CASE("port plans satisfy their invariants") {
    const auto d = published_geometry();
    for (int n = 1; n <= 4; ++n) {
      for (int m = n; m <= 8; ++m) {
        const auto p = plan_ports(d, n, m);
        CHECK_NOTHROW(p.check_invariants());
        std::set<int> used;
        for (int j = 0; j < n; ++j) {
          CHECK(p.output_ports_signal[j] + p.output_ports_idler[j] == 2 * p.pump_focus_ports[j]);
          CHECK(p.output_ports_signal[j] - p.pump_focus_ports[j] == m);
          used.insert({p.output_ports_signal[j], p.output_ports_idler[j], p.pump_focus_ports[j]});
        }
        CHECK(used.size() == static_cast<std::size_t>(3 * n));
        for (int j = 1; j < n; ++j) CHECK(p.input_ports[j] == p.input_ports[j - 1] + 1);
      }
    }
  }

  TEST_CASE("N=3, m=4 layout") {
    const auto p = plan_ports(published_geometry(), 3, 4);
    CHECK(p.input_ports == std::vector<int>{-1, 0, 1});
    CHECK(p.pump_focus_ports == std::vector<int>{1, 0, -1});
    CHECK(p.output_ports_signal == std::vector<int>{5, 4, 3});
    CHECK(p.output_ports_idler == std::vector<int>{-3, -4, -5});
  }

  TEST_CASE("N=2, m=3 gives a 600 GHz detuning") {
    const auto d = published_geometry();
    const auto p = plan_ports(d, 2, 3);
    CHECK(nominal_port_frequency(d, p, PhotonRole::signal) - d.center_frequency() ==
          doctest::Approx(600e9).epsilon(1e-12));
    CHECK(d.center_frequency() - nominal_port_frequency(d, p, PhotonRole::idler) ==
          doctest::Approx(600e9).epsilon(1e-12));
  }

  TEST_CASE("minimal single-source plan") {
    const auto p = plan_ports(published_geometry(), 1, 1);
    CHECK(p.output_ports_signal[0] != p.output_ports_idler[0]);
    CHECK(p.output_ports_signal[0] != p.pump_focus_ports[0]);
    CHECK_NOTHROW(p.check_invariants());
  }

  TEST_CASE("collisions and overflow") {
    const auto d = published_geometry();
    try {
      plan_ports(d, 3, 2);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::layout);
      CHECK(std::string(e.what()).find("collision") != std::string::npos);
    }
    auto small = d;
    small.array_count = 9;
    CHECK(code_of([&] { plan_ports(small, 2, 6); }) == ErrorCode::capacity);
  }

  TEST_CASE("Gaussian passband: centre, width, loss and crosstalk") {
    const auto d = published_geometry();
    const auto p = plan_ports(d, 2, 3);
    PassbandModel pb;
    const auto ts = port_transmission(d, p, 0, PhotonRole::signal, pb);
    const double nominal = d.center_frequency() + 600e9;
    std::size_t best = 0;
    for (std::size_t k = 0; k < ts.grid.count; ++k) {
      if (std::abs(ts.amplitude[k]) > std::abs(ts.amplitude[best])) best = k;
    }
    CHECK(ts.grid.at(best) == doctest::Approx(nominal).epsilon(1e-15));
    CHECK(ts.peak_intensity() == doctest::Approx(std::pow(10.0, -0.67)).epsilon(1e-12));
    CHECK(std::abs(measure_fwhm(ts) / 90e9 - 1.0) < 0.01);
    // intensity 10^(-0.67) * exp(-4 ln2 (200/90)^2) at the adjacent channel
    const double xt = std::pow(10.0, -0.67) * std::exp(-4.0 * std::log(2.0) * std::pow(200.0 / 90.0, 2));
    CHECK(std::norm(ts.at(nominal + 200e9)) == doctest::Approx(xt).epsilon(1e-9));
    for (const auto& a : ts.amplitude) CHECK(std::abs(a) <= 1.0);
    CHECK(std::abs(ts.amplitude.front()) < 1e-6 * std::abs(ts.amplitude[best]));
  }

  TEST_CASE("port offset moves the peak by exactly the offset") {
    const auto d = published_geometry();
    const auto p = plan_ports(d, 2, 3);
    PassbandModel pb;
    pb.signal_offset_hz = {0.0, 7.5e9};
    pb.idler_offset_hz = {0.0, -2.5e9};
    const auto s = port_transmission(d, p, 1, PhotonRole::signal, pb);
    const auto i = port_transmission(d, p, 1, PhotonRole::idler, pb);
    CHECK(s.center_frequency - nominal_port_frequency(d, p, PhotonRole::signal) == doctest::Approx(7.5e9));
    CHECK(i.center_frequency - nominal_port_frequency(d, p, PhotonRole::idler) == doctest::Approx(-2.5e9));
    CHECK(std::norm(s.at(s.center_frequency)) == doctest::Approx(s.peak_intensity()).epsilon(1e-12));
  }

  TEST_CASE("flat-top passband keeps its 3 dB width") {
    for (auto shape : {PassbandShape::gaussian, PassbandShape::flat_top}) {
      CHECK(std::pow(passband_amplitude(shape, 90e9, 45e9), 2) == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(passband_amplitude(shape, 90e9, 0.0) == 1.0);
    }
    CHECK(passband_amplitude(PassbandShape::flat_top, 90e9, 30e9) >
          passband_amplitude(PassbandShape::gaussian, 90e9, 30e9));
    CHECK(parse_passband_shape(to_string(PassbandShape::flat_top)) == PassbandShape::flat_top);
  }

  TEST_CASE("merging passbands are rejected") {
    const auto d = published_geometry();
    const auto p = plan_ports(d, 2, 3);
    PassbandModel pb;
    pb.fwhm_hz = 210e9;
    CHECK(code_of([&] { port_transmission(d, p, 0, PhotonRole::signal, pb); }) == ErrorCode::model_validity);
  }
}
