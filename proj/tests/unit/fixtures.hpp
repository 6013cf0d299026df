#pragma once

#include <doctest.h>

#include "awgent/awg_optics.hpp"
#include "awgent/constants.hpp"
#include "awgent/errors.hpp"
#include "awgent/pair_source.hpp"

namespace fixtures {

inline awgent::AwgDesign published_design() {
  awgent::AwgDesign d;
  d.d = 30e-6;
  d.f = 1.75e-3;
  d.delta_L = 63e-6;
  d.n_s = 1.45;
  d.n_a = 11.0;
  d.lambda0 = 1560.6e-9;
  d.array_count = 100;
  d.grating_order = 53;
  d.insertion_loss_db = -6.7;
  return awgent::calibrate_array_index(d, 200e9);
}

inline awgent::PumpSpec published_pump(const awgent::AwgDesign& d) {
  awgent::PumpSpec p;
  p.center_frequency = d.center_frequency();
  p.repetition_rate = 100e6;
  p.pulse_width = 200e-12;
  p.bandwidth_fwhm = 2.2e9;
  p.per_source_pair_probability = {0.005, 0.005};
  p.leakage_rejection_db = -35.0;
  return p;
}

template <class F>
awgent::ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const awgent::Error& e) {
    return e.code();
  }
  FAIL("expected an awgent::Error");
  return awgent::ErrorCode::io;
}

}  // namespace fixtures
