// Copyright 2026 The PMM Twin Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.
#include <doctest.h>

#include <cmath>

#include "pmm/device.hpp"
#include "pmm/error.hpp"
#include "pmm/flux_dac.hpp"

using namespace pmm;
using namespace pmm::device;

namespace {

// Brute-force minimum of the potential over [lo, hi] on a fine grid.
Well grid_minimum(const QubitParams& p, double phi_q_ext, double phi_cjj, double lo, double hi) {
  Well best{lo, 1e300};
  const int n = 200000;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double u = potential(p, x, phi_q_ext, phi_cjj, phi_cjj);
    if (u < best.energy) best = {x, u};
  }
  return best;
}

}  // namespace

TEST_CASE("double well at CJJ bias of one flux quantum") {
  QubitParams p;
  CHECK(p.beta_q() > 1.0);
  for (double x : {-0.05, -0.01, 0.0, 0.02, 0.08}) {
    CAPTURE(x);
    const auto w = find_wells(p, x, 1.0);
    CHECK(w.left.phi_q < x);
    CHECK(w.right.phi_q > x);
    const auto l = grid_minimum(p, x, 1.0, x - 0.5, x);
    const auto r = grid_minimum(p, x, 1.0, x, x + 0.5);
    CHECK(w.left.phi_q == doctest::Approx(l.phi_q).epsilon(1e-4));
    CHECK(w.right.phi_q == doctest::Approx(r.phi_q).epsilon(1e-4));
    CHECK(w.left.energy == doctest::Approx(l.energy).epsilon(1e-8));
    CHECK(w.right.energy == doctest::Approx(r.energy).epsilon(1e-8));
  }
}

TEST_CASE("wells sit where the potential gradient vanishes") {
  QubitParams p;
  const auto w = find_wells(p, 0.03, 1.0);
  const double h = 1e-6;
  for (double x : {w.left.phi_q, w.right.phi_q}) {
    const double d = (potential(p, x + h, 0.03, 1.0, 1.0) - potential(p, x - h, 0.03, 1.0, 1.0)) / (2 * h);
    CHECK(std::abs(d) < 1e-5);
    const double curv =
        (potential(p, x + h, 0.03, 1.0, 1.0) - 2 * potential(p, x, 0.03, 1.0, 1.0) + potential(p, x - h, 0.03, 1.0, 1.0)) /
        (h * h);
    CHECK(curv > 0.0);
  }
}

TEST_CASE("monostable CJJ bias is reported") {
  QubitParams p;
  try {
    find_wells(p, 0.0, 0.0);
    FAIL("expected SingleWell");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleWell);
  }
  CHECK_THROWS_AS(degeneracy_point(p, 0.5), Error);
}

TEST_CASE("degeneracy point cancels the DAC offset") {
  QubitParams p;
  CHECK(std::abs(degeneracy_point(p, 1.0)) < 1e-6);
  for (double a : {-0.02, -0.003506, 0.0012, 0.017, 0.04}) {
    CAPTURE(a);
    const double d = degeneracy_point(p, 1.0, a, 1e-10);
    CHECK(d == doctest::Approx(-a).epsilon(1e-7));
    // Both wells equal in depth there.
    const auto w = find_wells(p, d + a, 1.0);
    CHECK(std::abs(w.left.energy - w.right.energy) < 1e-8);
  }
  // Results wrap into one period.
  const double d = degeneracy_point(p, 1.0, 0.98, 1e-10);
  CHECK(d == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("gain element scales the global waveform") {
  GainElement e{0.5, 0.1, 3};
  const Waveform g = {{0.0, 0.0}, {1.0, 0.2}, {2.0, -0.4}};
  const auto out = scaled_signal(e, g);
  REQUIRE(out.size() == 3);
  CHECK(out[1].time == 1.0);
  CHECK(out[1].flux == doctest::Approx(0.2));
  CHECK(out[2].flux == doctest::Approx(-0.1));
}

TEST_CASE("coupler mutual is antiferromagnetic at zero flux and null at half") {
  CouplerModel m;
  CHECK(coupler_mutual(0.0, m) == doctest::Approx(-m.m_afm / (1 + m.chi)));
  CHECK(std::abs(coupler_mutual(0.5, m)) < 1e-25);
  CHECK(coupler_mutual(0.9, m) > 0.0);
  CHECK(coupler_mutual(0.2, m) == doctest::Approx(coupler_mutual(-0.2, m)));
  CHECK_THROWS_AS(coupler_mutual(0.97, m), Error);
}

TEST_CASE("coupler inverse round trips over the span") {
  CouplerModel m;
  for (double x = 0.0; x <= 0.968; x += 0.011) {
    const double mu = coupler_mutual(x, m);
    CHECK(coupler_flux_for_mutual(mu, m) == doctest::Approx(x).epsilon(1e-9));
  }
  CHECK_THROWS_AS(coupler_flux_for_mutual(-10e-12, m), Error);
}

TEST_CASE("DAC-driven coupler and gain element") {
  auto dac = flux_dac::make_dac(flux_dac::DacType::Coupler, flux_dac::ParameterSet::Achieved);
  for (int i = 0; i < 10; ++i) flux_dac::apply_quantum(dac, flux_dac::Stage::Coarse, 1);
  const double flux = flux_dac::output_flux(dac);
  CHECK(coupler_mutual_from_dac(dac) == doctest::Approx(coupler_mutual(flux)));
  const auto g = gain_element_from_dac(dac, coupler_mutual(0.0), 0.0, 7);
  CHECK(g.controlling_dac == 7);
  CHECK(g.gain == doctest::Approx(coupler_mutual(flux) / coupler_mutual(0.0)));
  CHECK_THROWS_AS(gain_element_from_dac(dac, 0.0, 0.0, 7), Error);
}
