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

#include "pmm/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "pmm/error.hpp"
#include "pmm/units.hpp"

namespace pmm::device {

double QubitParams::beta_q() const { return 2.0 * kPi * l_q * i_c_total / kFluxQuantum; }
double QubitParams::beta_cjj() const { return 2.0 * kPi * l_cjj * i_c_total / kFluxQuantum; }

void QubitParams::validate() const {
  if (!(i_c_total > 0.0) || !(l_q > 0.0) || !(l_cjj > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "qubit currents and inductances must be positive");
  }
}

double potential(const QubitParams& p, double phi_q, double phi_q_ext, double phi_cjj,
                 double phi_cjj_ext) {
  const double dq = phi_q - phi_q_ext;
  const double dc = phi_cjj - phi_cjj_ext;
  return -std::cos(2.0 * kPi * phi_q) * std::cos(kPi * phi_cjj) +
         2.0 * kPi * kPi * dq * dq / p.beta_q() + 2.0 * kPi * kPi * dc * dc / p.beta_cjj();
}

namespace {

constexpr int kGridPoints = 2001;

Well refine(const QubitParams& p, double phi_q_ext, double phi_cjj, double lo, double hi) {
  auto f = [&](double x) { return potential(p, x, phi_q_ext, phi_cjj, phi_cjj); };
  const auto r = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits);
  return {r.first, r.second};
}

}  // namespace

DoubleWell find_wells(const QubitParams& p, double phi_q_ext, double phi_cjj_ext) {
  p.validate();
  if (p.beta_q() * -std::cos(kPi * phi_cjj_ext) <= 1.0) {
    throw Error(ErrorCode::SingleWell, "potential is monostable at this CJJ bias");
  }
  // Scan one period either side of the applied flux.
  const double lo = phi_q_ext - 1.0;
  const double step = 2.0 / (kGridPoints - 1);
  std::vector<double> u(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    u[i] = potential(p, lo + i * step, phi_q_ext, phi_cjj_ext, phi_cjj_ext);
  }
  std::vector<int> minima;
  std::vector<int> maxima;
  for (int i = 1; i + 1 < kGridPoints; ++i) {
    if (u[i] < u[i - 1] && u[i] <= u[i + 1]) minima.push_back(i);
    if (u[i] > u[i - 1] && u[i] >= u[i + 1]) maxima.push_back(i);
  }
  if (minima.size() < 2 || maxima.empty()) {
    throw Error(ErrorCode::SingleWell, "fewer than two wells found");
  }
  // Barrier nearest the applied flux; wells are its nearest neighbours.
  const int centre = (kGridPoints - 1) / 2;
  const int barrier = *std::min_element(maxima.begin(), maxima.end(), [&](int a, int b) {
    return std::abs(a - centre) < std::abs(b - centre);
  });
  int left = -1;
  int right = -1;
  for (int m : minima) {
    if (m < barrier) left = m;
    if (m > barrier && right < 0) right = m;
  }
  if (left < 0 || right < 0) throw Error(ErrorCode::SingleWell, "barrier has no well on one side");
  auto at = [&](int i) { return lo + i * step; };
  DoubleWell w;
  w.left = refine(p, phi_q_ext, phi_cjj_ext, at(left - 1), at(left + 1));
  w.right = refine(p, phi_q_ext, phi_cjj_ext, at(right - 1), at(right + 1));
  return w;
}

double degeneracy_point(const QubitParams& p, double phi_cjj_ext, double applied_offset_phi0,
                        double tolerance) {
  // Depth difference right - left; decreases as the total applied flux grows.
  auto asymmetry = [&](double analog) {
    const auto w = find_wells(p, analog + applied_offset_phi0, phi_cjj_ext);
    return w.right.energy - w.left.energy;
  };
  // Search in the period nearest the expected compensation.
  const double guess = -applied_offset_phi0 - std::round(-applied_offset_phi0);
  double lo = guess - 0.05;
  double hi = guess + 0.05;
  double f_lo = asymmetry(lo);
  double f_hi = asymmetry(hi);
  for (int i = 0; i < 8 && f_lo * f_hi > 0.0; ++i) {
    lo -= 0.05;
    hi += 0.05;
    f_lo = asymmetry(lo);
    f_hi = asymmetry(hi);
  }
  if (f_lo * f_hi > 0.0) throw Error(ErrorCode::SingleWell, "no degeneracy point bracketed");
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = asymmetry(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  x -= std::floor(x + 0.5);
  return x;
}

Waveform scaled_signal(const GainElement& e, const Waveform& global) {
  Waveform out;
  out.reserve(global.size());
  for (const auto& s : global) out.push_back({s.time, e.offset_phi0 + e.gain * s.flux});
  return out;
}

double coupler_mutual(double flux_phi0, const CouplerModel& m) {
  if (std::abs(flux_phi0) > m.span_phi0) {
    throw Error(ErrorCode::OutOfSpan, "coupler flux outside the DAC span");
  }
  const double c = std::cos(kPi * flux_phi0);
  return -m.m_afm * c / (1.0 + m.chi * c);
}

double coupler_flux_for_mutual(double mutual, const CouplerModel& m) {
  const double denom = m.m_afm + m.chi * mutual;
  const double c = denom != 0.0 ? -mutual / denom : 2.0;
  if (std::abs(c) > 1.0) throw Error(ErrorCode::OutOfSpan, "mutual outside coupler range");
  const double flux = std::acos(c) / kPi;
  if (flux > m.span_phi0) throw Error(ErrorCode::OutOfSpan, "mutual needs flux beyond the DAC span");
  return flux;
}

double coupler_mutual_from_dac(const flux_dac::TwoStageDac& dac, const CouplerModel& model) {
  return coupler_mutual(flux_dac::output_flux(dac), model);
}

GainElement gain_element_from_dac(const flux_dac::TwoStageDac& dac, double m_reference,
                                  double offset_phi0, int dac_id, const CouplerModel& model) {
  if (m_reference == 0.0) throw Error(ErrorCode::InvalidArgument, "reference mutual must be nonzero");
  return {coupler_mutual_from_dac(dac, model) / m_reference, offset_phi0, dac_id};
}

}  // namespace pmm::device
