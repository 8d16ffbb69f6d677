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

#include "pmm/noise.hpp"

#include <cmath>

#include "pmm/error.hpp"
#include "pmm/units.hpp"

namespace pmm::noise {

void NoiseCircuitParams::validate() const {
  const double all[] = {r_shunt, l_dj_empty, l_dj_full, c_dj, l_dac, mutual, l_q, c_qj, l_qj, temperature};
  for (double v : all) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise circuit parameters must be positive");
  }
  if (l_dj_empty > l_dj_full) {
    throw Error(ErrorCode::InvalidArgument, "L_dj(empty) must not exceed L_dj(full)");
  }
}

std::complex<double> qubit_admittance(const NoiseCircuitParams& p, double f_hz, DacFill fill) {
  if (!(f_hz > 0.0)) throw Error(ErrorCode::NonPositiveFrequency, "frequency must be positive");
  p.validate();
  using cd = std::complex<double>;
  const cd jw(0.0, 2.0 * kPi * f_hz);
  const double l_dj = fill == DacFill::Empty ? p.l_dj_empty : p.l_dj_full;

  // R_sh || L_dj || C_dj, in series with the storage inductor.
  const cd z_shunt = 1.0 / (1.0 / p.r_shunt + 1.0 / (jw * l_dj) + jw * p.c_dj);
  const cd z_dac_loop = z_shunt + jw * p.l_dac;
  // Loop reflected into the qubit through the mutual: (wM)^2 / Z_loop.
  const cd z_reflected = -(jw * p.mutual) * (jw * p.mutual) / z_dac_loop;
  const cd z_qubit_branch = jw * p.l_q + z_reflected;
  return 1.0 / (jw * p.l_qj) + jw * p.c_qj + 1.0 / z_qubit_branch;
}

double r_eq(const NoiseCircuitParams& p, double f_hz, DacFill fill) {
  return 1.0 / qubit_admittance(p, f_hz, fill).real();
}

double flux_noise_density(double r_eq_ohm, double l_q, double temperature) {
  if (!(r_eq_ohm > 0.0) || !(l_q > 0.0) || !(temperature > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "flux noise inputs must be positive");
  }
  if (std::isinf(r_eq_ohm)) return 0.0;
  return l_q * std::sqrt(4.0 * kBoltzmann * temperature / r_eq_ohm) / kFluxQuantum;
}

double ltuner_transfer_fraction(double flux_bias_phi0, double mismatch) {
  if (std::abs(flux_bias_phi0) > 0.5) {
    throw Error(ErrorCode::OutOfRange, "L-tuner flux bias must satisfy |phi| <= Phi0/2");
  }
  // An asymmetric dc-SQUID circulates mismatch * tan(pi phi) of the applied
  // flux; tan(pi/4) = 1 so a 1% mismatch at Phi0/4 transfers 1%.
  return mismatch * std::tan(kPi * flux_bias_phi0);
}

}  // namespace pmm::noise
