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

#pragma once

#include <complex>

namespace pmm::noise {

enum class DacFill { Empty, Full };

// Linearized DAC input junction coupled through the storage inductor into a
// qubit. SI units throughout.
struct NoiseCircuitParams {
  double r_shunt = 0.9;          // ohm
  double l_dj_empty = 26e-12;    // Josephson inductance of the input junction, DAC empty
  double l_dj_full = 36e-12;     // same, DAC full
  double c_dj = 160e-15;
  double l_dac = 3.6e-9;
  double mutual = 10.2e-12;      // DAC storage inductor to qubit
  double l_q = 320e-12;
  double c_qj = 200e-15;
  double l_qj = 91e-12;
  double temperature = 20e-3;    // K

  void validate() const;
};

// Above this the millimetre-long storage coils stop being lumped elements.
inline constexpr double kLumpedValidityCeilingHz = 100e9;
inline bool lumped_model_valid(double f_hz) { return f_hz <= kLumpedValidityCeilingHz; }

// Admittance seen across the qubit junction terminals.
std::complex<double> qubit_admittance(const NoiseCircuitParams& p, double f_hz, DacFill fill);

// Equivalent shunt resistance 1 / Re(Y_Q(f)).
double r_eq(const NoiseCircuitParams& p, double f_hz, DacFill fill);

// Flux noise spectral density L_q sqrt(4 k_B T / R), in Phi0/sqrt(Hz).
double flux_noise_density(double r_eq_ohm, double l_q, double temperature);

// Fraction of the flux applied to the L-tuner that reaches the qubit body for
// a junction critical-current mismatch `mismatch` at flux bias `flux_bias_phi0`.
double ltuner_transfer_fraction(double flux_bias_phi0, double mismatch);

}  // namespace pmm::noise
