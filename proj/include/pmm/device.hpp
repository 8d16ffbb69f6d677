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

#include <vector>

#include "pmm/flux_dac.hpp"

namespace pmm::device {

// Compound-junction rf-SQUID qubit. SI units; fluxes passed to the functions
// below are in units of Phi0.
struct QubitParams {
  double i_c_total = 2.5e-6;  // sum of the CJJ critical currents
  double l_q = 320e-12;
  double l_cjj = 20e-12;
  double ccjj_imbalance = 0.0;

  double beta_q() const;
  double beta_cjj() const;
  void validate() const;
};

// Imbalance the CCJJ minor-lobe DACs can cancel.
inline constexpr double kCorrectableImbalance = 0.05;

// Potential energy in units of Phi0 * Ic / 2pi.
double potential(const QubitParams& params, double phi_q, double phi_q_ext, double phi_cjj,
                 double phi_cjj_ext);

struct Well {
  double phi_q = 0.0;
  double energy = 0.0;
};

struct DoubleWell {
  Well left;
  Well right;
};

// The two principal wells of U(phi_q) with the CJJ flux held at its applied
// value. Throws Error(SingleWell) when the potential is monostable.
DoubleWell find_wells(const QubitParams& params, double phi_q_ext, double phi_cjj_ext);

inline constexpr double kDegeneracyTolerance = 1e-6;  // Phi0

// Analog qubit flux at which the two wells are degenerate, given an extra
// flux `applied_offset_phi0` from the DAC. Wrapped into [-1/2, 1/2).
double degeneracy_point(const QubitParams& params, double phi_cjj_ext,
                        double applied_offset_phi0 = 0.0,
                        double tolerance = kDegeneracyTolerance);

struct Sample {
  double time = 0.0;
  double flux = 0.0;  // Phi0
};
using Waveform = std::vector<Sample>;

// Phi_i(t) = a_i + g_i * Phi_global(t) for one programmable gain element.
struct GainElement {
  double gain = 1.0;
  double offset_phi0 = 0.0;
  int controlling_dac = -1;
};

Waveform scaled_signal(const GainElement& element, const Waveform& global);

// Tunable coupler susceptibility M(phi) = -M_afm cos(pi phi) / (1 + chi cos(pi phi)).
// Negative mutual is antiferromagnetic; the null sits at phi = 1/2.
struct CouplerModel {
  double m_afm = 3.0e-12;  // H
  double chi = 0.3;
  double span_phi0 = 0.968;
};

double coupler_mutual(double flux_phi0, const CouplerModel& model = {});

// Inverse of coupler_mutual on [0, 1]; throws Error(OutOfSpan) when the
// mutual is unreachable within the DAC span.
double coupler_flux_for_mutual(double mutual, const CouplerModel& model = {});

// Mutual of a coupler driven by a DAC, composed with the DAC output flux.
double coupler_mutual_from_dac(const flux_dac::TwoStageDac& dac, const CouplerModel& model = {});

// Gain of an Ip-compensator whose coupler is set by `dac`, normalized so that
// a mutual of `m_reference` is unity gain.
GainElement gain_element_from_dac(const flux_dac::TwoStageDac& dac, double m_reference,
                                  double offset_phi0, int dac_id, const CouplerModel& model = {});

}  // namespace pmm::device
