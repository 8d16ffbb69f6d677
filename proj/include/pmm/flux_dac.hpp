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

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "pmm/random.hpp"

namespace pmm::flux_dac {

enum class DacType : std::uint8_t { QubitFlux, Ccjj, LTuner, Coupler };
enum class Stage : std::uint8_t { Coarse, Fine };
enum class ParameterSet : std::uint8_t { Designed, Achieved };

inline constexpr std::array<DacType, 4> kAllDacTypes = {DacType::QubitFlux, DacType::Ccjj,
                                                        DacType::LTuner, DacType::Coupler};

std::string to_string(DacType type);
std::string to_string(Stage stage);
std::string to_string(ParameterSet set);
DacType dac_type_from_string(const std::string& name);
ParameterSet parameter_set_from_string(const std::string& name);

// One storage inductor with its reset SQUID.
struct DacStage {
  int stored = 0;
  int capacity = 0;
  double beta = 0.0;            // 2*pi*L*Ic/Phi0
  double reset_mismatch = 0.0;  // relative Ic difference of the two reset junctions
};

// Largest count a stage of the given beta can hold, floor(beta / 2pi).
int capacity_from_beta(double beta);

// Per-type parameters. `k` is flux into the target per COARSE quantum, in
// units of Phi0; `gamma` divides it for the FINE stage.
struct DacTypeParams {
  int capacity_coarse = 0;
  int capacity_fine = 0;
  double k = 0.0;
  double gamma = 1.0;
  double span_phi0 = 0.0;      // designed span, metadata
  double min_step_phi0 = 0.0;  // designed minimal step, metadata
};

DacTypeParams default_params(DacType type, ParameterSet set);

// Table of per-type parameters; starts from built-in values and can be
// overridden from a key=value file with one section per type
// ([qubit_flux], [ccjj], [l_tuner], [coupler]).
class DacParameterTable {
 public:
  explicit DacParameterTable(ParameterSet set = ParameterSet::Designed);

  static DacParameterTable load(const std::string& path, ParameterSet base);

  const DacTypeParams& operator[](DacType type) const { return params_.at(type); }
  DacTypeParams& operator[](DacType type) { return params_.at(type); }
  ParameterSet base() const { return base_; }

 private:
  ParameterSet base_;
  std::map<DacType, DacTypeParams> params_;
};

struct TwoStageDac {
  DacStage coarse;
  DacStage fine;
  double k = 0.0;
  double gamma = 1.0;
  DacType type = DacType::QubitFlux;
  ParameterSet parameter_set = ParameterSet::Designed;

  DacStage& stage(Stage s) { return s == Stage::Coarse ? coarse : fine; }
  const DacStage& stage(Stage s) const { return s == Stage::Coarse ? coarse : fine; }
};

TwoStageDac make_dac(DacType type, const DacTypeParams& params,
                     ParameterSet set = ParameterSet::Designed);
TwoStageDac make_dac(DacType type, ParameterSet set);

// Same as make_dac, with k perturbed by a Gaussian of relative width
// `relative_sigma` to mimic fabrication spread between identical designs.
TwoStageDac make_dac_with_spread(DacType type, const DacTypeParams& params, ParameterSet set,
                                 double relative_sigma, Rng& rng);

inline constexpr double kFabricationSpread = 0.012;

// Adds one quantum of the given sign. Returns false, leaving the stage
// untouched, when the stage is already at capacity in that direction.
bool apply_quantum(TwoStageDac& dac, Stage stage, int sign);

// k * (N_coarse + N_fine / gamma), in Phi0.
double output_flux(const TwoStageDac& dac);
double output_flux(double k, double gamma, int n_coarse, int n_fine);

// Three-port flux transformer matrix over {FINE, COARSE, TARGET}, in henries.
struct InductanceMatrix3 {
  double l_fine = 0.0;
  double l_coarse = 0.0;
  double l_target = 0.0;
  double m_fine_coarse = 0.0;
  double m_fine_target = 0.0;
  double m_coarse_target = 0.0;
};

// The extracted transformer of the qubit flux DAC.
InductanceMatrix3 reference_transformer();

struct Coupling {
  double k = 0.0;
  double gamma = 1.0;
  int coarse_target_sign = 1;  // sign of M_coarse,target relative to M_fine,target
};

// Each storage loop is a flux-to-current converter I = N Phi0 / L driving the
// mutual into the target, so one quantum couples M/L Phi0.
Coupling k_gamma_from_inductances(const InductanceMatrix3& m);

struct ResetModel {
  double mismatch_threshold = 0.05;  // at or below this one pulse always empties
  // Retained magnitude distribution for a pulse that fails to empty the stage,
  // expressed as the total probability for |residual| = 0, 1, 2.
  double p_zero = 0.5;
  double p_one = 0.4;
  double p_two = 0.1;
  // Probability of retaining flux shrinks by this factor with every further
  // pulse applied to the same stage.
  double retention_decay = 0.5;
};

// Applies `pulse_count` reset pulses and returns the residual count left in
// the stage. `pulses_already_applied` continues a reset sequence started by
// an earlier call.
int reset_stage(DacStage& stage, int pulse_count, Rng& rng, const ResetModel& model = {},
                int pulses_already_applied = 0);

struct Coverage {
  double overlap_ratio = 0.0;
  bool covered = false;
};

// FINE full span measured in COARSE steps; below 1 the two stages underlap.
Coverage coverage_check(const TwoStageDac& dac);
Coverage coverage_check(int capacity_fine, double gamma);

// Distinct outputs the DAC can reach spaced by one FINE step.
long representable_levels(const DacTypeParams& params);

}  // namespace pmm::flux_dac
