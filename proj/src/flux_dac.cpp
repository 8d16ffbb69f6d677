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

#include "pmm/flux_dac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "pmm/config.hpp"
#include "pmm/error.hpp"
#include "pmm/units.hpp"

namespace pmm::flux_dac {

std::string to_string(DacType type) {
  switch (type) {
    case DacType::QubitFlux: return "qubit_flux";
    case DacType::Ccjj: return "ccjj";
    case DacType::LTuner: return "l_tuner";
    case DacType::Coupler: return "coupler";
  }
  return "unknown";
}

std::string to_string(Stage stage) { return stage == Stage::Coarse ? "COARSE" : "FINE"; }

std::string to_string(ParameterSet set) {
  return set == ParameterSet::Designed ? "designed" : "achieved";
}

DacType dac_type_from_string(const std::string& name) {
  for (auto t : kAllDacTypes) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown DAC type '" + name + "'");
}

ParameterSet parameter_set_from_string(const std::string& name) {
  if (name == "designed") return ParameterSet::Designed;
  if (name == "achieved") return ParameterSet::Achieved;
  throw Error(ErrorCode::InvalidArgument, "unknown parameter set '" + name + "'");
}

int capacity_from_beta(double beta) {
  return static_cast<int>(std::floor(beta / (2.0 * kPi)));
}

DacTypeParams default_params(DacType type, ParameterSet set) {
  // Designed capacities, division ratios, spans and minimal steps are the
  // per-type requirements; designed k is the intended COARSE step. Achieved
  // values are break-out measurements of the COARSE/FINE steps and of the
  // COARSE capacity. FINE capacity was not re-measured and keeps its design.
  DacTypeParams p;
  switch (type) {
    case DacType::QubitFlux:
      p = {17, 17, 3.0e-3, 14.1, 25.5e-3, 0.1e-3};
      if (set == ParameterSet::Achieved) {
        p.capacity_coarse = 22;
        p.k = 3.506e-3;
        p.gamma = 3.506 / 0.268;
      }
      break;
    case DacType::Ccjj:
      p = {17, 17, 5.6e-3, 14.1, 66.1e-3, 0.4e-3};
      if (set == ParameterSet::Achieved) {
        p.capacity_coarse = 22;
        p.k = 3.899e-3;
        p.gamma = 3.899 / 0.296;
      }
      break;
    case DacType::LTuner:
      p = {40, 10, 11.3e-3, 10.7, 0.465, 1.1e-3};
      if (set == ParameterSet::Achieved) {
        p.k = 8.481e-3;
        p.gamma = 8.481 / 1.061;
      }
      break;
    case DacType::Coupler:
      p = {40, 10, 23.6e-3, 10.6, 0.968, 2.2e-3};
      if (set == ParameterSet::Achieved) {
        p.capacity_coarse = 35;
        p.k = 19.0221e-3;
        p.gamma = 19.0221 / 1.788;
      }
      break;
  }
  return p;
}

DacParameterTable::DacParameterTable(ParameterSet set) : base_(set) {
  for (auto t : kAllDacTypes) params_[t] = default_params(t, set);
}

DacParameterTable DacParameterTable::load(const std::string& path, ParameterSet base) {
  DacParameterTable table(base);
  const auto file = config::KeyValueFile::load(path);
  for (const auto& [name, kv] : file.sections()) {
    if (name.empty()) continue;
    auto& p = table[dac_type_from_string(name)];
    p.k = file.get_double(name, "k", p.k);
    p.gamma = file.get_double(name, "gamma", p.gamma);
    p.capacity_coarse = static_cast<int>(file.get_long(name, "capacity_coarse", p.capacity_coarse));
    p.capacity_fine = static_cast<int>(file.get_long(name, "capacity_fine", p.capacity_fine));
    p.span_phi0 = file.get_double(name, "span_phi0", p.span_phi0);
    p.min_step_phi0 = file.get_double(name, "min_step_phi0", p.min_step_phi0);
    if (p.k <= 0.0 || p.gamma <= 1.0 || p.capacity_coarse < 1 || p.capacity_fine < 1) {
      throw Error(ErrorCode::ParseError, "section [" + name + "]: need k > 0, gamma > 1, capacities >= 1");
    }
  }
  return table;
}

namespace {

double beta_for_capacity(int capacity) {
  return std::clamp(2.0 * kPi * (capacity + 0.5), 75.0, 300.0);
}

}  // namespace

TwoStageDac make_dac(DacType type, const DacTypeParams& params, ParameterSet set) {
  TwoStageDac d;
  d.type = type;
  d.parameter_set = set;
  d.k = params.k;
  d.gamma = params.gamma;
  d.coarse = {0, params.capacity_coarse, beta_for_capacity(params.capacity_coarse), 0.0};
  d.fine = {0, params.capacity_fine, beta_for_capacity(params.capacity_fine), 0.0};
  return d;
}

TwoStageDac make_dac(DacType type, ParameterSet set) {
  return make_dac(type, default_params(type, set), set);
}

TwoStageDac make_dac_with_spread(DacType type, const DacTypeParams& params, ParameterSet set,
                                 double relative_sigma, Rng& rng) {
  auto d = make_dac(type, params, set);
  std::normal_distribution<double> normal(0.0, relative_sigma);
  d.k *= 1.0 + normal(rng);
  return d;
}

bool apply_quantum(TwoStageDac& dac, Stage stage, int sign) {
  if (sign != 1 && sign != -1) {
    throw Error(ErrorCode::InvalidArgument, "quantum sign must be +1 or -1");
  }
  auto& s = dac.stage(stage);
  if (std::abs(s.stored + sign) > s.capacity) return false;
  s.stored += sign;
  return true;
}

double output_flux(double k, double gamma, int n_coarse, int n_fine) {
  return k * (static_cast<double>(n_coarse) + static_cast<double>(n_fine) / gamma);
}

double output_flux(const TwoStageDac& dac) {
  return output_flux(dac.k, dac.gamma, dac.coarse.stored, dac.fine.stored);
}

InductanceMatrix3 reference_transformer() {
  using namespace units;
  InductanceMatrix3 m;
  m.l_fine = 3.50_nH;
  m.l_coarse = 3.90_nH;
  m.l_target = 7.8_pH;
  m.m_fine_coarse = 9.9_pH;
  m.m_fine_target = 0.7_pH;
  m.m_coarse_target = -10.2_pH;
  return m;
}

Coupling k_gamma_from_inductances(const InductanceMatrix3& m) {
  if (m.l_fine <= 0.0 || m.l_coarse <= 0.0 || m.l_target <= 0.0) {
    throw Error(ErrorCode::SingularInductance, "self inductances must be positive");
  }
  if (m.m_fine_target == 0.0) {
    throw Error(ErrorCode::SingularInductance, "FINE stage does not couple to the target");
  }
  const double coarse = std::abs(m.m_coarse_target) / m.l_coarse;
  const double fine = std::abs(m.m_fine_target) / m.l_fine;
  Coupling c;
  c.k = coarse;
  c.gamma = coarse / fine;
  c.coarse_target_sign = (m.m_coarse_target < 0) == (m.m_fine_target < 0) ? 1 : -1;
  return c;
}

int reset_stage(DacStage& stage, int pulse_count, Rng& rng, const ResetModel& model,
                int pulses_already_applied) {
  if (pulse_count < 1) {
    throw Error(ErrorCode::InvalidCount, "reset needs at least one pulse");
  }
  if (std::abs(stage.reset_mismatch) <= model.mismatch_threshold) {
    stage.stored = 0;
    return 0;
  }
  const double p_retain0 = 1.0 - model.p_zero;
  const double p_two_given_retain = p_retain0 > 0.0 ? model.p_two / p_retain0 : 0.0;
  for (int i = 0; i < pulse_count && stage.stored != 0; ++i) {
    const int index = pulses_already_applied + i;
    const double p_retain = p_retain0 * std::pow(model.retention_decay, index);
    if (uniform01(rng) >= p_retain) {
      stage.stored = 0;
      break;
    }
    // Retained flux keeps its sign and never exceeds what was stored.
    const int magnitude = uniform01(rng) < p_two_given_retain ? 2 : 1;
    const int held = std::min(magnitude, std::abs(stage.stored));
    stage.stored = stage.stored > 0 ? held : -held;
  }
  return stage.stored;
}

Coverage coverage_check(int capacity_fine, double gamma) {
  Coverage c;
  c.overlap_ratio = 2.0 * capacity_fine / gamma;
  c.covered = c.overlap_ratio >= 1.0;
  return c;
}

Coverage coverage_check(const TwoStageDac& dac) {
  return coverage_check(dac.fine.capacity, dac.gamma);
}

long representable_levels(const DacTypeParams& p) {
  return static_cast<long>(std::floor(2.0 * (p.capacity_coarse * p.gamma + p.capacity_fine))) + 1;
}

}  // namespace pmm::flux_dac
