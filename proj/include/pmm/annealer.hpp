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
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmm/device.hpp"
#include "pmm/flux_dac.hpp"
#include "pmm/topology.hpp"

namespace pmm::annealer {

// Ising objective sum_j h_j s_j + sum_{(i,j) in E} K_ij s_i s_j.
struct IsingProblem {
  int n = 0;
  std::vector<double> h;
  std::map<std::pair<int, int>, double> couplings;  // keys have i < j

  static IsingProblem zeros(int n);
  void set_coupling(int i, int j, double value);
  // Checks finiteness and, when a grid is given, that every coupling is an
  // allowed edge.
  void validate(const topology::UnitCellGrid* grid = nullptr) const;
};

// Problem text format: `h <j> <value>` and `K <i> <j> <value>` records, one
// per line, 0-based indices, `#` comment lines. Unknown edges are rejected
// when a grid is supplied; `n` is the largest index + 1 unless `min_n` is larger.
IsingProblem read_problem(std::istream& in, const topology::UnitCellGrid* grid = nullptr, int min_n = 0);
IsingProblem load_problem(const std::string& path, const topology::UnitCellGrid* grid = nullptr,
                          int min_n = 0);
void write_problem(std::ostream& out, const IsingProblem& p);

double objective(const IsingProblem& p, std::span<const int> spins);

// Spin vector of computational basis state `index`: bit j set means s_j = -1.
std::vector<int> spins_from_index(std::uint64_t index, int n);

inline constexpr int kMaxBruteForceSpins = 24;

struct BruteForceResult {
  double optimum = 0.0;
  std::vector<std::vector<int>> minimizers;
};

BruteForceResult brute_force_minimize(const IsingProblem& p);

// Envelopes in GHz (energy / h), tabulated over s and linearly interpolated.
struct AnnealSchedule {
  double t_f_ns = 100.0;
  int steps = 0;  // 0 selects a step count from t_f and the energy scale
  std::vector<double> s;
  std::vector<double> a_ghz;
  std::vector<double> b_ghz;

  // A(s) = E0 (1 - s)^3, B(s) = E0 s with 1024 tabulated points.
  static AnnealSchedule standard(double t_f_ns, double energy_scale_ghz = 1.0, int points = 1024);
  // Whitespace-separated `s A B` rows with `#` comments.
  static AnnealSchedule load(const std::string& path, double t_f_ns);
  static AnnealSchedule read(std::istream& in, double t_f_ns);

  double a(double s_value) const;
  double b(double s_value) const;
  void validate() const;
};

inline constexpr double kMinInitialRatio = 100.0;
inline constexpr double kMaxFinalRatio = 0.01;
inline constexpr int kMaxAnnealSpins = 12;

enum class Integrator {
  Midpoint,         // one exponential of H at the step midpoint
  CommutatorFree4,  // two exponentials at the Gauss points, fourth order
};

struct EvolutionOptions {
  Integrator integrator = Integrator::CommutatorFree4;
  int steps = 0;  // overrides the schedule when positive
};

using StateVector = std::vector<std::complex<double>>;

// Exact ground state of H(0).
StateVector initial_state(const IsingProblem& p, const AnnealSchedule& sched);

// Integrates i d/dt psi = H(t/t_f) psi from the ground state of H(0).
StateVector evolve(const IsingProblem& p, const AnnealSchedule& sched, const EvolutionOptions& opts = {});

int resolved_steps(const IsingProblem& p, const AnnealSchedule& sched, const EvolutionOptions& opts);

struct AnnealResult {
  std::vector<std::vector<int>> outcomes;
  std::vector<double> energies;
  double ground_fraction = 0.0;
  double optimum = 0.0;
  double final_norm = 1.0;
};

AnnealResult anneal(const IsingProblem& p, const AnnealSchedule& sched, int repeats,
                    std::uint64_t seed, const EvolutionOptions& opts = {});

// Device transfer chain used to turn (h, K) into DAC counts.
struct QuantizeConfig {
  flux_dac::DacParameterTable dacs{flux_dac::ParameterSet::Designed};
  device::CouplerModel coupler;
  double h_full_scale_phi0 = 0.0;  // qubit flux for |h| = 1; 0 selects half the DAC span
  double null_offset_phi0 = 0.5;   // static coupler bias at which the mutual vanishes
  double k_unit_mutual = 0.0;      // |mutual| for |K| = 1; 0 selects the AFM extreme
  bool program_ip_compensators = true;
  // Calibrated parameters of individual DACs, replacing the type defaults.
  std::map<int, flux_dac::DacTypeParams> per_dac;

  const flux_dac::DacTypeParams& params_for(int dac, flux_dac::DacType type) const;
  double h_scale() const;
  double k_scale() const;
};

struct DacCounts {
  int coarse = 0;
  int fine = 0;

  bool operator==(const DacCounts&) const = default;
};

// Closest (N_coarse, N_fine) to `target_phi0`; throws Error(OutOfRange) when
// the target is beyond the reachable span.
DacCounts nearest_counts(double target_phi0, const flux_dac::DacTypeParams& params);

struct QuantizedProblem {
  std::map<int, DacCounts> targets;  // DAC id -> counts
  IsingProblem achieved;
  double max_relative_error = 0.0;   // over h and K, relative to full scale 1
  double max_gain_error = 0.0;       // Ip-compensator gains, same normalization
};

QuantizedProblem quantize_problem(const IsingProblem& p, const topology::UnitCellGrid& grid,
                                  const QuantizeConfig& config = {});

}  // namespace pmm::annealer
