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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pmm/annealer.hpp"
#include "pmm/demux.hpp"
#include "pmm/device.hpp"
#include "pmm/flux_dac.hpp"
#include "pmm/topology.hpp"

namespace pmm::controller {

using annealer::DacCounts;
using StateMap = std::map<int, DacCounts>;  // DAC id -> (N_coarse, N_fine)
using flux_dac::Stage;

flux_dac::DacType dac_type_for_role(topology::DacRole role);

struct ChipOptions {
  flux_dac::DacParameterTable parameters{flux_dac::ParameterSet::Designed};
  double k_spread = 0.0;          // relative sigma of per-instance k
  double reset_mismatch = 0.0;    // reset junction mismatch applied to every stage
  demux::TreeConfig tree;
  double gate_error_probability = -1.0;  // overrides tree.gate.error_probability when >= 0
  std::uint64_t seed = 1;
};

// Where a DAC stage sits in the address space.
struct StageAddress {
  int tree = 0;
  int leaf = 0;
};

// The processor's control hardware: DAC states and the address trees that
// reach them. One chip is driven by one controller, strictly sequentially.
class Chip {
 public:
  Chip(topology::UnitCellGrid grid, const ChipOptions& options = {});

  const topology::UnitCellGrid& grid() const { return grid_; }
  std::vector<flux_dac::TwoStageDac>& dacs() { return dacs_; }
  const std::vector<flux_dac::TwoStageDac>& dacs() const { return dacs_; }
  std::vector<demux::AddressTree>& trees() { return trees_; }
  const std::vector<demux::AddressTree>& trees() const { return trees_; }

  StageAddress address_of(int dac, Stage stage) const;
  // DAC stage wired to a tree output, if any.
  std::optional<std::pair<int, Stage>> stage_at(int tree, int leaf) const;

  StateMap states() const;
  void set_states(const StateMap& states);
  void set_operating_point(demux::OperatingPoint op);
  void set_gate_error_probability(double p);

 private:
  topology::UnitCellGrid grid_;
  std::vector<flux_dac::TwoStageDac> dacs_;
  std::vector<demux::AddressTree> trees_;
};

enum class Mode { Incremental, ResetFirst };

Mode mode_from_string(const std::string& name);

inline constexpr int kMaxResetPulses = 10;

struct ResetOp {
  int dac = 0;
  Stage stage = Stage::Coarse;
  int max_pulses = kMaxResetPulses;
};

struct PulseStep {
  int dac = 0;
  Stage stage = Stage::Coarse;
  demux::PulseOp pulse;
};

using ProgramOp = std::variant<ResetOp, PulseStep>;

struct PulseProgram {
  std::vector<ProgramOp> ops;
  StateMap start;
  StateMap expected_final;
  long pulse_count = 0;     // quanta routed through the trees
  long reset_quanta = 0;    // quanta the reset ops dump from the starting state
  int bias_reversals = 0;   // polarity changes on the tree bias lines
};

// Incremental mode pulses the per-stage deltas of every DAC in `targets`.
// ResetFirst resets both stages of every DAC in `targets` and loads them
// from zero. DACs absent from `targets` keep their current state.
// Pulse order within each tree: ascending leaf (so COARSE before FINE of a
// DAC), all positive quanta first, then all negative ones.
PulseProgram compile(const Chip& chip, const StateMap& current, const StateMap& targets, Mode mode);

struct RoutingEvent {
  long pulse_index = 0;
  int intended_dac = 0;
  Stage intended_stage = Stage::Coarse;
  demux::RoutingOutcome outcome;
  std::optional<std::pair<int, Stage>> landed;  // stage that received a misrouted pulse
};

struct Residual {
  int dac = 0;
  Stage stage = Stage::Coarse;
  int residual = 0;
  int pulses = 0;
};

struct Discrepancy {
  int dac = 0;
  DacCounts expected;
  DacCounts achieved;
  std::string cause;
};

struct ExecutionReport {
  StateMap achieved;
  std::vector<RoutingEvent> routing_errors;
  std::vector<Residual> residuals;
  std::vector<Discrepancy> discrepancies;
  long pulses_routed = 0;
  long reset_pulses = 0;
  long saturations = 0;

  bool ok() const { return discrepancies.empty(); }
};

// Runs the program on the chip. Routing faults at the operating point
// (OutOfMargin, Broadcast) abort with the corresponding pmm::Error.
ExecutionReport execute(const PulseProgram& program, Chip& chip, std::uint64_t seed,
                        const flux_dac::ResetModel& reset_model = {});

struct ProgramCost {
  long pulse_count = 0;
  long quanta_moved = 0;  // routed quanta plus quanta removed by resets
  double cooldown_s = 0.0;
  int bias_reversals = 0;
};

inline constexpr double kCooldownSeconds = 1e-3;

ProgramCost program_cost(const PulseProgram& program);

// ---------------------------------------------------------------- calibration

// A device quantity the shared analog line can null. Returns the analog flux
// (Phi0, wrapped to one period) that compensates `applied_dac_phi0`.
class FeedbackObservable {
 public:
  virtual ~FeedbackObservable() = default;
  virtual double compensation(double applied_dac_phi0) const = 0;
};

// Qubit degeneracy point, for qubit flux DACs.
class QubitDegeneracyObservable : public FeedbackObservable {
 public:
  QubitDegeneracyObservable(device::QubitParams params, double phi_cjj_ext, double tolerance = 1e-10)
      : params_(params), phi_cjj_(phi_cjj_ext), tolerance_(tolerance) {}
  double compensation(double applied_dac_phi0) const override;

 private:
  device::QubitParams params_;
  double phi_cjj_;
  double tolerance_;
};

// Peak of a dc-SQUID threshold curve, for DACs biasing a break-out SQUID.
class SquidThresholdObservable : public FeedbackObservable {
 public:
  double compensation(double applied_dac_phi0) const override;
};

// Any other quantity that responds linearly to the flux and is nulled by
// the analog line: CCJJ imbalance, L-tuner loading, coupler response.
class LinearNullObservable : public FeedbackObservable {
 public:
  double compensation(double applied_dac_phi0) const override;
};

// Observable for a DAC role; nullptr when none is wired up.
std::unique_ptr<FeedbackObservable> observable_for(topology::DacRole role,
                                                   const device::QubitParams& qubit = {},
                                                   double phi_cjj_ext = 1.0);

struct CalibrationRecord {
  int dac = -1;
  double k = 0.0;
  double gamma = 0.0;
  double analog_mutual = 0.0;  // H
  double k_sigma = 0.0;
  double gamma_sigma = 0.0;
};

struct CalibrationOptions {
  double noise_sigma_phi0 = -1.0;  // measurement noise; < 0 selects 0.1 nominal FINE step
  int coarse_quanta = 5;
  int fine_quanta = 0;             // 0 selects the FINE capacity
  int repeats = 10;                // readings averaged per measurement
};

// Feedback calibration: the analog-line mutual from its Phi0 period, then
// the analog compensation for +coarse_quanta COARSE and +fine_quanta FINE.
CalibrationRecord calibrate_dac(const flux_dac::TwoStageDac& dac, const FeedbackObservable* observable,
                                double analog_line_mutual, Rng& rng, const CalibrationOptions& options = {},
                                int dac_id = -1);

void write_calibration(std::ostream& out, const std::vector<CalibrationRecord>& records);
std::map<int, CalibrationRecord> load_calibration(const std::string& path);

}  // namespace pmm::controller
