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

#include "pmm/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "pmm/config.hpp"
#include "pmm/error.hpp"
#include "pmm/units.hpp"

namespace pmm::controller {

using flux_dac::DacType;
using topology::DacRole;

DacType dac_type_for_role(DacRole role) {
  switch (role) {
    case DacRole::QubitFlux:
      return DacType::QubitFlux;
    case DacRole::CcjjMinor1:
    case DacRole::CcjjMinor2:
      return DacType::Ccjj;
    case DacRole::LTuner:
      return DacType::LTuner;
    case DacRole::IpCompensator:
    case DacRole::Coupler:
    case DacRole::Breakout:
      return DacType::Coupler;
  }
  return DacType::Coupler;
}

Chip::Chip(topology::UnitCellGrid grid, const ChipOptions& options) : grid_(std::move(grid)) {
  Rng spread(derive_seed(options.seed, 0x6b));
  dacs_.reserve(grid_.dacs.size());
  for (const auto& a : grid_.dacs) {
    const DacType type = dac_type_for_role(a.role);
    auto dac = options.k_spread > 0.0
                   ? flux_dac::make_dac_with_spread(type, options.parameters[type], options.parameters.base(),
                                                    options.k_spread, spread)
                   : flux_dac::make_dac(type, options.parameters[type], options.parameters.base());
    dac.coarse.reset_mismatch = options.reset_mismatch;
    dac.fine.reset_mismatch = options.reset_mismatch;
    dacs_.push_back(dac);
  }
  demux::TreeConfig tc = options.tree;
  tc.depth = topology::kTreeDepth;
  if (options.gate_error_probability >= 0.0) tc.gate.error_probability = options.gate_error_probability;
  for (int t = 0; t < grid_.tree_count(); ++t) {
    trees_.emplace_back(t, tc, derive_seed(options.seed, 0x100 + static_cast<std::uint64_t>(t)));
  }
}

StageAddress Chip::address_of(int dac, Stage stage) const {
  if (dac < 0 || dac >= static_cast<int>(grid_.dacs.size())) {
    throw Error(ErrorCode::OutOfRange, "no DAC " + std::to_string(dac));
  }
  const auto& a = grid_.dacs[dac];
  return {a.tree, (a.slot << 1) | (stage == Stage::Fine ? 1 : 0)};
}

std::optional<std::pair<int, Stage>> Chip::stage_at(int tree, int leaf) const {
  const int dac = tree * topology::kDacsPerTree + (leaf >> 1);
  if (tree < 0 || leaf < 0 || leaf >= (1 << topology::kTreeDepth) ||
      dac >= static_cast<int>(grid_.dacs.size())) {
    return std::nullopt;
  }
  return std::make_pair(dac, (leaf & 1) ? Stage::Fine : Stage::Coarse);
}

StateMap Chip::states() const {
  StateMap out;
  for (std::size_t i = 0; i < dacs_.size(); ++i) {
    out[static_cast<int>(i)] = {dacs_[i].coarse.stored, dacs_[i].fine.stored};
  }
  return out;
}

void Chip::set_states(const StateMap& states) {
  for (const auto& [id, c] : states) {
    if (id < 0 || id >= static_cast<int>(dacs_.size())) {
      throw Error(ErrorCode::OutOfRange, "no DAC " + std::to_string(id));
    }
    auto& d = dacs_[id];
    if (std::abs(c.coarse) > d.coarse.capacity || std::abs(c.fine) > d.fine.capacity) {
      throw Error(ErrorCode::CapacityExceeded, "state beyond capacity for DAC " + std::to_string(id));
    }
    d.coarse.stored = c.coarse;
    d.fine.stored = c.fine;
  }
}

void Chip::set_operating_point(demux::OperatingPoint op) {
  for (auto& t : trees_) t.set_operating_point(op);
}

void Chip::set_gate_error_probability(double p) {
  for (auto& t : trees_) t.set_gate_error_probability(p);
}

Mode mode_from_string(const std::string& name) {
  if (name == "incremental") return Mode::Incremental;
  if (name == "reset" || name == "reset_first") return Mode::ResetFirst;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + name + "'");
}

namespace {

DacCounts lookup(const StateMap& m, int dac) {
  auto it = m.find(dac);
  return it == m.end() ? DacCounts{} : it->second;
}

int count_of(const DacCounts& c, Stage s) { return s == Stage::Coarse ? c.coarse : c.fine; }

}  // namespace

PulseProgram compile(const Chip& chip, const StateMap& current, const StateMap& targets, Mode mode) {
  const auto& dacs = chip.dacs();
  const int n = static_cast<int>(dacs.size());
  for (const auto* m : {&current, &targets}) {
    for (const auto& [id, c] : *m) {
      if (id < 0 || id >= n) throw Error(ErrorCode::OutOfRange, "no DAC " + std::to_string(id));
      const auto& d = dacs[id];
      if (std::abs(c.coarse) > d.coarse.capacity || std::abs(c.fine) > d.fine.capacity) {
        throw Error(ErrorCode::CapacityExceeded,
                    "DAC " + std::to_string(id) + " (" + std::to_string(c.coarse) + ", " +
                        std::to_string(c.fine) + ") exceeds capacity (" + std::to_string(d.coarse.capacity) +
                        ", " + std::to_string(d.fine.capacity) + ")");
      }
    }
  }

  PulseProgram prog;
  for (int id = 0; id < n; ++id) {
    prog.start[id] = lookup(current, id);
    prog.expected_final[id] = targets.count(id) ? targets.at(id) : prog.start[id];
  }

  // Stages the program acts on, with the count the pulses build on.
  std::vector<std::pair<int, Stage>> touched;
  for (const auto& [id, target] : targets) {
    for (Stage s : {Stage::Coarse, Stage::Fine}) {
      if (mode == Mode::ResetFirst || count_of(prog.start[id], s) != count_of(target, s)) {
        touched.emplace_back(id, s);
      }
    }
  }
  auto delta = [&](int id, Stage s) {
    const int from = mode == Mode::ResetFirst ? 0 : count_of(prog.start[id], s);
    return count_of(prog.expected_final[id], s) - from;
  };

  if (mode == Mode::ResetFirst) {
    for (auto [id, s] : touched) {
      prog.ops.push_back(ResetOp{id, s, kMaxResetPulses});
      prog.reset_quanta += std::abs(count_of(prog.start[id], s));
    }
  }

  const int depth = topology::kTreeDepth;
  for (int t = 0; t < chip.grid().tree_count(); ++t) {
    int bias = 1;
    for (int sign : {1, -1}) {
      bool any = false;
      for (auto [id, s] : touched) {
        const auto addr = chip.address_of(id, s);
        if (addr.tree != t) continue;
        const int d = delta(id, s);
        if (d * sign <= 0) continue;
        any = true;
        const auto op = demux::PulseOp::to_leaf(t, addr.leaf, depth, sign);
        for (int q = 0; q < std::abs(d); ++q) prog.ops.push_back(PulseStep{id, s, op});
        prog.pulse_count += std::abs(d);
      }
      if (any && sign != bias) {
        ++prog.bias_reversals;
        bias = sign;
      }
    }
  }
  return prog;
}

ExecutionReport execute(const PulseProgram& program, Chip& chip, std::uint64_t seed,
                        const flux_dac::ResetModel& reset_model) {
  for (auto& t : chip.trees()) {
    t.check_operating_point();
    t.reseed(derive_seed(seed, 0x200 + static_cast<std::uint64_t>(t.tree_id())));
  }
  Rng reset_rng(derive_seed(seed, 0x300));
  ExecutionReport report;
  auto& dacs = chip.dacs();
  std::map<int, std::vector<std::string>> causes;

  for (const auto& op : program.ops) {
    if (const auto* r = std::get_if<ResetOp>(&op)) {
      auto& st = dacs.at(r->dac).stage(r->stage);
      int applied = 0;
      // The post-reset probe reads the stage back; stop once it reads empty.
      while (applied < r->max_pulses) {
        flux_dac::reset_stage(st, 1, reset_rng, reset_model, applied);
        ++applied;
        if (st.stored == 0) break;
      }
      report.reset_pulses += applied;
      if (st.stored != 0) {
        report.residuals.push_back({r->dac, r->stage, st.stored, applied});
        causes[r->dac].push_back("reset residual " + std::to_string(st.stored) + " on " +
                                 flux_dac::to_string(r->stage));
      }
      continue;
    }
    const auto& p = std::get<PulseStep>(op);
    auto& tree = chip.trees().at(p.pulse.tree_id);
    const auto outcome = tree.route(p.pulse);
    const long index = report.pulses_routed++;
    std::optional<std::pair<int, Stage>> landed;
    if (outcome.leaf >= 0) landed = chip.stage_at(p.pulse.tree_id, outcome.leaf);
    if (outcome.status != demux::RouteStatus::Delivered) {
      report.routing_errors.push_back({index, p.dac, p.stage, outcome, landed});
      const std::string what = outcome.status == demux::RouteStatus::Dropped ? "dropped" : "misrouted";
      causes[p.dac].push_back(what + " pulse " + std::to_string(index) + " at level " +
                              std::to_string(outcome.failed_level));
      if (landed) {
        causes[landed->first].push_back("received misrouted pulse " + std::to_string(index) + " meant for DAC " +
                                        std::to_string(p.dac));
      }
    }
    if (landed && !flux_dac::apply_quantum(dacs[landed->first], landed->second, outcome.quantum)) {
      ++report.saturations;
      causes[landed->first].push_back("saturated " + flux_dac::to_string(landed->second));
    }
  }

  report.achieved = chip.states();
  for (const auto& [id, expected] : program.expected_final) {
    const auto got = report.achieved.at(id);
    if (got == expected) continue;
    Discrepancy d{id, expected, got, {}};
    const auto it = causes.find(id);
    if (it == causes.end()) {
      d.cause = "unknown";
    } else {
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        if (i) d.cause += "; ";
        d.cause += it->second[i];
      }
    }
    report.discrepancies.push_back(std::move(d));
  }
  return report;
}

ProgramCost program_cost(const PulseProgram& program) {
  return {program.pulse_count, program.pulse_count + program.reset_quanta, kCooldownSeconds, program.bias_reversals};
}

// ---------------------------------------------------------------- calibration

namespace {

double wrap_phi0(double x) { return x - std::floor(x + 0.5); }

}  // namespace

double QubitDegeneracyObservable::compensation(double applied_dac_phi0) const {
  return device::degeneracy_point(params_, phi_cjj_, applied_dac_phi0, tolerance_);
}

double SquidThresholdObservable::compensation(double applied_dac_phi0) const {
  // The switching threshold |cos(pi (phi + applied))| peaks where the total
  // flux is an integer; locate it by golden-section search over one period.
  auto neg_threshold = [&](double x) { return -std::abs(std::cos(kPi * (x + applied_dac_phi0))); };
  double a = wrap_phi0(-applied_dac_phi0) - 0.25;
  double b = a + 0.5;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  while (b - a > 1e-12) {
    if (neg_threshold(c) < neg_threshold(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return wrap_phi0(0.5 * (a + b));
}

double LinearNullObservable::compensation(double applied_dac_phi0) const {
  return wrap_phi0(-applied_dac_phi0);
}

std::unique_ptr<FeedbackObservable> observable_for(DacRole role, const device::QubitParams& qubit,
                                                   double phi_cjj_ext) {
  switch (role) {
    case DacRole::QubitFlux:
      return std::make_unique<QubitDegeneracyObservable>(qubit, phi_cjj_ext);
    case DacRole::Breakout:
      return std::make_unique<SquidThresholdObservable>();
    case DacRole::CcjjMinor1:
    case DacRole::CcjjMinor2:
    case DacRole::LTuner:
    case DacRole::Coupler:
      return std::make_unique<LinearNullObservable>();
    case DacRole::IpCompensator:
      return nullptr;
  }
  return nullptr;
}

CalibrationRecord calibrate_dac(const flux_dac::TwoStageDac& dac, const FeedbackObservable* observable,
                                double analog_line_mutual, Rng& rng, const CalibrationOptions& options,
                                int dac_id) {
  if (observable == nullptr) {
    throw Error(ErrorCode::Unmeasurable, "DAC " + std::to_string(dac_id) + " has no feedback observable");
  }
  if (!(analog_line_mutual > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "analog line mutual must be positive");
  }
  if (options.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  const int nc = options.coarse_quanta;
  const int nf = options.fine_quanta > 0 ? options.fine_quanta : dac.fine.capacity;
  if (nc < 1 || nc > dac.coarse.capacity || nf < 1 || nf > dac.fine.capacity) {
    throw Error(ErrorCode::CapacityExceeded, "calibration quanta exceed the DAC capacity");
  }
  const double sigma = options.noise_sigma_phi0 >= 0.0 ? options.noise_sigma_phi0 : 0.1 * dac.k / dac.gamma;
  std::normal_distribution<double> noise(0.0, 1.0);

  // Compensation is read as analog line current; noise is expressed as the
  // equivalent flux at the device.
  const double phi0 = kFluxQuantum;
  auto measure = [&](double applied, double branch) {
    double sum = 0.0;
    for (int r = 0; r < options.repeats; ++r) {
      const double flux = observable->compensation(applied) + branch + sigma * noise(rng);
      sum += flux * phi0 / analog_line_mutual;
    }
    return sum / options.repeats;
  };

  // Analog mutual from the Phi0 period of the observable in line current.
  const double period = measure(0.0, 1.0) - measure(0.0, 0.0);
  const double m_a = phi0 / period;
  const double base = measure(0.0, 0.0);
  // The small steps used here never cross a branch of the periodic observable.
  const double coarse_flux = -(measure(flux_dac::output_flux(dac.k, dac.gamma, nc, 0), 0.0) - base) * m_a / phi0;
  const double fine_flux = -(measure(flux_dac::output_flux(dac.k, dac.gamma, 0, nf), 0.0) - base) * m_a / phi0;

  CalibrationRecord rec;
  rec.dac = dac_id;
  rec.k = coarse_flux / nc;
  rec.gamma = rec.k * nf / fine_flux;
  rec.analog_mutual = m_a;
  const double s = sigma * std::sqrt(2.0 / options.repeats);
  rec.k_sigma = s / nc;
  rec.gamma_sigma = std::abs(rec.gamma) * std::hypot(s / std::abs(coarse_flux), s / std::abs(fine_flux));
  return rec;
}

void write_calibration(std::ostream& out, const std::vector<CalibrationRecord>& records) {
  config::KeyValueFile f;
  for (const auto& r : records) {
    const std::string sec = "dac." + std::to_string(r.dac);
    f.set(sec, "k", config::format_double(r.k));
    f.set(sec, "gamma", config::format_double(r.gamma));
    f.set(sec, "analog_mutual", config::format_double(r.analog_mutual));
    f.set(sec, "k_sigma", config::format_double(r.k_sigma));
    f.set(sec, "gamma_sigma", config::format_double(r.gamma_sigma));
  }
  f.write(out);
}

std::map<int, CalibrationRecord> load_calibration(const std::string& path) {
  const auto f = config::KeyValueFile::load(path);
  std::map<int, CalibrationRecord> out;
  for (const auto& [name, sec] : f.sections()) {
    if (name.empty() && sec.empty()) continue;
    if (name.rfind("dac.", 0) != 0) {
      throw Error(ErrorCode::ParseError, path + ": unexpected section [" + name + "]");
    }
    CalibrationRecord r;
    r.dac = static_cast<int>(config::parse_long(name.substr(4)));
    r.k = f.get_double(name, "k", 0.0);
    r.gamma = f.get_double(name, "gamma", 0.0);
    r.analog_mutual = f.get_double(name, "analog_mutual", 0.0);
    r.k_sigma = f.get_double(name, "k_sigma", 0.0);
    r.gamma_sigma = f.get_double(name, "gamma_sigma", 0.0);
    if (!(r.k > 0.0) || !(r.gamma > 1.0)) {
      throw Error(ErrorCode::ParseError, path + ": [" + name + "] needs k > 0 and gamma > 1");
    }
    out[r.dac] = r;
  }
  return out;
}

}  // namespace pmm::controller
