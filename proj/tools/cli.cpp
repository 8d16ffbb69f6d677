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

#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pmm/annealer.hpp"
#include "pmm/config.hpp"
#include "pmm/controller.hpp"
#include "pmm/demux.hpp"
#include "pmm/device.hpp"
#include "pmm/error.hpp"
#include "pmm/flux_dac.hpp"
#include "pmm/noise.hpp"
#include "pmm/topology.hpp"

namespace pmm::cli {
namespace {

using config::format_double;

std::string fmt(double v) { return format_double(v); }

// Evenly spaced grid of `points` values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw Error(ErrorCode::InvalidCount, "need at least one point");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    v[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  }
  return v;
}

std::vector<double> logspace(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw Error(ErrorCode::NonPositiveFrequency, "log sweep bounds must be positive");
  auto v = linspace(std::log10(lo), std::log10(hi), points);
  for (auto& x : v) x = std::pow(10.0, x);
  return v;
}

struct Globals {
  std::uint64_t seed = 1;
  std::string out_path;
  std::string parameter_set = "designed";
  std::string dac_params;

  flux_dac::ParameterSet set() const { return flux_dac::parameter_set_from_string(parameter_set); }
  flux_dac::DacParameterTable table() const {
    return dac_params.empty() ? flux_dac::DacParameterTable(set())
                              : flux_dac::DacParameterTable::load(dac_params, set());
  }
};

// ------------------------------------------------------------------ topology

struct TopologyArgs {
  int rows = 1;
  int cols = 1;
  std::string format = "table";
  std::string list;
};

void run_topology(const TopologyArgs& a, std::ostream& out) {
  if (a.rows < 1 || a.cols < 1) throw Error(ErrorCode::InvalidArgument, "rows and cols must be >= 1");
  if (a.list == "edges" || a.list == "dacs") {
    const auto g = topology::build_grid(a.rows, a.cols);
    if (a.list == "edges") {
      out << "coupler,i,j,qubit_i,qubit_j\n";
      for (std::size_t c = 0; c < g.couplers.size(); ++c) {
        const auto& e = g.couplers[c];
        out << c << ',' << e.i << ',' << e.j << ',' << topology::to_string(g.qubits[e.i]) << ','
            << topology::to_string(g.qubits[e.j]) << '\n';
      }
    } else {
      out << "dac,role,device_index,tree,slot\n";
      for (const auto& d : g.dacs) {
        out << d.id << ',' << topology::to_string(d.role) << ',' << d.device.index << ',' << d.tree << ','
            << d.slot << '\n';
      }
    }
    return;
  }
  const auto pc = topology::parts_count(a.rows, a.cols);
  const long cells = static_cast<long>(a.rows) * a.cols;
  if (a.format == "csv") {
    out << "cells,qubits,couplers,dacs,junctions\n"
        << cells << ',' << pc.qubits << ',' << pc.couplers << ',' << pc.dacs << ',' << pc.junctions << '\n';
  } else {
    out << "unit_cells qubits couplers dacs junctions\n"
        << cells << ' ' << pc.qubits << ' ' << pc.couplers << ' ' << pc.dacs << ' ' << pc.junctions << '\n';
  }
}

// ----------------------------------------------------------------------- dac

struct DacArgs {
  std::string type = "qubit_flux";
  std::string sweep = "staircase";
  int extra = 10;
};

void run_dac(const DacArgs& a, const Globals& g, std::ostream& out) {
  const auto type = flux_dac::dac_type_from_string(a.type);
  const auto params = g.table()[type];
  if (a.sweep == "staircase") {
    out << "coarse,fine,flux_phi0\n";
    for (int c = -params.capacity_coarse; c <= params.capacity_coarse; ++c) {
      for (int f = -params.capacity_fine; f <= params.capacity_fine; ++f) {
        out << c << ',' << f << ',' << fmt(flux_dac::output_flux(params.k, params.gamma, c, f)) << '\n';
      }
    }
  } else if (a.sweep == "saturation") {
    auto dac = flux_dac::make_dac(type, params, g.set());
    out << "requested,stored,flux_phi0\n";
    out << 0 << ',' << 0 << ',' << fmt(0.0) << '\n';
    for (int n = 1; n <= params.capacity_coarse + a.extra; ++n) {
      flux_dac::apply_quantum(dac, flux_dac::Stage::Coarse, 1);
      out << n << ',' << dac.coarse.stored << ',' << fmt(flux_dac::output_flux(dac)) << '\n';
    }
  } else if (a.sweep == "summary") {
    out << "type,capacity_coarse,capacity_fine,k_phi0,gamma,fine_step_phi0,overlap_ratio,covered,levels\n";
    const auto table = g.table();
    for (auto t : flux_dac::kAllDacTypes) {
      const auto& p = table[t];
      const auto cov = flux_dac::coverage_check(p.capacity_fine, p.gamma);
      out << flux_dac::to_string(t) << ',' << p.capacity_coarse << ',' << p.capacity_fine << ',' << fmt(p.k)
          << ',' << fmt(p.gamma) << ',' << fmt(p.k / p.gamma) << ',' << fmt(cov.overlap_ratio) << ','
          << (cov.covered ? 1 : 0) << ',' << flux_dac::representable_levels(p) << '\n';
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown sweep '" + a.sweep + "'");
  }
}

// --------------------------------------------------------------------- demux

struct DemuxArgs {
  double p_gate = 1e-3;
  long pulses = 100000;
  double bias = 33.2;
  double address = 250.0;
};

void run_demux(const DemuxArgs& a, const Globals& g, std::ostream& out) {
  if (a.pulses < 1) throw Error(ErrorCode::InvalidCount, "pulses must be >= 1");
  demux::TreeConfig tc;
  tc.gate.error_probability = a.p_gate;
  demux::AddressTree tree(0, tc, derive_seed(g.seed, 1));
  tree.set_operating_point({a.bias, a.address});
  Rng pick(derive_seed(g.seed, 2));
  long delivered = 0, dropped = 0, misrouted = 0;
  for (long i = 0; i < a.pulses; ++i) {
    const int leaf = static_cast<int>(pick() % static_cast<std::uint64_t>(tree.leaf_count()));
    const int polarity = (pick() & 1u) ? 1 : -1;
    const auto r = tree.route(demux::PulseOp::to_leaf(0, leaf, tree.depth(), polarity));
    if (r.status == demux::RouteStatus::Dropped) {
      ++dropped;
    } else if (r.status == demux::RouteStatus::Misrouted || r.leaf != leaf) {
      ++misrouted;
    } else {
      ++delivered;
    }
  }
  // Every leaf sees the same gate stack, so leaf 0 gives the per-pulse prediction.
  const double predicted = 1.0 - tree.delivery_probability(0);
  const double rate = static_cast<double>(dropped + misrouted) / a.pulses;
  const double sigma = std::sqrt(predicted * (1.0 - predicted) / a.pulses);
  out << "pulses,delivered,dropped,misrouted,error_rate,predicted,sigma\n"
      << a.pulses << ',' << delivered << ',' << dropped << ',' << misrouted << ',' << fmt(rate) << ','
      << fmt(predicted) << ',' << fmt(sigma) << '\n';
}

// ------------------------------------------------------------------- margins

struct MarginArgs {
  double bias_min = 20.0, bias_max = 45.0;
  int bias_points = 26;
  double addr_min = 50.0, addr_max = 450.0;
  int addr_points = 21;
  int trials = 100;
  double p_gate = 1e-9;
  double jitter = 0.0;
};

void run_margins(const MarginArgs& a, const Globals& g, std::ostream& out) {
  demux::TreeConfig tc;
  tc.gate.error_probability = a.p_gate;
  tc.window_jitter = a.jitter;
  tc.layout_seed = derive_seed(g.seed, 3);
  demux::AddressTree tree(0, tc, derive_seed(g.seed, 4));
  const auto pts = demux::margin_scan(tree, linspace(a.bias_min, a.bias_max, a.bias_points),
                                      linspace(a.addr_min, a.addr_max, a.addr_points), a.trials);
  out << "bias_ua,address_mphi0,pass_fraction,pass\n";
  for (const auto& p : pts) {
    out << fmt(p.bias_ua) << ',' << fmt(p.address_mphi0) << ',' << fmt(p.pass_fraction) << ','
        << (p.pass ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------- errorbound

struct ErrorBoundArgs {
  double operations = 15e6;
  long long errors = 0;
  double confidence = 0.95;
  long long dacs = 0;
  double quanta = 20.0;
  long long programs = 100;
  long long successes = 99;
};

void run_errorbound(const ErrorBoundArgs& a, std::ostream& out) {
  if (a.dacs > 0) {
    const double p = demux::per_pulse_error_budget(a.dacs, a.quanta, a.programs, a.successes, a.confidence);
    out << "dacs,quanta_per_dac,programs,successes,confidence,per_pulse_error\n"
        << a.dacs << ',' << fmt(a.quanta) << ',' << a.programs << ',' << a.successes << ',' << fmt(a.confidence)
        << ',' << fmt(p) << '\n';
    return;
  }
  const auto n = static_cast<long long>(std::llround(a.operations));
  const double exact = demux::error_upper_bound(n, a.errors, a.confidence);
  const double poisson = a.errors == 0 ? -std::log1p(-a.confidence) / static_cast<double>(n) : NAN;
  out << "operations,errors,confidence,upper_bound,poisson_approx\n"
      << n << ',' << a.errors << ',' << fmt(a.confidence) << ',' << fmt(exact) << ','
      << (std::isnan(poisson) ? std::string("nan") : fmt(poisson)) << '\n';
}

// --------------------------------------------------------------------- noise

struct NoiseArgs {
  double f_min = 1e6;
  double f_max = 1e11;
  int points = 51;
  double temperature = 20e-3;
};

void run_noise(const NoiseArgs& a, std::ostream& out, std::ostream& err) {
  noise::NoiseCircuitParams p;
  p.temperature = a.temperature;
  p.validate();
  if (!noise::lumped_model_valid(a.f_max)) {
    err << "warning: frequencies above " << fmt(noise::kLumpedValidityCeilingHz)
        << " Hz are outside the lumped-element model\n";
  }
  out << "f_hz,r_eq_empty_ohm,r_eq_full_ohm,flux_noise_empty_phi0,flux_noise_full_phi0\n";
  for (double f : logspace(a.f_min, a.f_max, a.points)) {
    const double re = noise::r_eq(p, f, noise::DacFill::Empty);
    const double rf = noise::r_eq(p, f, noise::DacFill::Full);
    out << fmt(f) << ',' << fmt(re) << ',' << fmt(rf) << ',' << fmt(noise::flux_noise_density(re, p.l_q, p.temperature))
        << ',' << fmt(noise::flux_noise_density(rf, p.l_q, p.temperature)) << '\n';
  }
}

// -------------------------------------------------------------------- device

struct DeviceArgs {
  std::string what = "wells";
  double phi_cjj = 1.0;
  double from = -0.1;
  double to = 0.1;
  int points = 21;
  double i_c = 2.5e-6;
};

void run_device(const DeviceArgs& a, std::ostream& out) {
  device::QubitParams q;
  q.i_c_total = a.i_c;
  q.validate();
  const auto xs = linspace(a.from, a.to, a.points);
  if (a.what == "wells") {
    out << "phi_q_ext,left_phi_q,left_energy,right_phi_q,right_energy\n";
    for (double x : xs) {
      const auto w = device::find_wells(q, x, a.phi_cjj);
      out << fmt(x) << ',' << fmt(w.left.phi_q) << ',' << fmt(w.left.energy) << ',' << fmt(w.right.phi_q) << ','
          << fmt(w.right.energy) << '\n';
    }
  } else if (a.what == "degeneracy") {
    out << "applied_phi0,degeneracy_phi0\n";
    for (double x : xs) out << fmt(x) << ',' << fmt(device::degeneracy_point(q, a.phi_cjj, x)) << '\n';
  } else if (a.what == "coupler") {
    out << "flux_phi0,mutual_h\n";
    for (double x : xs) out << fmt(x) << ',' << fmt(device::coupler_mutual(x)) << '\n';
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown quantity '" + a.what + "'");
  }
}

// -------------------------------------------------------------------- anneal

struct AnnealArgs {
  std::string problem;
  std::string schedule;
  double tf = 100.0;
  int repeats = 1000;
  int steps = 0;
  std::string integrator = "cfm4";
};

void run_anneal(const AnnealArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto p = annealer::load_problem(a.problem);
  const auto sched = a.schedule.empty() ? annealer::AnnealSchedule::standard(a.tf)
                                        : annealer::AnnealSchedule::load(a.schedule, a.tf);
  annealer::EvolutionOptions opts;
  opts.steps = a.steps;
  if (a.integrator == "midpoint") {
    opts.integrator = annealer::Integrator::Midpoint;
  } else if (a.integrator != "cfm4") {
    throw Error(ErrorCode::InvalidArgument, "unknown integrator '" + a.integrator + "'");
  }
  const auto r = annealer::anneal(p, sched, a.repeats, g.seed, opts);
  out << "repeat";
  for (int j = 0; j < p.n; ++j) out << ",s" << j;
  out << ",energy\n";
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    out << i;
    for (int s : r.outcomes[i]) out << ',' << s;
    out << ',' << fmt(r.energies[i]) << '\n';
  }
  err << "ground_fraction " << fmt(r.ground_fraction) << " optimum " << fmt(r.optimum) << " norm "
      << fmt(r.final_norm) << '\n';
}

// ------------------------------------------------------------------- program

struct ProgramArgs {
  std::string problem;
  std::string calibration;
  std::string mode = "incremental";
  int rows = 1;
  int cols = 1;
  double p_gate = 1e-9;
  double reset_mismatch = 0.0;
};

int run_program(const ProgramArgs& a, const Globals& g, std::ostream& out) {
  const auto grid = topology::build_grid(a.rows, a.cols);
  const auto problem = annealer::load_problem(a.problem, &grid, static_cast<int>(grid.qubits.size()));
  annealer::QuantizeConfig qc;
  qc.dacs = g.table();
  if (!a.calibration.empty()) {
    for (const auto& [id, rec] : controller::load_calibration(a.calibration)) {
      if (id < 0 || id >= static_cast<int>(grid.dacs.size())) {
        throw Error(ErrorCode::OutOfRange, "calibration names unknown DAC " + std::to_string(id));
      }
      auto p = qc.dacs[controller::dac_type_for_role(grid.dacs[id].role)];
      p.k = rec.k;
      p.gamma = rec.gamma;
      qc.per_dac[id] = p;
    }
  }
  const auto q = annealer::quantize_problem(problem, grid, qc);

  controller::ChipOptions co;
  co.parameters = qc.dacs;
  co.gate_error_probability = a.p_gate;
  co.reset_mismatch = a.reset_mismatch;
  co.seed = derive_seed(g.seed, 5);
  controller::Chip chip(grid, co);
  const auto prog = controller::compile(chip, chip.states(), q.targets, controller::mode_from_string(a.mode));
  const auto report = controller::execute(prog, chip, derive_seed(g.seed, 6));
  const auto cost = controller::program_cost(prog);

  out << "mode " << a.mode << '\n'
      << "pulse_count " << cost.pulse_count << '\n'
      << "quanta_moved " << cost.quanta_moved << '\n'
      << "bias_reversals " << cost.bias_reversals << '\n'
      << "cooldown_s " << fmt(cost.cooldown_s) << '\n'
      << "reset_pulses " << report.reset_pulses << '\n'
      << "routing_errors " << report.routing_errors.size() << '\n'
      << "residuals " << report.residuals.size() << '\n'
      << "saturations " << report.saturations << '\n'
      << "max_relative_error " << fmt(q.max_relative_error) << '\n'
      << "discrepancies " << report.discrepancies.size() << '\n';
  for (const auto& e : report.routing_errors) {
    out << "routing_error pulse=" << e.pulse_index << " dac=" << e.intended_dac
        << " stage=" << flux_dac::to_string(e.intended_stage)
        << " status=" << (e.outcome.status == demux::RouteStatus::Dropped ? "dropped" : "misrouted")
        << " level=" << e.outcome.failed_level << '\n';
  }
  for (const auto& d : report.discrepancies) {
    out << "discrepancy dac=" << d.dac << " expected=" << d.expected.coarse << ',' << d.expected.fine
        << " achieved=" << d.achieved.coarse << ',' << d.achieved.fine << " cause=" << d.cause << '\n';
  }
  return report.ok() ? kExitOk : kExitDomainError;
}

// ----------------------------------------------------------------- calibrate

struct CalibrateArgs {
  int rows = 1;
  int cols = 1;
  int dac = -1;
  double k_spread = flux_dac::kFabricationSpread;
  double noise = -1.0;
  double analog_mutual_ph = 2.0;
  std::string format = "calibration";
};

int run_calibrate(const CalibrateArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto grid = topology::build_grid(a.rows, a.cols);
  controller::ChipOptions co;
  co.parameters = g.table();
  co.k_spread = a.k_spread;
  co.seed = derive_seed(g.seed, 7);
  const controller::Chip chip(grid, co);
  Rng rng(derive_seed(g.seed, 8));
  controller::CalibrationOptions opts;
  opts.noise_sigma_phi0 = a.noise;

  std::vector<int> ids;
  if (a.dac >= 0) {
    if (a.dac >= static_cast<int>(grid.dacs.size())) throw Error(ErrorCode::OutOfRange, "no such DAC");
    ids.push_back(a.dac);
  } else {
    for (const auto& d : grid.dacs) ids.push_back(d.id);
  }
  std::vector<controller::CalibrationRecord> recs;
  std::vector<int> skipped;
  for (int id : ids) {
    const auto obs = controller::observable_for(grid.dacs[id].role);
    if (!obs && a.dac < 0) {
      skipped.push_back(id);
      continue;
    }
    recs.push_back(controller::calibrate_dac(chip.dacs()[id], obs.get(), a.analog_mutual_ph * 1e-12, rng, opts, id));
  }
  if (!skipped.empty()) err << "skipped " << skipped.size() << " DACs without a feedback observable\n";
  if (a.format == "csv") {
    out << "dac,role,k_true,k,k_sigma,gamma_true,gamma,gamma_sigma,analog_mutual_h\n";
    for (const auto& r : recs) {
      const auto& d = chip.dacs()[r.dac];
      out << r.dac << ',' << topology::to_string(grid.dacs[r.dac].role) << ',' << fmt(d.k) << ',' << fmt(r.k) << ','
          << fmt(r.k_sigma) << ',' << fmt(d.gamma) << ',' << fmt(r.gamma) << ',' << fmt(r.gamma_sigma) << ','
          << fmt(r.analog_mutual) << '\n';
    }
  } else if (a.format == "calibration") {
    controller::write_calibration(out, recs);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown format '" + a.format + "'");
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Behavioural model of an on-chip programmable magnetic memory control system", "pmm-twin"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file");

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "random seed (default: $PMM_SEED or 1)");
  app.add_option("--out", g.out_path, "write data to FILE instead of stdout");
  app.add_option("--parameter-set", g.parameter_set, "DAC parameters")->check(CLI::IsMember({"designed", "achieved"}));
  app.add_option("--dac-params", g.dac_params, "key=value file overriding DAC parameters");

  TopologyArgs ta;
  auto* topo = app.add_subcommand("topology", "parts count and graph of an m x n tiling");
  topo->add_option("--rows", ta.rows);
  topo->add_option("--cols", ta.cols);
  topo->add_option("--format", ta.format)->check(CLI::IsMember({"table", "csv"}));
  topo->add_option("--list", ta.list)->check(CLI::IsMember({"edges", "dacs"}));

  DacArgs da;
  auto* dac = app.add_subcommand("dac", "DAC transfer staircase, saturation and coverage");
  dac->add_option("--type", da.type)->check(CLI::IsMember({"qubit_flux", "ccjj", "l_tuner", "coupler"}));
  dac->add_option("--sweep", da.sweep)->check(CLI::IsMember({"staircase", "saturation", "summary"}));
  dac->add_option("--extra", da.extra, "pulses past capacity in a saturation sweep");

  DemuxArgs dm;
  auto* dmx = app.add_subcommand("demux", "Monte-Carlo routing statistics of one address tree");
  dmx->add_option("--p-gate", dm.p_gate);
  dmx->add_option("--pulses", dm.pulses);
  dmx->add_option("--bias", dm.bias, "bias current, uA");
  dmx->add_option("--address", dm.address, "address flux, mPhi0");

  MarginArgs ma;
  auto* mar = app.add_subcommand("margins", "operating-margin map of an address tree");
  mar->add_option("--bias-min", ma.bias_min);
  mar->add_option("--bias-max", ma.bias_max);
  mar->add_option("--bias-points", ma.bias_points);
  mar->add_option("--address-min", ma.addr_min);
  mar->add_option("--address-max", ma.addr_max);
  mar->add_option("--address-points", ma.addr_points);
  mar->add_option("--trials", ma.trials);
  mar->add_option("--p-gate", ma.p_gate);
  mar->add_option("--jitter", ma.jitter, "relative per-gate jitter of window edges");

  ErrorBoundArgs ea;
  auto* eb = app.add_subcommand("errorbound", "binomial error bounds and per-pulse budgets");
  eb->add_option("--operations", ea.operations);
  eb->add_option("--errors", ea.errors);
  eb->add_option("--confidence", ea.confidence);
  eb->add_option("--dacs", ea.dacs, "compute a per-pulse budget for this many DACs");
  eb->add_option("--quanta", ea.quanta, "mean quanta per DAC");
  eb->add_option("--programs", ea.programs);
  eb->add_option("--successes", ea.successes);

  NoiseArgs na;
  auto* noi = app.add_subcommand("noise", "equivalent resistance and flux noise sweep");
  noi->add_option("--f-min", na.f_min);
  noi->add_option("--f-max", na.f_max);
  noi->add_option("--points", na.points);
  noi->add_option("--temperature", na.temperature, "K");

  DeviceArgs dv;
  auto* dev = app.add_subcommand("device", "qubit wells, degeneracy point and coupler response");
  dev->add_option("--what", dv.what)->check(CLI::IsMember({"wells", "degeneracy", "coupler"}));
  dev->add_option("--phi-cjj", dv.phi_cjj);
  dev->add_option("--from", dv.from);
  dev->add_option("--to", dv.to);
  dev->add_option("--points", dv.points);
  dev->add_option("--ic", dv.i_c, "total CJJ critical current, A");

  AnnealArgs aa;
  auto* ann = app.add_subcommand("anneal", "closed-system anneal of a small Ising problem");
  ann->add_option("--problem", aa.problem)->required();
  ann->add_option("--schedule", aa.schedule);
  ann->add_option("--tf", aa.tf, "anneal time, ns");
  ann->add_option("--repeats", aa.repeats);
  ann->add_option("--steps", aa.steps);
  ann->add_option("--integrator", aa.integrator)->check(CLI::IsMember({"cfm4", "midpoint"}));

  ProgramArgs pa;
  auto* prg = app.add_subcommand("program", "quantize a problem, compile and execute its pulse program");
  prg->add_option("--problem", pa.problem)->required();
  prg->add_option("--calibration", pa.calibration);
  prg->add_option("--mode", pa.mode)->check(CLI::IsMember({"incremental", "reset"}));
  prg->add_option("--rows", pa.rows);
  prg->add_option("--cols", pa.cols);
  prg->add_option("--p-gate", pa.p_gate);
  prg->add_option("--reset-mismatch", pa.reset_mismatch);

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "feedback calibration of DAC k and gamma");
  cal->add_option("--rows", ca.rows);
  cal->add_option("--cols", ca.cols);
  cal->add_option("--dac", ca.dac, "calibrate one DAC only");
  cal->add_option("--k-spread", ca.k_spread, "relative fabrication spread of k");
  cal->add_option("--noise", ca.noise, "measurement noise, Phi0 (default 0.1 FINE step)");
  cal->add_option("--analog-mutual", ca.analog_mutual_ph, "analog line mutual, pH");
  cal->add_option("--format", ca.format)->check(CLI::IsMember({"calibration", "csv"}));

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }
  if (seed_opt->count() == 0) {
    if (const char* env = std::getenv("PMM_SEED")) {
      try {
        g.seed = static_cast<std::uint64_t>(config::parse_long(env));
      } catch (const Error&) {
        err << "error: PMM_SEED is not an integer\n";
        return kExitUsage;
      }
    }
  }

  std::ostringstream data;
  int code = kExitOk;
  try {
    if (*topo) run_topology(ta, data);
    if (*dac) run_dac(da, g, data);
    if (*dmx) run_demux(dm, g, data);
    if (*mar) run_margins(ma, g, data);
    if (*eb) run_errorbound(ea, data);
    if (*noi) run_noise(na, data, err);
    if (*dev) run_device(dv, data);
    if (*ann) run_anneal(aa, g, data, err);
    if (*prg) code = run_program(pa, g, data);
    if (*cal) code = run_calibrate(ca, g, data, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }

  if (g.out_path.empty()) {
    out << data.str();
  } else {
    std::ofstream f(g.out_path, std::ios::binary);
    f << data.str();
    if (!f) {
      err << "error: cannot write " << g.out_path << '\n';
      return kExitDomainError;
    }
  }
  return code;
}

}  // namespace pmm::cli
