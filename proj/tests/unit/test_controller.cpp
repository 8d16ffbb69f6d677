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
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "pmm/controller.hpp"
#include "pmm/error.hpp"

using namespace pmm;
using namespace pmm::controller;
using flux_dac::Stage;

namespace {

ChipOptions clean_options(std::uint64_t seed = 1) {
  ChipOptions o;
  o.gate_error_probability = 0.0;
  o.seed = seed;
  return o;
}

StateMap random_targets(const Chip& chip, std::mt19937_64& rng, double fraction = 1.0) {
  StateMap m;
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  for (std::size_t i = 0; i < chip.dacs().size(); ++i) {
    if (pick(rng) > fraction) continue;
    const auto& d = chip.dacs()[i];
    std::uniform_int_distribution<int> c(-d.coarse.capacity, d.coarse.capacity);
    std::uniform_int_distribution<int> f(-d.fine.capacity, d.fine.capacity);
    m[static_cast<int>(i)] = {c(rng), f(rng)};
  }
  return m;
}

long abs_sum(const StateMap& a, const StateMap& b) {
  long total = 0;
  for (const auto& [id, x] : a) {
    const auto y = b.count(id) ? b.at(id) : DacCounts{};
    total += std::abs(x.coarse - y.coarse) + std::abs(x.fine - y.fine);
  }
  return total;
}

}  // namespace

TEST_CASE("roles map onto DAC types and tree outputs") {
  CHECK(dac_type_for_role(topology::DacRole::QubitFlux) == flux_dac::DacType::QubitFlux);
  CHECK(dac_type_for_role(topology::DacRole::CcjjMinor2) == flux_dac::DacType::Ccjj);
  CHECK(dac_type_for_role(topology::DacRole::LTuner) == flux_dac::DacType::LTuner);
  CHECK(dac_type_for_role(topology::DacRole::Breakout) == flux_dac::DacType::Coupler);
  const Chip chip(topology::build_grid(1, 1), clean_options());
  CHECK(chip.trees().size() == 2);
  for (int id = 0; id < 64; ++id) {
    for (auto s : {Stage::Coarse, Stage::Fine}) {
      const auto a = chip.address_of(id, s);
      const auto back = chip.stage_at(a.tree, a.leaf);
      REQUIRE(back.has_value());
      CHECK(back->first == id);
      CHECK(back->second == s);
    }
  }
}

TEST_CASE("unchanged targets compile to an empty program") {
  const Chip chip(topology::build_grid(1, 1), clean_options());
  std::mt19937_64 rng(1);
  const auto t = random_targets(chip, rng);
  const auto p = compile(chip, t, t, Mode::Incremental);
  CHECK(p.ops.empty());
  CHECK(p.pulse_count == 0);
  const auto cost = program_cost(p);
  CHECK(cost.pulse_count == 0);
  CHECK(cost.cooldown_s == doctest::Approx(1e-3));
}

TEST_CASE("fresh coupler DAC program is the signed stage deltas") {
  const Chip chip(topology::build_grid(1, 1), clean_options());
  const int dac = chip.grid().coupler_dac(0);
  const auto p = compile(chip, {}, {{dac, {14, -3}}}, Mode::Incremental);
  CHECK(p.pulse_count == 17);
  int coarse_pos = 0, fine_neg = 0;
  for (const auto& op : p.ops) {
    const auto& s = std::get<PulseStep>(op);
    CHECK(s.dac == dac);
    const auto addr = chip.address_of(dac, s.stage);
    CHECK(s.pulse.tree_id == addr.tree);
    demux::AddressTree probe(addr.tree, demux::TreeConfig{}, 1);
    probe.set_gate_error_probability(0.0);
    CHECK(probe.route(s.pulse).leaf == addr.leaf);
    if (s.stage == Stage::Coarse && s.pulse.polarity == 1) ++coarse_pos;
    if (s.stage == Stage::Fine && s.pulse.polarity == -1) ++fine_neg;
  }
  CHECK(coarse_pos == 14);
  CHECK(fine_neg == 3);
  CHECK(p.bias_reversals == 1);
}

TEST_CASE("pulses run in leaf order with positives first on each tree") {
  const Chip chip(topology::build_grid(1, 1), clean_options());
  std::mt19937_64 rng(2);
  const auto p = compile(chip, {}, random_targets(chip, rng), Mode::Incremental);
  int last_tree = -1, last_leaf = -1, last_pol = 1;
  for (const auto& op : p.ops) {
    const auto& s = std::get<PulseStep>(op);
    const auto leaf = chip.address_of(s.dac, s.stage).leaf;
    if (s.pulse.tree_id != last_tree) {
      CHECK(s.pulse.tree_id > last_tree);
      last_tree = s.pulse.tree_id;
      last_leaf = -1;
      last_pol = 1;
    }
    if (s.pulse.polarity != last_pol) {
      CHECK(s.pulse.polarity == -1);
      last_pol = -1;
      last_leaf = -1;
    }
    CHECK(leaf >= last_leaf);
    last_leaf = leaf;
  }
  CHECK(p.bias_reversals <= chip.grid().tree_count());
}

TEST_CASE("capacity violations are rejected") {
  const Chip chip(topology::build_grid(1, 1), clean_options());
  try {
    compile(chip, {}, {{0, {18, 0}}}, Mode::Incremental);
    FAIL("expected CapacityExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapacityExceeded);
  }
  CHECK_THROWS_AS(compile(chip, {}, {{64, {1, 0}}}, Mode::Incremental), Error);
}

TEST_CASE("round trip, idempotence and pulse counts") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    Chip chip(topology::build_grid(1, 1), clean_options(t));
    const auto start = random_targets(chip, rng, 0.5);
    chip.set_states(start);
    const auto targets = random_targets(chip, rng, 0.5);
    const auto inc = compile(chip, chip.states(), targets, Mode::Incremental);
    const auto rst = compile(chip, chip.states(), targets, Mode::ResetFirst);
    CHECK(inc.pulse_count == abs_sum(inc.expected_final, inc.start));
    CHECK(rst.pulse_count == abs_sum(targets, {}));
    CHECK(inc.pulse_count <= program_cost(rst).quanta_moved);
    CHECK(std::none_of(inc.ops.begin(), inc.ops.end(), [](const ProgramOp& o) { return std::holds_alternative<ResetOp>(o); }));

    const auto report = execute(inc, chip, 99);
    CHECK(report.ok());
    for (const auto& [id, c] : targets) CHECK(report.achieved.at(id) == c);
    CHECK(compile(chip, report.achieved, targets, Mode::Incremental).pulse_count == 0);

    Chip other(topology::build_grid(1, 1), clean_options(t));
    other.set_states(start);
    const auto r2 = execute(rst, other, 5);
    CHECK(r2.ok());
    CHECK(r2.achieved == report.achieved);
  }
}

TEST_CASE("reset-first pulse count is the sum of touched targets") {
  Chip chip(topology::build_grid(1, 1), clean_options());
  chip.set_states({{0, {3, 2}}, {5, {-4, 0}}});
  const auto p = compile(chip, chip.states(), {{0, {-2, 2}}, {5, {0, 1}}}, Mode::ResetFirst);
  CHECK(p.pulse_count == 5);
  CHECK(p.reset_quanta == 9);
  int resets = 0;
  for (const auto& op : p.ops) resets += std::holds_alternative<ResetOp>(op);
  CHECK(resets == 4);
  // Routed quanta alone can favour reset-first: emptying needs no pulses.
  const auto inc = compile(chip, chip.states(), {{5, {0, 0}}}, Mode::Incremental);
  const auto rst = compile(chip, chip.states(), {{5, {0, 0}}}, Mode::ResetFirst);
  CHECK(inc.pulse_count == 4);
  CHECK(rst.pulse_count == 0);
  CHECK(inc.pulse_count <= program_cost(rst).quanta_moved);
}

TEST_CASE("small reprogramming is cheaper incrementally") {
  std::mt19937_64 rng(6);
  Chip chip(topology::build_grid(1, 1), clean_options());
  const auto base = random_targets(chip, rng);
  chip.set_states(base);
  auto targets = base;
  for (int id = 0; id < 64; id += 10) targets[id].fine = -targets[id].fine;
  const auto inc = compile(chip, chip.states(), targets, Mode::Incremental);
  const auto rst = compile(chip, chip.states(), targets, Mode::ResetFirst);
  CHECK(inc.pulse_count < rst.pulse_count);
}

TEST_CASE("programming order does not change final states") {
  std::mt19937_64 rng(4);
  Chip chip(topology::build_grid(1, 1), clean_options());
  const auto targets = random_targets(chip, rng);
  auto prog = compile(chip, {}, targets, Mode::Incremental);
  std::shuffle(prog.ops.begin(), prog.ops.end(), rng);
  const auto rep = execute(prog, chip, 1);
  CHECK(rep.ok());
}

TEST_CASE("routing errors surface as discrepancies with a cause") {
  ChipOptions o;
  o.gate_error_probability = 0.05;
  Chip chip(topology::build_grid(1, 1), o);
  std::mt19937_64 rng(5);
  const auto prog = compile(chip, {}, random_targets(chip, rng), Mode::Incremental);
  const auto rep = execute(prog, chip, 3);
  CHECK_FALSE(rep.routing_errors.empty());
  CHECK_FALSE(rep.ok());
  for (const auto& d : rep.discrepancies) CHECK(d.cause != "unknown");
  // Identical seeds reproduce the report.
  Chip again(topology::build_grid(1, 1), o);
  const auto rep2 = execute(prog, again, 3);
  CHECK(rep2.achieved == rep.achieved);
}

TEST_CASE("bias faults abort execution") {
  Chip chip(topology::build_grid(1, 1), clean_options());
  const auto prog = compile(chip, {}, {{0, {1, 0}}}, Mode::Incremental);
  chip.set_operating_point({50.0, 250.0});
  CHECK_THROWS_AS(execute(prog, chip, 1), demux::BroadcastError);
  chip.set_operating_point({10.0, 250.0});
  try {
    execute(prog, chip, 1);
    FAIL("expected OutOfMargin");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfMargin);
  }
}

TEST_CASE("mismatched resets are retried until the probe reads empty") {
  ChipOptions o = clean_options();
  o.reset_mismatch = 0.2;
  Chip chip(topology::build_grid(1, 1), o);
  StateMap full;
  for (int id = 0; id < 64; ++id) full[id] = {5, 5};
  chip.set_states(full);
  const auto prog = compile(chip, chip.states(), StateMap{{0, {1, 1}}}, Mode::ResetFirst);
  const auto rep = execute(prog, chip, 11);
  CHECK(rep.reset_pulses >= 2);
  CHECK(rep.reset_pulses <= 2 * kMaxResetPulses);
  CHECK(rep.ok());
}

TEST_CASE("noise-free calibration recovers k, gamma and the analog mutual") {
  const auto dac = flux_dac::make_dac(flux_dac::DacType::QubitFlux, flux_dac::ParameterSet::Achieved);
  const auto obs = observable_for(topology::DacRole::QubitFlux);
  Rng rng(1);
  CalibrationOptions opts;
  opts.noise_sigma_phi0 = 0.0;
  const auto rec = calibrate_dac(dac, obs.get(), 2e-12, rng, opts, 0);
  CHECK(rec.k == doctest::Approx(3.506e-3).epsilon(1e-5));
  CHECK(rec.gamma == doctest::Approx(dac.gamma).epsilon(1e-5));
  CHECK(rec.analog_mutual == doctest::Approx(2e-12).epsilon(1e-9));
  CHECK(rec.k_sigma == 0.0);
}

TEST_CASE("every observable role calibrates, the Ip compensator cannot") {
  Rng rng(2);
  CalibrationOptions opts;
  opts.noise_sigma_phi0 = 0.0;
  for (auto role : {topology::DacRole::CcjjMinor1, topology::DacRole::LTuner, topology::DacRole::Coupler,
                    topology::DacRole::Breakout}) {
    const auto type = dac_type_for_role(role);
    const auto dac = flux_dac::make_dac(type, flux_dac::ParameterSet::Achieved);
    const auto obs = observable_for(role);
    REQUIRE(obs);
    const auto rec = calibrate_dac(dac, obs.get(), 1e-12, rng, opts);
    CHECK(rec.k == doctest::Approx(dac.k).epsilon(1e-6));
    CHECK(rec.gamma == doctest::Approx(dac.gamma).epsilon(1e-6));
  }
  CHECK(observable_for(topology::DacRole::IpCompensator) == nullptr);
  const auto dac = flux_dac::make_dac(flux_dac::DacType::Coupler, flux_dac::ParameterSet::Achieved);
  try {
    calibrate_dac(dac, nullptr, 1e-12, rng);
    FAIL("expected Unmeasurable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unmeasurable);
  }
}

TEST_CASE("noisy calibration scatters within its reported uncertainty") {
  const auto dac = flux_dac::make_dac(flux_dac::DacType::QubitFlux, flux_dac::ParameterSet::Achieved);
  const auto obs = observable_for(topology::DacRole::QubitFlux);
  Rng rng(3);
  const int n = 200;
  double sum = 0, sum2 = 0, sigma = 0, gsum = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = calibrate_dac(dac, obs.get(), 2e-12, rng);
    sum += r.k;
    sum2 += r.k * r.k;
    sigma = r.k_sigma;
    gsum += r.gamma;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean - dac.k) < 4 * sigma / std::sqrt(n));
  CHECK(sd == doctest::Approx(sigma).epsilon(0.25));
  CHECK(gsum / n == doctest::Approx(dac.gamma).epsilon(0.005));
}

TEST_CASE("calibration file round trip") {
  std::vector<CalibrationRecord> recs = {{0, 3.5e-3, 13.1, 2e-12, 1e-6, 0.02}, {9, 0.019, 10.6, 2e-12, 0, 0}};
  const std::string path = "controller_calibration_test.txt";
  {
    std::ofstream f(path);
    write_calibration(f, recs);
  }
  const auto back = load_calibration(path);
  REQUIRE(back.size() == 2);
  CHECK(back.at(0).k == recs[0].k);
  CHECK(back.at(9).gamma == recs[1].gamma);
  {
    std::ofstream f(path);
    f << "[dac.1]\nk = -1\ngamma = 10\n";
  }
  CHECK_THROWS_AS(load_calibration(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("mode names") {
  CHECK(mode_from_string("incremental") == Mode::Incremental);
  CHECK(mode_from_string("reset") == Mode::ResetFirst);
  CHECK_THROWS_AS(mode_from_string("later"), Error);
}
