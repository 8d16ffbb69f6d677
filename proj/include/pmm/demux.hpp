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
#include <vector>

#include "pmm/error.hpp"
#include "pmm/random.hpp"

namespace pmm::demux {

// Behavioural 1:2 SFQ demultiplexer. Routing is deterministic inside the
// operating window except for a floor error probability; near the window
// edges the error probability rises as an exponential wall and reaches 1 at
// the margins.
struct DemuxGate {
  double nominal_bias_ua = 33.2;
  double bias_margin_low_ua = 24.9;
  double bias_margin_high_ua = 41.5;
  double address_low_mphi0 = 100.0;
  double address_high_mphi0 = 400.0;
  double error_probability = 1e-9;  // floor at the nominal operating point
  double bias_wall_ua = 0.3;
  double address_wall_mphi0 = 5.0;

  // Per-pulse probability that this gate does not route correctly.
  double failure_probability(double bias_ua, double address_mphi0) const;
  bool degenerate() const;
};

// Schematic values of the gate (junction critical currents in uA,
// inductances in pH, bias currents in uA). Metadata only.
struct GateSchematic {
  double j1_j4_to_j7_ua = 10.6;
  double j2_j3_ua = 8.0;
  double l1_ph = 26.0;
  double l2_ph = 41.6;
  double l3_l4_ph = 12.2;
  double l5_l6_ph = 42.5;
  double mutual_ph = 2.3;
  double i1_ua = 4.4;
  double i2_i3_ua = 6.6;
  double i4_i5_ua = 7.8;
};

struct TreeConfig {
  int depth = 6;
  DemuxGate gate;               // template for every gate in the tree
  double broadcast_threshold_ua = 46.5;
  double nominal_address_mphi0 = 250.0;
  double drop_fraction = 0.5;   // errored pulses dropped vs sent to the sibling subtree
  double window_jitter = 0.0;   // relative per-gate jitter of window edges
  std::uint64_t layout_seed = 1;
};

// Shared bias level (per tree) and common address magnitude (shared lines).
struct OperatingPoint {
  double bias_ua = 33.2;
  double address_mphi0 = 250.0;
};

// One SFQ pulse presented to a tree. `address_signs` holds one bit per tree
// level, most significant bit for the root: 1 means positive address current.
// A pulse of polarity -1 needs reversed bias and all address signs reversed to
// reach the same output.
struct PulseOp {
  int tree_id = 0;
  std::uint32_t address_signs = 0;
  int polarity = 1;
  int bias_polarity = 1;

  // Builds the op that delivers a quantum of `polarity` to `leaf`.
  static PulseOp to_leaf(int tree_id, int leaf, int depth, int polarity);
  // Output selected at each level: address sign seen relative to the bias.
  std::uint32_t routing_bits(int depth) const;
};

enum class RouteStatus { Delivered, Dropped, Misrouted };

struct RoutingOutcome {
  RouteStatus status = RouteStatus::Delivered;
  int leaf = -1;         // output reached, -1 when dropped
  int quantum = 0;       // sign of the delivered flux quantum
  int failed_level = -1; // first gate level that erred
};

class BroadcastError : public Error {
 public:
  explicit BroadcastError(std::vector<int> leaves)
      : Error(ErrorCode::Broadcast, "tree overbiased; pulse duplicated to every output"),
        leaves_(std::move(leaves)) {}
  const std::vector<int>& leaves() const noexcept { return leaves_; }

 private:
  std::vector<int> leaves_;
};

class AddressTree {
 public:
  AddressTree(int tree_id, TreeConfig config, std::uint64_t seed);

  int tree_id() const { return tree_id_; }
  int depth() const { return config_.depth; }
  int leaf_count() const { return 1 << config_.depth; }
  const TreeConfig& config() const { return config_; }
  const std::vector<DemuxGate>& gates() const { return gates_; }
  std::vector<DemuxGate>& gates() { return gates_; }

  const OperatingPoint& operating_point() const { return op_; }
  void set_operating_point(OperatingPoint op) { op_ = op; }
  void set_gate_error_probability(double p);
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  // Gate indices (heap order, root = 0) visited on the way to `leaf`.
  std::vector<int> path(int leaf) const;

  // Exact probability that a pulse for `leaf` arrives there at the current
  // operating point.
  double delivery_probability(int leaf) const;

  // Throws Error(OutOfMargin) when the bias is outside the common margins
  // and BroadcastError at or above the broadcast threshold.
  void check_operating_point() const;

  RoutingOutcome route(const PulseOp& op);

 private:
  int tree_id_;
  TreeConfig config_;
  std::vector<DemuxGate> gates_;
  OperatingPoint op_;
  Rng rng_;
};

struct MarginPoint {
  double bias_ua = 0.0;
  double address_mphi0 = 0.0;
  double pass_fraction = 0.0;  // worst delivered fraction over probed leaves
  bool pass = false;
};

inline constexpr double kMarginFailureThreshold = 0.1;

// Monte-Carlo operating-margin map. A point passes when every probed leaf
// fails in fewer than 10% of `trials`. An empty `leaves` probes all leaves.
std::vector<MarginPoint> margin_scan(AddressTree& tree, const std::vector<double>& biases_ua,
                                     const std::vector<double>& addresses_mphi0, int trials,
                                     const std::vector<int>& leaves = {});

// One-sided exact binomial (Clopper-Pearson) upper bound on the per-operation
// error probability.
double error_upper_bound(long long operations, long long observed_errors, double confidence);

// Largest per-pulse error probability for which at least `min_successes` of
// `programs` programmings are pulse-error-free with the given confidence.
double per_pulse_error_budget(long long dac_count, double mean_quanta_per_dac, long long programs,
                              long long min_successes, double confidence);

}  // namespace pmm::demux
