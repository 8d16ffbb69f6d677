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

#include "pmm/demux.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>

namespace pmm::demux {

bool DemuxGate::degenerate() const {
  return bias_margin_low_ua == bias_margin_high_ua || address_low_mphi0 == address_high_mphi0;
}

double DemuxGate::failure_probability(double bias_ua, double address_mphi0) const {
  const double b = std::abs(bias_ua);
  const double a = std::abs(address_mphi0);
  if (degenerate()) {
    // A zero-width window only operates exactly at its single point.
    const bool bias_ok = bias_margin_low_ua == bias_margin_high_ua ? b == bias_margin_low_ua
                                                                   : b > bias_margin_low_ua && b < bias_margin_high_ua;
    const bool addr_ok = address_low_mphi0 == address_high_mphi0
                             ? a == address_low_mphi0
                             : a > address_low_mphi0 && a < address_high_mphi0;
    return bias_ok && addr_ok ? error_probability : 1.0;
  }
  if (b <= bias_margin_low_ua || b >= bias_margin_high_ua || a <= address_low_mphi0 ||
      a >= address_high_mphi0) {
    return 1.0;
  }
  const double p = error_probability + std::exp(-(b - bias_margin_low_ua) / bias_wall_ua) +
                   std::exp(-(bias_margin_high_ua - b) / bias_wall_ua) +
                   std::exp(-(a - address_low_mphi0) / address_wall_mphi0) +
                   std::exp(-(address_high_mphi0 - a) / address_wall_mphi0);
  return std::min(1.0, p);
}

PulseOp PulseOp::to_leaf(int tree_id, int leaf, int depth, int polarity) {
  PulseOp op;
  op.tree_id = tree_id;
  op.polarity = polarity;
  op.bias_polarity = polarity;
  const std::uint32_t mask = (1u << depth) - 1u;
  op.address_signs = polarity > 0 ? static_cast<std::uint32_t>(leaf) & mask
                                  : ~static_cast<std::uint32_t>(leaf) & mask;
  return op;
}

std::uint32_t PulseOp::routing_bits(int depth) const {
  const std::uint32_t mask = (1u << depth) - 1u;
  return bias_polarity > 0 ? address_signs & mask : ~address_signs & mask;
}

AddressTree::AddressTree(int tree_id, TreeConfig config, std::uint64_t seed)
    : tree_id_(tree_id), config_(config), rng_(seed) {
  if (config_.depth < 1 || config_.depth > 20) {
    throw Error(ErrorCode::InvalidArgument, "tree depth must be in 1..20");
  }
  const auto& g = config_.gate;
  if (!g.degenerate() &&
      !(g.bias_margin_low_ua < g.nominal_bias_ua && g.nominal_bias_ua < g.bias_margin_high_ua)) {
    throw Error(ErrorCode::InvalidArgument, "gate needs margin_low < nominal < margin_high");
  }
  if (g.error_probability < 0.0 || g.error_probability > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "gate error probability must be in [0, 1]");
  }
  gates_.assign((1u << config_.depth) - 1u, g);
  if (config_.window_jitter > 0.0) {
    // Fixed fabrication layout, independent of the routing stream.
    Rng layout(derive_seed(config_.layout_seed, static_cast<std::uint64_t>(tree_id)));
    const double bw = g.bias_margin_high_ua - g.bias_margin_low_ua;
    const double aw = g.address_high_mphi0 - g.address_low_mphi0;
    auto jitter = [&](double width) {
      return (2.0 * uniform01(layout) - 1.0) * config_.window_jitter * width;
    };
    for (auto& gate : gates_) {
      gate.bias_margin_low_ua += jitter(bw);
      gate.bias_margin_high_ua += jitter(bw);
      gate.address_low_mphi0 += jitter(aw);
      gate.address_high_mphi0 += jitter(aw);
    }
  }
  op_ = {g.nominal_bias_ua, config_.nominal_address_mphi0};
}

void AddressTree::set_gate_error_probability(double p) {
  if (p < 0.0 || p > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "gate error probability must be in [0, 1]");
  }
  config_.gate.error_probability = p;
  for (auto& g : gates_) g.error_probability = p;
}

std::vector<int> AddressTree::path(int leaf) const {
  std::vector<int> out;
  out.reserve(config_.depth);
  int node = 0;
  for (int level = 0; level < config_.depth; ++level) {
    out.push_back(node);
    const int bit = (leaf >> (config_.depth - 1 - level)) & 1;
    node = 2 * node + 1 + bit;
  }
  return out;
}

double AddressTree::delivery_probability(int leaf) const {
  double p = 1.0;
  for (int g : path(leaf)) {
    p *= 1.0 - gates_[g].failure_probability(op_.bias_ua, op_.address_mphi0);
  }
  return p;
}

void AddressTree::check_operating_point() const {
  const double b = std::abs(op_.bias_ua);
  if (b >= config_.broadcast_threshold_ua) {
    std::vector<int> all(leaf_count());
    for (int i = 0; i < leaf_count(); ++i) all[i] = i;
    throw BroadcastError(std::move(all));
  }
  const auto& g = config_.gate;
  const bool inside = g.degenerate() ? b >= g.bias_margin_low_ua && b <= g.bias_margin_high_ua
                                     : b > g.bias_margin_low_ua && b < g.bias_margin_high_ua;
  if (!inside) {
    throw Error(ErrorCode::OutOfMargin, "bias " + std::to_string(b) + " uA outside [" +
                                            std::to_string(g.bias_margin_low_ua) + ", " +
                                            std::to_string(g.bias_margin_high_ua) + "]");
  }
}

RoutingOutcome AddressTree::route(const PulseOp& op) {
  if (op.polarity != 1 && op.polarity != -1) {
    throw Error(ErrorCode::InvalidArgument, "pulse polarity must be +1 or -1");
  }
  if (op.polarity != op.bias_polarity) {
    throw Error(ErrorCode::InvalidArgument, "pulse polarity must match the bias polarity");
  }
  check_operating_point();

  const std::uint32_t bits = op.routing_bits(config_.depth);
  RoutingOutcome out;
  out.quantum = op.polarity;
  int node = 0;
  int leaf = 0;
  for (int level = 0; level < config_.depth; ++level) {
    int bit = static_cast<int>((bits >> (config_.depth - 1 - level)) & 1u);
    const double p = gates_[node].failure_probability(op_.bias_ua, op_.address_mphi0);
    if (p > 0.0 && uniform01(rng_) < p) {
      if (out.failed_level < 0) out.failed_level = level;
      if (uniform01(rng_) < config_.drop_fraction) {
        out.status = RouteStatus::Dropped;
        out.leaf = -1;
        return out;
      }
      bit ^= 1;
      out.status = RouteStatus::Misrouted;
    }
    leaf = (leaf << 1) | bit;
    node = 2 * node + 1 + bit;
  }
  out.leaf = leaf;
  return out;
}

std::vector<MarginPoint> margin_scan(AddressTree& tree, const std::vector<double>& biases_ua,
                                     const std::vector<double>& addresses_mphi0, int trials,
                                     const std::vector<int>& leaves) {
  if (trials < 10) throw Error(ErrorCode::InvalidCount, "margin scan needs at least 10 trials");
  std::vector<int> probe = leaves;
  if (probe.empty()) {
    for (int i = 0; i < tree.leaf_count(); ++i) probe.push_back(i);
  }
  const auto saved = tree.operating_point();
  std::vector<MarginPoint> out;
  out.reserve(biases_ua.size() * addresses_mphi0.size());
  for (double bias : biases_ua) {
    for (double addr : addresses_mphi0) {
      tree.set_operating_point({bias, addr});
      double worst = 1.0;
      bool operable = true;
      try {
        tree.check_operating_point();
      } catch (const Error&) {
        operable = false;
      }
      if (!operable) {
        worst = 0.0;
      } else {
        for (int leaf : probe) {
          const auto op = PulseOp::to_leaf(tree.tree_id(), leaf, tree.depth(), 1);
          int ok = 0;
          for (int t = 0; t < trials; ++t) {
            const auto r = tree.route(op);
            if (r.status == RouteStatus::Delivered && r.leaf == leaf) ++ok;
          }
          worst = std::min(worst, static_cast<double>(ok) / trials);
        }
      }
      out.push_back({bias, addr, worst, 1.0 - worst < kMarginFailureThreshold});
    }
  }
  tree.set_operating_point(saved);
  return out;
}

double error_upper_bound(long long operations, long long observed_errors, double confidence) {
  if (operations <= 0) throw Error(ErrorCode::InvalidCount, "operations must be positive");
  if (observed_errors < 0 || observed_errors > operations) {
    throw Error(ErrorCode::InvalidCount, "observed errors must be in [0, operations]");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence must be in (0, 1)");
  }
  using boost::math::binomial_distribution;
  return binomial_distribution<>::find_upper_bound_on_p(
      static_cast<double>(operations), static_cast<double>(observed_errors), 1.0 - confidence,
      binomial_distribution<>::clopper_pearson_exact_interval);
}

double per_pulse_error_budget(long long dac_count, double mean_quanta_per_dac, long long programs,
                              long long min_successes, double confidence) {
  if (dac_count <= 0 || mean_quanta_per_dac <= 0.0 || programs <= 0 || min_successes <= 0) {
    throw Error(ErrorCode::InvalidCount, "counts must be positive");
  }
  if (min_successes > programs) {
    throw Error(ErrorCode::InvalidCount, "min_successes exceeds programs");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence must be in (0, 1)");
  }
  const double pulses = static_cast<double>(dac_count) * mean_quanta_per_dac;
  const double n = static_cast<double>(programs);
  const double m = static_cast<double>(min_successes);

  // P(successes >= m) for a programming failure probability u; decreasing in u.
  auto prob_enough = [&](double u) {
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    boost::math::binomial_distribution<> failures(n, u);
    return boost::math::cdf(failures, n - m);
  };

  // Bisection in log space on the per-programming failure probability.
  double lo = -300.0;
  double hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (prob_enough(std::pow(10.0, mid)) >= confidence) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double u = std::pow(10.0, lo);
  // (1 - p)^pulses = 1 - u
  return -std::expm1(std::log1p(-u) / pulses);
}

}  // namespace pmm::demux
