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

#include "pmm/annealer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "pmm/config.hpp"
#include "pmm/error.hpp"
#include "pmm/random.hpp"
#include "pmm/units.hpp"

namespace pmm::annealer {

using cd = std::complex<double>;

IsingProblem IsingProblem::zeros(int n) {
  IsingProblem p;
  p.n = n;
  p.h.assign(static_cast<size_t>(n), 0.0);
  return p;
}

void IsingProblem::set_coupling(int i, int j, double value) {
  if (i == j) throw Error(ErrorCode::InvalidArgument, "coupling needs two distinct spins");
  if (i > j) std::swap(i, j);
  couplings[{i, j}] = value;
}

void IsingProblem::validate(const topology::UnitCellGrid* grid) const {
  if (n < 0 || static_cast<int>(h.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "bias vector length must equal n");
  }
  for (double v : h) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite bias");
  }
  for (const auto& [key, v] : couplings) {
    const auto [i, j] = key;
    if (!(0 <= i && i < j && j < n)) {
      throw Error(ErrorCode::InvalidArgument, "coupling index out of range or not i < j");
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite coupling");
    if (grid && !grid->has_edge(i, j)) {
      throw Error(ErrorCode::InvalidArgument,
                  "coupling (" + std::to_string(i) + "," + std::to_string(j) + ") not in allowed edge set");
    }
  }
}

IsingProblem read_problem(std::istream& in, const topology::UnitCellGrid* grid, int min_n) {
  std::map<int, double> biases;
  std::map<std::pair<int, int>, double> couplings;
  std::string line;
  int lineno = 0;
  int max_index = -1;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ParseError, "problem line " + std::to_string(lineno) + ": " + why);
  };
  auto index = [&](const std::string& tok) {
    long v = 0;
    try {
      v = config::parse_long(tok);
    } catch (const Error&) {
      fail("bad index '" + tok + "'");
    }
    if (v < 0 || v > std::numeric_limits<int>::max()) fail("index out of range");
    return static_cast<int>(v);
  };
  auto value = [&](const std::string& tok) {
    double v = 0.0;
    try {
      v = config::parse_double(tok);
    } catch (const Error&) {
      fail("bad value '" + tok + "'");
    }
    if (!std::isfinite(v)) fail("non-finite value");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok[0] == "h") {
      if (tok.size() != 3) fail("expected 'h <j> <value>'");
      const int j = index(tok[1]);
      if (biases.count(j)) fail("duplicate bias for spin " + tok[1]);
      biases[j] = value(tok[2]);
      max_index = std::max(max_index, j);
    } else if (tok[0] == "K") {
      if (tok.size() != 4) fail("expected 'K <i> <j> <value>'");
      const int i = index(tok[1]);
      const int j = index(tok[2]);
      if (i >= j) fail("coupling indices must satisfy i < j");
      if (couplings.count({i, j})) fail("duplicate coupling");
      if (grid && !grid->has_edge(i, j)) fail("edge (" + tok[1] + "," + tok[2] + ") not in allowed edge set");
      couplings[{i, j}] = value(tok[3]);
      max_index = std::max(max_index, j);
    } else {
      fail("unknown record '" + tok[0] + "'");
    }
  }
  IsingProblem p = IsingProblem::zeros(std::max(max_index + 1, min_n));
  for (const auto& [j, v] : biases) p.h[static_cast<size_t>(j)] = v;
  p.couplings = std::move(couplings);
  return p;
}

IsingProblem load_problem(const std::string& path, const topology::UnitCellGrid* grid, int min_n) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_problem(in, grid, min_n);
}

void write_problem(std::ostream& out, const IsingProblem& p) {
  for (int j = 0; j < p.n; ++j) {
    if (p.h[static_cast<size_t>(j)] != 0.0) {
      out << "h " << j << ' ' << config::format_double(p.h[static_cast<size_t>(j)]) << '\n';
    }
  }
  for (const auto& [key, v] : p.couplings) {
    out << "K " << key.first << ' ' << key.second << ' ' << config::format_double(v) << '\n';
  }
}

double objective(const IsingProblem& p, std::span<const int> spins) {
  if (static_cast<int>(spins.size()) != p.n) {
    throw Error(ErrorCode::SpinDomain, "spin vector length must equal n");
  }
  double e = 0.0;
  for (int j = 0; j < p.n; ++j) {
    const int s = spins[static_cast<size_t>(j)];
    if (s != 1 && s != -1) throw Error(ErrorCode::SpinDomain, "spins must be -1 or +1");
    e += p.h[static_cast<size_t>(j)] * s;
  }
  for (const auto& [key, k] : p.couplings) e += k * spins[key.first] * spins[key.second];
  return e;
}

std::vector<int> spins_from_index(std::uint64_t index, int n) {
  std::vector<int> s(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) s[static_cast<size_t>(j)] = (index >> j) & 1u ? -1 : 1;
  return s;
}

namespace {

// Diagonal of the problem Hamiltonian over the computational basis.
std::vector<double> problem_diagonal(const IsingProblem& p) {
  const std::uint64_t dim = std::uint64_t{1} << p.n;
  std::vector<double> diag(dim);
  for (std::uint64_t i = 0; i < dim; ++i) {
    double e = 0.0;
    for (int j = 0; j < p.n; ++j) e += (i >> j & 1u) ? -p.h[static_cast<size_t>(j)] : p.h[static_cast<size_t>(j)];
    for (const auto& [key, k] : p.couplings) {
      const bool odd = ((i >> key.first) ^ (i >> key.second)) & 1u;
      e += odd ? -k : k;
    }
    diag[i] = e;
  }
  return diag;
}

}  // namespace

BruteForceResult brute_force_minimize(const IsingProblem& p) {
  p.validate();
  if (p.n > kMaxBruteForceSpins) {
    throw Error(ErrorCode::TooLarge, "brute force limited to " + std::to_string(kMaxBruteForceSpins) + " spins");
  }
  const auto diag = problem_diagonal(p);
  BruteForceResult r;
  r.optimum = *std::min_element(diag.begin(), diag.end());
  // Energies are sums of the same terms in different orders; allow rounding.
  double scale = 0.0;
  for (double v : p.h) scale += std::abs(v);
  for (const auto& [key, k] : p.couplings) scale += std::abs(k);
  const double tol = 1e-12 * std::max(1.0, scale);
  for (std::uint64_t i = 0; i < diag.size(); ++i) {
    if (diag[i] <= r.optimum + tol) r.minimizers.push_back(spins_from_index(i, p.n));
  }
  return r;
}

AnnealSchedule AnnealSchedule::standard(double t_f_ns, double energy_scale_ghz, int points) {
  AnnealSchedule s;
  s.t_f_ns = t_f_ns;
  s.s.resize(static_cast<size_t>(points));
  s.a_ghz.resize(static_cast<size_t>(points));
  s.b_ghz.resize(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) / (points - 1);
    s.s[static_cast<size_t>(i)] = x;
    s.a_ghz[static_cast<size_t>(i)] = energy_scale_ghz * (1.0 - x) * (1.0 - x) * (1.0 - x);
    s.b_ghz[static_cast<size_t>(i)] = energy_scale_ghz * x;
  }
  return s;
}

AnnealSchedule AnnealSchedule::read(std::istream& in, double t_f_ns) {
  AnnealSchedule s;
  s.t_f_ns = t_f_ns;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 3) {
      throw Error(ErrorCode::ParseError, "schedule line " + std::to_string(lineno) + ": expected 's A B'");
    }
    s.s.push_back(config::parse_double(tok[0]));
    s.a_ghz.push_back(config::parse_double(tok[1]));
    s.b_ghz.push_back(config::parse_double(tok[2]));
  }
  s.validate();
  return s;
}

AnnealSchedule AnnealSchedule::load(const std::string& path, double t_f_ns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read(in, t_f_ns);
}

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const size_t hi = static_cast<size_t>(it - xs.begin());
  const size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

double AnnealSchedule::a(double x) const { return interpolate(s, a_ghz, x); }
double AnnealSchedule::b(double x) const { return interpolate(s, b_ghz, x); }

void AnnealSchedule::validate() const {
  if (!(t_f_ns >= 0.0) || !std::isfinite(t_f_ns)) throw Error(ErrorCode::BadSchedule, "t_f must be >= 0");
  if (steps < 0) throw Error(ErrorCode::BadSchedule, "step count must be >= 0");
  if (s.size() < 2 || a_ghz.size() != s.size() || b_ghz.size() != s.size()) {
    throw Error(ErrorCode::BadSchedule, "schedule needs at least two (s, A, B) rows");
  }
  if (s.front() != 0.0 || s.back() != 1.0) throw Error(ErrorCode::BadSchedule, "s must run from 0 to 1");
  for (size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw Error(ErrorCode::BadSchedule, "s must be strictly increasing");
  }
  for (size_t i = 0; i < s.size(); ++i) {
    if (!(a_ghz[i] >= 0.0) || !(b_ghz[i] >= 0.0) || !std::isfinite(a_ghz[i]) || !std::isfinite(b_ghz[i])) {
      throw Error(ErrorCode::BadSchedule, "envelopes must be finite and non-negative");
    }
  }
  // A(0)/B(0) >> 1 and A(1)/B(1) << 1, written without dividing by zero.
  if (!(a_ghz.front() > 0.0) || a_ghz.front() < kMinInitialRatio * b_ghz.front()) {
    throw Error(ErrorCode::BadSchedule, "need A(0)/B(0) >= 100");
  }
  if (!(b_ghz.back() > 0.0) || a_ghz.back() > kMaxFinalRatio * b_ghz.back()) {
    throw Error(ErrorCode::BadSchedule, "need A(1)/B(1) <= 0.01");
  }
}

namespace {

constexpr double kTwoPi = 2.0 * kPi;

// H = a * sum_j X_j + b * diag, with a, b in rad/ns.
class Hamiltonian {
 public:
  Hamiltonian(int n, std::vector<double> diag) : n_(n), diag_(std::move(diag)) {
    diag_max_ = 0.0;
    for (double d : diag_) diag_max_ = std::max(diag_max_, std::abs(d));
  }

  size_t dim() const { return diag_.size(); }

  void apply(double a, double b, const StateVector& in, StateVector& out) const {
    const size_t dim = diag_.size();
    for (size_t i = 0; i < dim; ++i) {
      cd acc = b * diag_[i] * in[i];
      for (int j = 0; j < n_; ++j) acc += a * in[i ^ (size_t{1} << j)];
      out[i] = acc;
    }
  }

  double norm_bound(double a, double b) const { return std::abs(a) * n_ + std::abs(b) * diag_max_; }

  // psi <- exp(-i tau (a X + b D)) psi via a Taylor series truncated at
  // machine precision, sub-stepped so each sub-step has norm <= 1.
  void propagate(double a, double b, double tau, StateVector& psi, StateVector& term,
                 StateVector& scratch) const {
    const double nu = norm_bound(a, b) * std::abs(tau);
    const int sub = std::max(1, static_cast<int>(std::ceil(nu)));
    const double delta = tau / sub;
    const size_t dim = psi.size();
    for (int k = 0; k < sub; ++k) {
      term = psi;
      for (int order = 1; order < 60; ++order) {
        apply(a, b, term, scratch);
        const cd factor = cd(0.0, -delta) / static_cast<double>(order);
        double term_norm = 0.0;
        for (size_t i = 0; i < dim; ++i) {
          term[i] = factor * scratch[i];
          psi[i] += term[i];
          term_norm += std::norm(term[i]);
        }
        if (term_norm < 1e-34) break;
      }
    }
  }

 private:
  int n_;
  std::vector<double> diag_;
  double diag_max_ = 0.0;
};

double schedule_norm_max(const Hamiltonian& h, const AnnealSchedule& sched) {
  double m = 0.0;
  for (size_t i = 0; i < sched.s.size(); ++i) {
    m = std::max(m, h.norm_bound(kTwoPi * sched.a_ghz[i], kTwoPi * sched.b_ghz[i]));
  }
  return m;
}

void check_size(const IsingProblem& p) {
  if (p.n > kMaxAnnealSpins) {
    throw Error(ErrorCode::TooLarge, "state-vector annealing limited to " + std::to_string(kMaxAnnealSpins) + " spins");
  }
  if (p.n < 1) throw Error(ErrorCode::InvalidArgument, "problem has no spins");
}

StateVector ground_state(const Hamiltonian& ham, int n, double a, double b) {
  const size_t dim = ham.dim();
  StateVector psi(dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (size_t i = 0; i < dim; ++i) psi[i] = (std::popcount(i) & 1) ? -amp : amp;
  if (b == 0.0) return psi;
  // Power iteration on (sigma - H); the product state is already close.
  const double sigma = ham.norm_bound(a, b);
  StateVector next(dim);
  for (int it = 0; it < 200000; ++it) {
    ham.apply(a, b, psi, next);
    double norm = 0.0;
    for (size_t i = 0; i < dim; ++i) {
      next[i] = sigma * psi[i] - next[i];
      norm += std::norm(next[i]);
    }
    norm = std::sqrt(norm);
    double diff = 0.0;
    for (size_t i = 0; i < dim; ++i) {
      next[i] /= norm;
      diff += std::norm(next[i] - psi[i]);
    }
    psi.swap(next);
    if (diff < 1e-28) break;
  }
  (void)n;
  return psi;
}

}  // namespace

StateVector initial_state(const IsingProblem& p, const AnnealSchedule& sched) {
  check_size(p);
  sched.validate();
  Hamiltonian ham(p.n, problem_diagonal(p));
  return ground_state(ham, p.n, kTwoPi * sched.a(0.0), kTwoPi * sched.b(0.0));
}

int resolved_steps(const IsingProblem& p, const AnnealSchedule& sched, const EvolutionOptions& opts) {
  if (opts.steps > 0) return opts.steps;
  if (sched.steps > 0) return sched.steps;
  Hamiltonian ham(p.n, problem_diagonal(p));
  const double phase = schedule_norm_max(ham, sched) * sched.t_f_ns;
  const int per_phase = opts.integrator == Integrator::Midpoint ? 8 : 2;
  return std::clamp(static_cast<int>(std::ceil(per_phase * phase)), 200, 2000000);
}

StateVector evolve(const IsingProblem& p, const AnnealSchedule& sched, const EvolutionOptions& opts) {
  check_size(p);
  p.validate();
  sched.validate();
  Hamiltonian ham(p.n, problem_diagonal(p));
  StateVector psi = ground_state(ham, p.n, kTwoPi * sched.a(0.0), kTwoPi * sched.b(0.0));
  if (sched.t_f_ns == 0.0) return psi;

  const int steps = resolved_steps(p, sched, opts);
  const double ds = 1.0 / steps;
  const double dt = sched.t_f_ns * ds;
  StateVector term(psi.size());
  StateVector scratch(psi.size());
  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0;
  const double c2 = 0.5 + r3 / 6.0;
  const double w1 = (3.0 - 2.0 * r3) / 12.0;
  const double w2 = (3.0 + 2.0 * r3) / 12.0;
  for (int k = 0; k < steps; ++k) {
    const double s0 = k * ds;
    if (opts.integrator == Integrator::Midpoint) {
      const double sm = s0 + 0.5 * ds;
      ham.propagate(kTwoPi * sched.a(sm), kTwoPi * sched.b(sm), dt, psi, term, scratch);
    } else {
      const double a1 = sched.a(s0 + c1 * ds), b1 = sched.b(s0 + c1 * ds);
      const double a2 = sched.a(s0 + c2 * ds), b2 = sched.b(s0 + c2 * ds);
      // exp(-i dt (w1 H1 + w2 H2)) exp(-i dt (w2 H1 + w1 H2)); each exponent
      // carries half the step, so the scalars are doubled against dt / 2.
      ham.propagate(kTwoPi * 2.0 * (w2 * a1 + w1 * a2), kTwoPi * 2.0 * (w2 * b1 + w1 * b2), 0.5 * dt,
                    psi, term, scratch);
      ham.propagate(kTwoPi * 2.0 * (w1 * a1 + w2 * a2), kTwoPi * 2.0 * (w1 * b1 + w2 * b2), 0.5 * dt,
                    psi, term, scratch);
    }
  }
  return psi;
}

AnnealResult anneal(const IsingProblem& p, const AnnealSchedule& sched, int repeats, std::uint64_t seed,
                    const EvolutionOptions& opts) {
  if (repeats < 1) throw Error(ErrorCode::InvalidCount, "repeat count must be positive");
  const auto psi = evolve(p, sched, opts);
  const auto oracle = brute_force_minimize(p);

  std::vector<double> cumulative(psi.size());
  double total = 0.0;
  for (size_t i = 0; i < psi.size(); ++i) {
    total += std::norm(psi[i]);
    cumulative[i] = total;
  }
  AnnealResult r;
  r.final_norm = std::sqrt(total);
  r.optimum = oracle.optimum;
  std::set<std::vector<int>> minimizers(oracle.minimizers.begin(), oracle.minimizers.end());
  Rng rng(seed);
  int ground = 0;
  for (int k = 0; k < repeats; ++k) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    auto spins = spins_from_index(static_cast<std::uint64_t>(it - cumulative.begin()), p.n);
    r.energies.push_back(objective(p, spins));
    if (minimizers.count(spins)) ++ground;
    r.outcomes.push_back(std::move(spins));
  }
  r.ground_fraction = static_cast<double>(ground) / repeats;
  return r;
}

double QuantizeConfig::h_scale() const {
  return h_full_scale_phi0 > 0.0 ? h_full_scale_phi0 : 0.5 * dacs[flux_dac::DacType::QubitFlux].span_phi0;
}

const flux_dac::DacTypeParams& QuantizeConfig::params_for(int dac, flux_dac::DacType type) const {
  auto it = per_dac.find(dac);
  return it != per_dac.end() ? it->second : dacs[type];
}

double QuantizeConfig::k_scale() const {
  return k_unit_mutual > 0.0 ? k_unit_mutual : std::abs(device::coupler_mutual(0.0, coupler));
}

DacCounts nearest_counts(double target, const flux_dac::DacTypeParams& prm) {
  const double reach = prm.k * (prm.capacity_coarse + static_cast<double>(prm.capacity_fine) / prm.gamma);
  const double half_step = 0.5 * prm.k / prm.gamma;
  if (!std::isfinite(target) || std::abs(target) > reach + half_step) {
    throw Error(ErrorCode::OutOfRange, "flux " + config::format_double(target) + " Phi0 beyond DAC reach " +
                                           config::format_double(reach));
  }
  const double units = target / prm.k;
  const int centre = static_cast<int>(std::lround(units));
  DacCounts best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int c = centre - 2; c <= centre + 2; ++c) {
    if (std::abs(c) > prm.capacity_coarse) continue;
    int f = static_cast<int>(std::lround((units - c) * prm.gamma));
    f = std::clamp(f, -prm.capacity_fine, prm.capacity_fine);
    const double err = std::abs(flux_dac::output_flux(prm.k, prm.gamma, c, f) - target);
    // Prefer the smaller pulse count on ties.
    if (err < best_err - 1e-15 ||
        (std::abs(err - best_err) <= 1e-15 && std::abs(c) + std::abs(f) < std::abs(best.coarse) + std::abs(best.fine))) {
      best = {c, f};
      best_err = err;
    }
  }
  return best;
}

QuantizedProblem quantize_problem(const IsingProblem& p, const topology::UnitCellGrid& grid,
                                  const QuantizeConfig& cfg) {
  p.validate(&grid);
  const int qubits = static_cast<int>(grid.qubits.size());
  if (p.n > qubits) throw Error(ErrorCode::OutOfRange, "problem larger than the processor");
  for (double v : p.h) {
    if (std::abs(v) > 1.0) throw Error(ErrorCode::OutOfRange, "biases must be normalized to |h| <= 1");
  }
  for (const auto& [key, v] : p.couplings) {
    if (std::abs(v) > 1.0) throw Error(ErrorCode::OutOfRange, "couplings must be normalized to |K| <= 1");
  }
  using flux_dac::DacType;
  const double h_scale = cfg.h_scale();
  const double m_unit = cfg.k_scale();

  // Normalized value x in [-1, 1] -> mutual -x * m_unit -> coupler DAC flux.
  auto coupler_counts = [&](int dac, double x) {
    const double total = device::coupler_flux_for_mutual(-x * m_unit, cfg.coupler);
    return nearest_counts(total - cfg.null_offset_phi0, cfg.params_for(dac, DacType::Coupler));
  };
  auto coupler_value = [&](int dac, const DacCounts& c) {
    const auto& cp = cfg.params_for(dac, DacType::Coupler);
    const double total = flux_dac::output_flux(cp.k, cp.gamma, c.coarse, c.fine) + cfg.null_offset_phi0;
    return -device::coupler_mutual(total, cfg.coupler) / m_unit;
  };

  QuantizedProblem q;
  q.achieved = IsingProblem::zeros(p.n);
  for (int j = 0; j < qubits; ++j) {
    const double h = j < p.n ? p.h[static_cast<size_t>(j)] : 0.0;
    const auto dacs = grid.qubit_dacs(j);
    const auto& qfp = cfg.params_for(dacs[0], DacType::QubitFlux);
    const auto counts = nearest_counts(h * h_scale, qfp);
    q.targets[dacs[0]] = counts;
    const double h_achieved = flux_dac::output_flux(qfp.k, qfp.gamma, counts.coarse, counts.fine) / h_scale;
    if (j < p.n) {
      q.achieved.h[static_cast<size_t>(j)] = h_achieved;
      q.max_relative_error = std::max(q.max_relative_error, std::abs(h_achieved - h));
    }
    // CCJJ minor lobes and L-tuner stay at their balanced (empty) setting.
    for (int r = 1; r <= 3; ++r) q.targets[dacs[static_cast<size_t>(r)]] = {0, 0};
    if (cfg.program_ip_compensators) {
      const auto g = coupler_counts(dacs[4], h);
      q.targets[dacs[4]] = g;
      q.max_gain_error = std::max(q.max_gain_error, std::abs(coupler_value(dacs[4], g) - h));
    } else {
      q.targets[dacs[4]] = {0, 0};
    }
  }
  for (int c = 0; c < static_cast<int>(grid.couplers.size()); ++c) {
    const auto e = grid.couplers[static_cast<size_t>(c)];
    double k = 0.0;
    if (auto it = p.couplings.find({e.i, e.j}); it != p.couplings.end()) k = it->second;
    const int dac = grid.coupler_dac(c);
    const auto counts = coupler_counts(dac, k);
    q.targets[dac] = counts;
    if (e.j < p.n) {
      const double k_achieved = coupler_value(dac, counts);
      if (p.couplings.count({e.i, e.j}) || std::abs(k_achieved) > 1e-12) {
        q.achieved.set_coupling(e.i, e.j, k_achieved);
      }
      q.max_relative_error = std::max(q.max_relative_error, std::abs(k_achieved - k));
    }
  }
  return q;
}

}  // namespace pmm::annealer
