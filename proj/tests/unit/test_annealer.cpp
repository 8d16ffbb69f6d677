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

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "pmm/annealer.hpp"
#include "pmm/error.hpp"
#include "pmm/topology.hpp"
#include "pmm/units.hpp"

using namespace pmm;
using namespace pmm::annealer;

namespace {

IsingProblem random_cell_problem(std::mt19937_64& rng, int n = 8) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto g = topology::build_grid(1, 1);
  auto p = IsingProblem::zeros(n);
  for (int j = 0; j < n; ++j) p.h[j] = u(rng);
  for (const auto& e : g.couplers) {
    if (e.j < n) p.set_coupling(e.i, e.j, u(rng));
  }
  return p;
}

// Dense H(s) in rad/ns with the same conventions: X on every spin and
// basis bit j set meaning s_j = -1.
Eigen::MatrixXcd dense_hamiltonian(const IsingProblem& p, double a_ghz, double b_ghz) {
  const int dim = 1 << p.n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    std::vector<int> s(p.n);
    for (int j = 0; j < p.n; ++j) s[j] = (i >> j & 1) ? -1 : 1;
    double e = 0.0;
    for (int j = 0; j < p.n; ++j) e += p.h[j] * s[j];
    for (const auto& [key, k] : p.couplings) e += k * s[key.first] * s[key.second];
    h(i, i) = 2.0 * kPi * b_ghz * e;
    for (int j = 0; j < p.n; ++j) h(i ^ (1 << j), i) += 2.0 * kPi * a_ghz;
  }
  return h;
}

Eigen::MatrixXcd dense_propagator(const Eigen::MatrixXcd& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd w = es.eigenvalues();
  Eigen::VectorXcd phase(w.size());
  for (int i = 0; i < w.size(); ++i) phase(i) = std::exp(std::complex<double>(0.0, -w(i) * dt));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::VectorXcd dense_evolve(const IsingProblem& p, const AnnealSchedule& sched, int steps) {
  const Eigen::MatrixXcd h0 = dense_hamiltonian(p, sched.a(0.0), sched.b(0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h0);
  Eigen::VectorXcd psi = es.eigenvectors().col(0);
  const double ds = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double sm = (k + 0.5) * ds;
    psi = dense_propagator(dense_hamiltonian(p, sched.a(sm), sched.b(sm)), sched.t_f_ns * ds) * psi;
  }
  return psi;
}

double state_distance(const StateVector& a, const StateVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::norm(a[i] - b[i]);
  return std::sqrt(d);
}

// Distance up to a global phase.
double phase_free_distance(const StateVector& a, const Eigen::VectorXcd& b) {
  std::complex<double> overlap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) overlap += std::conj(b(i)) * a[i];
  const auto phase = overlap / std::abs(overlap);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::norm(a[i] - phase * b(i));
  return std::sqrt(d);
}

}  // namespace

TEST_CASE("problem text round trips and rejects malformed records") {
  const auto g = topology::build_grid(1, 1);
  std::istringstream in("# comment\nh 0 0.5\nh 7 -1e-1\nK 0 4 -0.25\n\nK 3 7 1\n");
  const auto p = read_problem(in, &g);
  CHECK(p.n == 8);
  CHECK(p.h[0] == 0.5);
  CHECK(p.h[7] == -0.1);
  CHECK(p.couplings.at({0, 4}) == -0.25);
  std::ostringstream out;
  write_problem(out, p);
  std::istringstream again(out.str());
  const auto q = read_problem(again, &g);
  CHECK(q.h == p.h);
  CHECK(q.couplings == p.couplings);

  for (const char* bad : {"h 0\n", "K 4 0 1\n", "K 0 1 0.5\n", "x 1 2\n", "h a 1\n", "h 0 1\nh 0 2\n",
                          "K 0 4 1\nK 0 4 1\n", "h 0 nan\n", "h -1 0.5\n"}) {
    CAPTURE(bad);
    std::istringstream s(bad);
    try {
      read_problem(s, &g);
      FAIL("accepted malformed input");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  std::istringstream line3("h 0 1\n\nbogus\n");
  try {
    read_problem(line3);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("objective matches a matrix form evaluation") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_cell_problem(rng);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(8, 8);
    for (const auto& [key, k] : p.couplings) j(key.first, key.second) = k;
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(p.h.data(), 8);
    for (std::uint64_t idx = 0; idx < 256; idx += 7) {
      const auto s = spins_from_index(idx, 8);
      Eigen::VectorXd v(8);
      for (int k = 0; k < 8; ++k) v(k) = s[k];
      CHECK(objective(p, s) == doctest::Approx(h.dot(v) + v.dot(j * v)));
    }
  }
  const auto p = IsingProblem::zeros(2);
  const std::vector<int> bad = {1, 0};
  CHECK_THROWS_AS(objective(p, bad), Error);
}

TEST_CASE("brute force finds every minimizer") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const auto p = random_cell_problem(rng);
    const auto r = brute_force_minimize(p);
    double best = 1e300;
    for (std::uint64_t i = 0; i < 256; ++i) best = std::min(best, objective(p, spins_from_index(i, 8)));
    CHECK(r.optimum == doctest::Approx(best));
    for (const auto& m : r.minimizers) CHECK(objective(p, m) == doctest::Approx(best));
  }
  // Zero problem: every state is optimal.
  CHECK(brute_force_minimize(IsingProblem::zeros(3)).minimizers.size() == 8);
  // Ferromagnetic pair has two ground states.
  auto fm = IsingProblem::zeros(2);
  fm.set_coupling(0, 1, -1.0);
  CHECK(brute_force_minimize(fm).minimizers.size() == 2);
  CHECK_THROWS_AS(brute_force_minimize(IsingProblem::zeros(25)), Error);
}

TEST_CASE("schedule validation") {
  auto s = AnnealSchedule::standard(10.0);
  CHECK_NOTHROW(s.validate());
  CHECK(s.a(0.0) == doctest::Approx(1.0));
  CHECK(s.b(1.0) == doctest::Approx(1.0));
  CHECK(s.a(0.5) == doctest::Approx(0.125).epsilon(1e-3));
  std::istringstream ok("0 1 0\n0.5 0.5 0.5 # mid\n1 0 1\n");
  CHECK(AnnealSchedule::read(ok, 5.0).b(0.25) == doctest::Approx(0.25));
  for (const char* bad : {"0 1 0\n1 0.5 1\n", "0 1 0.5\n1 0 1\n", "0 1 0\n0 1 0\n1 0 1\n", "0 1\n1 0 1\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(AnnealSchedule::read(in, 1.0), Error);
  }
  s.t_f_ns = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("initial state is the ground state of the initial Hamiltonian") {
  std::mt19937_64 rng(3);
  const auto p = random_cell_problem(rng, 4);
  std::istringstream in("0 1 0.005\n1 0 1\n");
  const auto sched = AnnealSchedule::read(in, 10.0);
  const auto psi = initial_state(p, sched);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(p, 1.0, 0.005));
  CHECK(phase_free_distance(psi, es.eigenvectors().col(0)) < 1e-7);
  // Pure transverse field: uniform magnitudes.
  const auto plain = initial_state(p, AnnealSchedule::standard(1.0));
  for (const auto& a : plain) CHECK(std::abs(a) == doctest::Approx(0.25));
}

TEST_CASE("evolution agrees with dense matrix exponentials") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 3; ++t) {
    const auto p = random_cell_problem(rng, 3);
    const auto sched = AnnealSchedule::standard(5.0);
    const auto psi = evolve(p, sched);
    const auto oracle = dense_evolve(p, sched, 20000);
    CHECK(phase_free_distance(psi, oracle) < 1e-6);
  }
}

TEST_CASE("norm is conserved") {
  std::mt19937_64 rng(4);
  const auto p = random_cell_problem(rng);
  for (double tf : {0.5, 5.0, 50.0}) {
    for (auto integ : {Integrator::Midpoint, Integrator::CommutatorFree4}) {
      const auto psi = evolve(p, AnnealSchedule::standard(tf), {integ, 0});
      double n = 0.0;
      for (const auto& a : psi) n += std::norm(a);
      CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("default step count is converged under step halving") {
  std::mt19937_64 rng(8);
  const auto p = random_cell_problem(rng);
  for (double tf : {2.0, 20.0}) {
    const auto sched = AnnealSchedule::standard(tf);
    const int steps = resolved_steps(p, sched, {});
    const auto a = evolve(p, sched, {Integrator::CommutatorFree4, steps});
    const auto b = evolve(p, sched, {Integrator::CommutatorFree4, 2 * steps});
    CHECK(state_distance(a, b) < 1e-6);
    const auto m = evolve(p, sched, {Integrator::Midpoint, 0});
    CHECK(state_distance(a, m) < 1e-4);
  }
}

TEST_CASE("sudden anneal samples the initial superposition") {
  auto p = IsingProblem::zeros(1);
  p.h[0] = 1.0;
  const auto r = anneal(p, AnnealSchedule::standard(0.0), 4000, 7);
  int up = 0;
  for (const auto& o : r.outcomes) up += o[0] == 1;
  CHECK(std::abs(up / 4000.0 - 0.5) < 4 * std::sqrt(0.25 / 4000));
  CHECK(r.optimum == -1.0);
}

TEST_CASE("slow anneals find the optimum") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 3; ++t) {
    const auto p = random_cell_problem(rng);
    const auto r = anneal(p, AnnealSchedule::standard(300.0), 500, 1);
    CHECK(r.ground_fraction >= 0.9);
    CHECK(r.final_norm == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("sampling is reproducible per seed") {
  std::mt19937_64 rng(2);
  const auto p = random_cell_problem(rng, 4);
  const auto a = anneal(p, AnnealSchedule::standard(3.0), 100, 42);
  const auto b = anneal(p, AnnealSchedule::standard(3.0), 100, 42);
  CHECK(a.outcomes == b.outcomes);
  CHECK_THROWS_AS(anneal(p, AnnealSchedule::standard(3.0), 0, 1), Error);
  CHECK_THROWS_AS(evolve(IsingProblem::zeros(13), AnnealSchedule::standard(1.0)), Error);
}

TEST_CASE("nearest counts is the closest representable setting") {
  std::mt19937_64 rng(6);
  for (auto set : {flux_dac::ParameterSet::Designed, flux_dac::ParameterSet::Achieved}) {
    for (auto type : flux_dac::kAllDacTypes) {
      const auto prm = flux_dac::default_params(type, set);
      const double reach = prm.k * (prm.capacity_coarse + double(prm.capacity_fine) / prm.gamma);
      std::uniform_real_distribution<double> u(-reach, reach);
      for (int t = 0; t < 200; ++t) {
        const double x = u(rng);
        const auto c = nearest_counts(x, prm);
        CHECK(std::abs(c.coarse) <= prm.capacity_coarse);
        CHECK(std::abs(c.fine) <= prm.capacity_fine);
        double best = 1e300;
        for (int a = -prm.capacity_coarse; a <= prm.capacity_coarse; ++a) {
          for (int b = -prm.capacity_fine; b <= prm.capacity_fine; ++b) {
            best = std::min(best, std::abs(flux_dac::output_flux(prm.k, prm.gamma, a, b) - x));
          }
        }
        CHECK(std::abs(flux_dac::output_flux(prm.k, prm.gamma, c.coarse, c.fine) - x) <= best + 1e-15);
      }
      CHECK_THROWS_AS(nearest_counts(2.0 * reach, prm), Error);
    }
  }
  const auto prm = flux_dac::default_params(flux_dac::DacType::QubitFlux, flux_dac::ParameterSet::Designed);
  CHECK(nearest_counts(0.0, prm) == DacCounts{0, 0});
}

TEST_CASE("quantized problems stay within five percent of full scale") {
  std::mt19937_64 rng(17);
  const auto g = topology::build_grid(2, 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto p = IsingProblem::zeros(static_cast<int>(g.qubits.size()));
    for (auto& h : p.h) h = u(rng);
    for (const auto& e : g.couplers) p.set_coupling(e.i, e.j, u(rng));
    const auto q = quantize_problem(p, g);
    CHECK(q.max_relative_error <= 0.05);
    CHECK(q.max_gain_error <= 0.05);
    CHECK(q.targets.size() == g.dacs.size() - g.breakout_qubits.size());
    for (int j = 0; j < p.n; ++j) CHECK(std::abs(q.achieved.h[j] - p.h[j]) <= q.max_relative_error + 1e-15);
  }
}

TEST_CASE("zero problem maps to empty DACs") {
  const auto g = topology::build_grid(1, 1);
  const auto q = quantize_problem(IsingProblem::zeros(8), g);
  for (const auto& [id, c] : q.targets) CHECK(c == DacCounts{0, 0});
  CHECK(q.achieved.couplings.empty());
  CHECK(q.max_relative_error < 1e-12);
}

TEST_CASE("quantization rejects unnormalized or off-graph problems") {
  const auto g = topology::build_grid(1, 1);
  auto p = IsingProblem::zeros(8);
  p.h[0] = 1.5;
  CHECK_THROWS_AS(quantize_problem(p, g), Error);
  p.h[0] = 0.0;
  p.set_coupling(0, 1, 0.5);
  CHECK_THROWS_AS(quantize_problem(p, g), Error);
}
