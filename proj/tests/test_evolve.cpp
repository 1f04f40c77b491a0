#include <doctest.h>

#include "mechsim/evolve.hpp"
#include "mechsim/model.hpp"
#include "oracles.hpp"

using namespace mechsim;

TEST_CASE("time grids") {
  const auto g = TimeGrid::uniform(0.0, 2.0, 4);
  REQUIRE(g.size() == 5);
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g.n_steps() == 4);
  CHECK_THROWS(TimeGrid::from_times({0.0, 1.0, 1.0}));
  CHECK_THROWS(TimeGrid::uniform(1.0, 1.0, 3));
  CHECK_THROWS(TimeGrid::uniform(0.0, 1.0, 0));
}

TEST_CASE("default step count resolves the fastest period") {
  const FrameRates r{1.0, 3.0, 0.1, 0.0};
  CHECK(default_step_count(r, 2 * M_PI / 3.0) == 200);
  CHECK(default_step_count(r, 4 * M_PI / 3.0, 50) == 100);
}

TEST_CASE("Fock states only pick up phases under the uncoupled H_MO") {
  const FrameRates r{0.8, 1.9, 0.0, 0.0};
  const ModeSpace s(4, 4);
  const auto psi0 = fock::product_state(fock::fock_state(4, 2), fock::fock_state(4, 3), s);
  const auto res = evolve_unitary(build_H_MO(r, s), psi0, TimeGrid::uniform(0.0, 3.0, 6));
  for (std::size_t k = 0; k < res.grid.size(); ++k) {
    const double t = res.grid[k];
    const cplx expected = std::polar(1.0, -(2 * r.omega_c + 3 * r.omega_m) * t);
    CHECK(std::abs(res.pure[k][s.index(2, 3)] - expected) < 1e-12);
  }
}

TEST_CASE("unitary evolution against a fine RK4 oracle") {
  const FrameRates r{1.0, 0.7, 0.3, 0.05};
  const ModeSpace s(10, 8);
  const auto h = build_H_DS(r, s, true);
  const auto psi0 = fock::product_state(fock::coherent_state(0.7, 10, 1e-4), fock::coherent_state(0.5, 8, 1e-4), s);
  const auto res = evolve_unitary(h, psi0, TimeGrid::uniform(0.0, 4.0, 2));
  const oracle::Mat hm = h.matrix();
  const oracle::Vec ref = oracle::rk4_schrodinger([&](double) { return hm; }, psi0.amplitudes(), 0.0, 4.0, 8000);
  CHECK((res.pure.back().amplitudes() - ref).norm() < 1e-9);
  for (double d : res.diagnostics.norm_drift) CHECK(d < 1e-12);
  for (double d : res.diagnostics.energy_drift) CHECK(d < 1e-12);
}

TEST_CASE("evolution from a later start time uses relative time") {
  const FrameRates r{1.0, 0.7, 0.3, 0.0};
  const ModeSpace s(6, 6);
  const auto h = build_H_MO(r, s);
  const auto psi0 = fock::product_state(fock::fock_state(6, 1), fock::fock_state(6, 1), s);
  const auto a = evolve_unitary(h, psi0, TimeGrid::uniform(0.0, 1.5, 3));
  const auto b = evolve_unitary(h, psi0, TimeGrid::uniform(2.0, 3.5, 3));
  CHECK((a.pure.back().amplitudes() - b.pure.back().amplitudes()).norm() < 1e-13);
  CHECK((b.pure.front().amplitudes() - psi0.amplitudes()).norm() == 0.0);
}

TEST_CASE("non-Hermitian generators are rejected") {
  oracle::Mat m = oracle::Mat::Zero(2, 2);
  m(0, 1) = 1.0;
  const Operator h(SpaceTag::mode_a, m);
  CHECK_THROWS_AS(evolve_unitary(h, PureState::basis(2, 0), TimeGrid::uniform(0, 1, 1)), std::invalid_argument);
}

TEST_CASE("time-dependent coupling against a fine RK4 oracle") {
  const FrameRates r{1.0, 0.7, 0.0, 0.0};
  const ModeSpace s(8, 6);
  const auto sched = CouplingSchedule::linear_ramp(0.0, 5.0, 0.0, 0.4);
  const auto gen = mo_generator(r, sched, s);
  const auto psi0 = fock::product_state(fock::coherent_state(0.5, 8, 1e-4), fock::coherent_state(0.6, 6, 1e-3), s);
  const auto res = evolve_unitary_td(gen, psi0, TimeGrid::uniform(0.0, 5.0, 10));
  const oracle::Mat n_a = oracle::kron(oracle::lowering(8).adjoint() * oracle::lowering(8), oracle::Mat::Identity(6, 6));
  const oracle::Mat n_b = oracle::kron(oracle::Mat::Identity(8, 8), oracle::lowering(6).adjoint() * oracle::lowering(6));
  const oracle::Mat x_a = oracle::kron(oracle::lowering(8) + oracle::lowering(8).adjoint(), oracle::Mat::Identity(6, 6));
  const oracle::Mat h0 = r.omega_c * n_a + r.omega_m * n_b;
  const oracle::Mat v = x_a * n_b;
  auto h = [&](double t) -> oracle::Mat { return h0 + (0.4 * t / 5.0) * v; };
  const oracle::Vec ref = oracle::rk4_schrodinger(h, psi0.amplitudes(), 0.0, 5.0, 20000);
  CHECK((res.pure.back().amplitudes() - ref).norm() < 1e-8);
  CHECK(res.diagnostics.self_check_deviation < 1e-8);
}

TEST_CASE("step-halving check rejects too coarse a step") {
  const FrameRates r{1.0, 0.7, 0.0, 0.0};
  const ModeSpace s(8, 6);
  const auto gen = mo_generator(r, CouplingSchedule::linear_ramp(0.0, 20.0, 0.0, 0.8), s);
  const auto psi0 = fock::product_state(fock::fock_state(8, 2), fock::fock_state(6, 3), s);
  StepControl c;
  c.substeps = 1;
  c.tolerance = 1e-12;
  try {
    evolve_unitary_td(gen, psi0, TimeGrid::uniform(0.0, 20.0, 4), c);
    FAIL("expected EvolutionError");
  } catch (const EvolutionError& e) {
    CHECK(e.recommended_steps() > 1);
  }
}

TEST_CASE("pure cavity decay: <N_a> = n0 exp(-2 kappa t)") {
  const ModeSpace s(12, 2);
  const double kappa = 0.15;
  const FrameRates r{1.0, 1.0, 0.0, 0.0};
  const auto psi0 = fock::product_state(fock::coherent_state(1.3, 12, 1e-6), fock::fock_state(2, 0), s);
  const auto rho0 = DensityMatrix::from_pure(psi0);
  const auto na = fock::embed(fock::number(12, Mode::a), s);
  const auto res = evolve_lindblad(build_H_MO(r, s), rho0, kappa, s, TimeGrid::uniform(0.0, 6.0, 30));
  const double n0 = rho0.expectation(na);
  for (std::size_t k = 0; k < res.grid.size(); ++k) {
    const double expected = n0 * std::exp(-2 * kappa * res.grid[k]);
    CHECK(res.mixed[k].expectation(na) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(res.mixed[k].trace_defect() < 1e-12);
    CHECK(res.mixed[k].min_eigenvalue() > -1e-10);
  }
  // a coherent state stays pure under pure damping
  CHECK(res.mixed.back().purity() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.diagnostics.warnings.empty());
}

TEST_CASE("Fock state decay follows the binomial populations") {
  const ModeSpace s(5, 2);
  const double kappa = 0.2, t = 2.0;
  const auto rho0 = DensityMatrix::from_pure(fock::product_state(fock::fock_state(5, 3), fock::fock_state(2, 0), s));
  const auto res = evolve_lindblad(build_H_MO({0.5, 1.0, 0.0, 0.0}, s), rho0, kappa, s, TimeGrid::uniform(0.0, t, 10));
  const double eta = std::exp(-2 * kappa * t);
  const auto rho_a = fock::partial_trace(res.mixed.back(), Mode::a, s);
  const double binom[4] = {1, 3, 3, 1};
  for (int k = 0; k <= 3; ++k) {
    const double pk = binom[k] * std::pow(eta, k) * std::pow(1 - eta, 3 - k);
    CHECK(rho_a.matrix()(k, k).real() == doctest::Approx(pk).epsilon(1e-7));
  }
}

TEST_CASE("Lindblad with kappa = 0 matches unitary evolution") {
  const FrameRates r{1.0, 0.7, 0.2, 0.0};
  const ModeSpace s(8, 6);
  const auto h = build_H_MO(r, s);
  const auto psi0 = fock::product_state(fock::coherent_state(0.5, 8, 1e-4), fock::coherent_state(0.4, 6, 1e-4), s);
  const auto grid = TimeGrid::uniform(0.0, 3.0, 6);
  const auto u = evolve_unitary(h, psi0, grid);
  const auto l = evolve_lindblad(h, DensityMatrix::from_pure(psi0), 0.0, s, grid);
  const oracle::Vec v = u.pure.back().amplitudes();
  CHECK((l.mixed.back().matrix() - v * v.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
  for (double p : l.diagnostics.purity) CHECK(p == doctest::Approx(1.0).epsilon(1e-8));
}
