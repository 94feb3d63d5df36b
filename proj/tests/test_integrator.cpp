#include "doctest.h"

#include <cmath>
#include <random>

#include "collapse/ensemble.hpp"
#include "collapse/integrator.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {

StateVector two_level(double alpha, double beta) {
  ComplexVector v(2);
  v << alpha, beta;
  return StateVector::normalized(v);
}

DiagonalOperator diag(std::initializer_list<double> values) {
  RealVector d(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) d[i++] = x;
  return DiagonalOperator(d);
}

}  // namespace

TEST_CASE("em_step without collapse is the Hamiltonian phase") {
  const double E = 2.5, dt = 1e-3;
  RealVector d(2);
  d << E, -1.0;
  const auto out = em_step(two_level(1.0, 0.0), HermitianOperator::from_diagonal(d), {}, dt, 0.3);
  const Complex euler = 1.0 - Complex(0.0, E * dt);
  CHECK(std::abs(out[0] - euler) <= E * E * dt * dt);
  CHECK(std::abs(out[0] - std::polar(1.0, -E * dt)) < 1e-14);
  CHECK(std::abs(out[1]) == 0.0);
}

TEST_CASE("eigenstates of every collapse operator are fixed points") {
  const std::vector<CollapseTerm> terms{{diag({1.0, -1.0, 3.0}), 1.2, FixedRate{2.0}},
                                        {diag({0.5, 0.5, -2.0}), 0.7, FixedRate{1.0}}};
  ComplexVector e = ComplexVector::Zero(3);
  e[2] = Complex(0.0, 1.0);
  const auto psi = StateVector::normalized(e);
  double pre = 0.0;
  const auto out = em_step(psi, IdentityFlow(3, 1e-2), terms, fixed_rates(terms), 0.37, &pre);
  CHECK((out.amplitudes() - psi.amplitudes()).norm() == 0.0);
  CHECK(pre == 1.0);
}

TEST_CASE("one collapse step matches the hand expansion") {
  const double s = 1.0 / std::sqrt(2.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const double gamma = 0.5 + (rng() % 100) / 50.0, dt = 1e-3;
    const Complex dxi = std::sqrt(dt) * g(rng);
    const std::vector<CollapseTerm> terms{{diag({1.0, -1.0}), 1.0, FixedRate{gamma}}};
    const auto out = em_step(two_level(s, s), HermitianOperator::zero(2), terms, dt, dxi);
    const auto [x, y] = oracles::two_level_step(s, s, 1.0, -1.0, 1.0, gamma, dt, dxi);
    CHECK(std::abs(out[0] - x) < 1e-12);
    CHECK(std::abs(out[1] - y) < 1e-12);
  }
  SUBCASE("generic amplitudes and eigenvalues") {
    const Complex alpha(0.3, 0.4), beta(std::sqrt(0.75), 0.0);
    const std::vector<CollapseTerm> terms{{diag({2.0, 0.5}), 0.8, FixedRate{1.7}}};
    ComplexVector v(2);
    v << alpha, beta;
    const auto out = em_step(StateVector::normalized(v), HermitianOperator::zero(2), terms, 1e-2, -0.05);
    const auto [x, y] = oracles::two_level_step(alpha, beta, 2.0, 0.5, 0.8, 1.7, 1e-2, -0.05);
    CHECK(std::abs(out[0] - x) < 1e-12);
    CHECK(std::abs(out[1] - y) < 1e-12);
  }
}

TEST_CASE("non-finite steps are integration failures") {
  const std::vector<CollapseTerm> terms{{diag({1.0, -1.0}), 1.0, FixedRate{1.0}}};
  try {
    (void)em_step(two_level(1.0, 1.0), HermitianOperator::zero(2), terms, 1e-3, std::nan(""));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::integration_failure);
  }
}

TEST_CASE("input validation") {
  const std::vector<CollapseTerm> wrong_dim{{diag({1.0, -1.0, 0.0}), 1.0, FixedRate{1.0}}};
  CHECK_THROWS_AS(em_step(two_level(1, 1), HermitianOperator::zero(2), wrong_dim, 1e-3, 0.0), Error);
  const std::vector<CollapseTerm> negative{{diag({1.0, -1.0}), 1.0, FixedRate{-1.0}}};
  CHECK_THROWS_AS(em_step(two_level(1, 1), HermitianOperator::zero(2), negative, 1e-3, 0.0), Error);
  CHECK_THROWS_AS(Schedule({0.0, 10, 1, false}).validate(), Error);
  CHECK_THROWS_AS(Schedule({1e-3, 10, 0, false}).validate(), Error);
  const IdentityFlow flow(2, 1e-3);
  CHECK_THROWS_AS(integrate_trajectory(two_level(1, 1), flow, {}, {2e-3, 10, 1, false}, {}), Error);
  const std::vector<CollapseTerm> variable{{diag({1.0, -1.0}), 1.0, VariableRate{}}};
  CHECK_THROWS_AS(integrate_trajectory(two_level(1, 1), flow, variable, {1e-3, 10, 1, false}, {}), Error);
}

TEST_CASE("trajectory with no dynamics is constant") {
  const auto psi = two_level(0.6, 0.8);
  const IdentityFlow flow(2, 1e-2);
  const auto rec = integrate_trajectory(psi, flow, {}, {1e-2, 100, 10, true}, {1, 1e-2, false, 0});
  REQUIRE(rec.states.size() == 11);
  for (const auto& s : rec.states) CHECK((s.amplitudes() - psi.amplitudes()).norm() == 0.0);
  CHECK(rec.times.back() == doctest::Approx(1.0));
}

TEST_CASE("same seed gives the same record") {
  std::mt19937_64 rng(5);
  const auto h = testing::random_hermitian(rng, 3);
  const std::vector<CollapseTerm> terms{{diag({1.0, 0.0, -1.0}), 1.0, FixedRate{1.0}}};
  const DenseFlow flow(h, 1e-3);
  const Schedule sch{1e-3, 500, 50, true};
  const auto a = integrate_trajectory(testing::random_state(rng, 3), flow, terms, sch, {9, 1e-3, false, 4});
  std::mt19937_64 rng2(5);
  (void)testing::random_hermitian(rng2, 3);
  const auto b = integrate_trajectory(testing::random_state(rng2, 3), flow, terms, sch, {9, 1e-3, false, 4});
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i].amplitudes() == b.states[i].amplitudes());
  CHECK(a.series == b.series);
  CHECK(a.norms == b.norms);
}

TEST_CASE("eigenstates stay put when H commutes with the collapse operator") {
  RealVector d(3);
  d << 0.3, -1.1, 2.0;
  const DenseFlow flow(HermitianOperator::from_diagonal(d), 1e-3);
  const std::vector<CollapseTerm> terms{{diag({1.0, -1.0, 0.5}), 1.0, FixedRate{3.0}}};
  for (Index k = 0; k < 3; ++k) {
    ComplexVector e = ComplexVector::Zero(3);
    e[k] = 1.0;
    const auto rec = integrate_trajectory(StateVector::normalized(e), flow, terms, {1e-3, 2000, 20, true},
                                          {2, 1e-3, false, static_cast<std::uint64_t>(k)});
    for (const auto& s : rec.states) CHECK(std::norm(s[k]) >= 1.0 - 1e-8);
  }
}

TEST_CASE("eigenprojector weight is a martingale") {
  const double s = std::sqrt(0.3);
  DenseScenario sc{two_level(std::sqrt(0.7), s), HermitianOperator::zero(2),
                   {{diag({1.0, -1.0}), 1.0, FixedRate{1.0}}}, std::nullopt, false,
                   {{"p", diag({0.0, 1.0})}}, {}};
  EnsembleOptions opts;
  opts.keep_samples = true;
  const auto st = run_ensemble(sc, 1000, 13, {1e-3, 1000, 50, false}, opts);
  const auto& traj = st.samples.at("p");
  for (std::size_t i = 1; i < st.times.size(); ++i) {
    std::vector<double> inc;
    for (const auto& t : traj) inc.push_back(t[i] - t[i - 1]);
    const auto m = oracles::moments(inc);
    CHECK(std::abs(m.mean) <= 5.0 * m.se);
  }
  CHECK(oracles::martingale_max_z(traj, 0.3) <= 5.0);
}

TEST_CASE("pre-renormalisation drift scales as dt^(3/2)") {
  std::mt19937_64 rng(21);
  const auto h = testing::random_hermitian(rng, 3);
  const std::vector<CollapseTerm> terms{{diag({1.0, 0.2, -0.7}), 1.0, FixedRate{1.0}}};
  const auto psi = testing::random_state(rng, 3);
  const auto ratios = oracles::drift_ratios(psi, terms, 1e-3, 2, [&](double dt) { return make_flow(h, dt); });
  for (double r : ratios) CHECK(std::abs(r / std::pow(2.0, 1.5) - 1.0) <= 0.25);
}

TEST_CASE("default dt") {
  const std::vector<CollapseTerm> terms{{diag({1.0, -1.0}), 1.0, FixedRate{2.0}}};
  CHECK(default_dt(HermitianOperator::zero(2), terms) == doctest::Approx(1e-3 / 8.0));
  CHECK(spectral_spread(diag({3.0, -1.0, 0.0})) == 4.0);
}
