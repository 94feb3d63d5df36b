#include "doctest.h"

#include <cmath>
#include <random>

#include "collapse/interaction.hpp"
#include "collapse/lorentz.hpp"

using namespace collapse;

namespace {

// Pair with v_j given and v_k chosen so that the momenta cancel (c = 1).
RelativisticPair com_pair(double m_j, double m_k, double v_j, double V) {
  const double pj = m_j * v_j / std::sqrt(1.0 - v_j * v_j);
  return {m_j, m_k, v_j, -pj / std::sqrt(m_k * m_k + pj * pj), V, 1.0};
}

}  // namespace

TEST_CASE("Lorentz factor") {
  CHECK(lorentz_factor(0.0) == 1.0);
  CHECK(lorentz_factor(0.6) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK_THROWS_AS(lorentz_factor(1.0), Error);
  CHECK_THROWS_AS(Boost{-1.2}.validate(), Error);
  double last = 1.0;
  for (int i = 1; i < 1000; ++i) {
    const double g = lorentz_factor(i / 1000.0);
    CHECK(g > last);
    CHECK(lorentz_factor(-i / 1000.0) == g);
    last = g;
  }
}

TEST_CASE("total energy") {
  CHECK(total_energy({2.0, 3.0, 0.0, 0.0, 0.0, 1.0}) == 5.0);
  CHECK(total_energy({2.0, 3.0, 0.0, 0.0, 0.0, 3.0}) == 45.0);
  const double v = 0.8, m = 1.7, V = 0.05;
  const double gamma = 1.0 / std::sqrt(1.0 - v * v);
  CHECK(total_energy({m, m, v, -v, V, 1.0}) == doctest::Approx(2.0 * gamma * m + V).epsilon(1e-15));
  CHECK_THROWS_AS(total_energy({1.0, 0.0, 0.1, 0.0, 0.0, 1.0}), Error);
}

TEST_CASE("energy boost") {
  CHECK(boost_energy(3.0, 1.0, {0.0}) == 3.0);
  CHECK(boost_energy(2.0, 0.0, {0.6}) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(boost_energy(2.0, 1.0, {0.6}) == doctest::Approx(1.25 * (2.0 - 0.6)).epsilon(1e-15));
}

TEST_CASE("four-vector norm is boost invariant") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> vel(-0.999, 0.999), mass(0.1, 10.0), u(-0.99, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const auto q = particle_momentum(mass(rng), vel(rng));
    const Boost b{u(rng)};
    const auto qb = boost(q, b);
    CHECK(std::abs(qb.invariant() - q.invariant()) <= 1e-12 * q.E * q.E);
    CHECK(qb.E == boost_energy(q.E, q.p, b));
  }
}

TEST_CASE("ratio invariance") {
  const double m = si::m_e * si::c * si::c;
  const RelativisticPair electrons = com_pair(m, m, 1e6 / si::c, 27.2 * si::eV);
  SUBCASE("identity boost") {
    const std::vector<Boost> b{{0.0}};
    CHECK(ratio_invariance(electrons, b).max_deviation == 0.0);
  }
  SUBCASE("electron pair") {
    const std::vector<Boost> b{{0.1}, {0.5}, {0.9}};
    CHECK(ratio_invariance(electrons, b).max_deviation <= 1e-12);
  }
  SUBCASE("random c-o-m pairs") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> vel(-0.95, 0.95), mass(0.1, 10.0), u(-0.99, 0.99), pot(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const std::vector<Boost> b{{u(rng)}, {0.99}, {-0.99}};
      CHECK(ratio_invariance(com_pair(mass(rng), mass(rng), vel(rng), pot(rng)), b).max_deviation <= 1e-12);
    }
  }
  SUBCASE("moving pair rejected") {
    const std::vector<Boost> b{{0.5}};
    CHECK_THROWS_AS(ratio_invariance({1.0, 1.0, 0.3, 0.3, 0.1, 1.0}, b), Error);
  }
}

TEST_CASE("rate integral under time dilation") {
  const InteractionModel model(reference_scattering_scenario());
  InteractionRunOptions opts;
  opts.schrodinger_only = true;
  const auto rec = run_interaction_trajectory(model, reference_scattering_schedule(), {}, opts);
  std::vector<std::pair<double, double>> series;
  for (std::size_t i = 0; i < rec.times.size(); ++i) series.emplace_back(rec.times[i], rec.series.at("gamma")[i]);

  const auto same = rate_integral_invariance(series, {0.0}, 200, 1);
  CHECK(same.integral == same.integral_primed);
  const auto r = rate_integral_invariance(series, {0.6}, 1000, 2);
  CHECK(r.integral > 0.1);
  CHECK(r.deviation <= 1e-12);
  CHECK(std::abs(r.z) <= 5.0);
  CHECK(std::abs(r.mean_square.mean - r.mean_square_exact) <= 5.0 * r.mean_square.std_error);
  CHECK(std::abs(r.mean_square_primed.mean - r.mean_square_exact) <= 5.0 * r.mean_square_primed.std_error);
}

TEST_CASE("scale estimates") {
  const double V = 27.2 * si::eV;
  const auto e = scale_estimates(1e-10, V, si::m_e, si::m_e, 1e6);
  CHECK(e.dt_int == doctest::Approx(2.42e-17).epsilon(0.01));
  CHECK(e.temporal_discrepancy == doctest::Approx(3.3e-19).epsilon(0.02));
  CHECK(e.positional_discrepancy == doctest::Approx(3.3e-13).epsilon(0.02));
  CHECK(e.fraction == doctest::Approx(3.3e-3).epsilon(0.02));
  CHECK(e.nonlinearity == doctest::Approx(7.1e-10).epsilon(0.01));
  CHECK(std::abs(e.dt_int / ReferenceEstimates::dt_int - 1.0) <= 0.1);
  CHECK(within_order_of_magnitude(e.temporal_discrepancy, ReferenceEstimates::temporal_discrepancy));
  CHECK(within_order_of_magnitude(e.positional_discrepancy, ReferenceEstimates::positional_discrepancy));
  CHECK(within_order_of_magnitude(e.fraction, ReferenceEstimates::fraction));
  CHECK(within_order_of_magnitude(e.nonlinearity, ReferenceEstimates::nonlinearity));

  const auto d = scale_estimates(1e-10, 2.0 * V, si::m_e, si::m_e, 1e6);
  CHECK(d.dt_int == doctest::Approx(0.5 * e.dt_int).epsilon(1e-15));
  CHECK(d.nonlinearity == doctest::Approx(4.0 * e.nonlinearity).epsilon(1e-15));
  CHECK_FALSE(within_order_of_magnitude(1.0, 11.0));
}
