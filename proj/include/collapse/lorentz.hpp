#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "collapse/noise.hpp"

namespace collapse {

namespace si {
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double c = 2.99792458e8;         // m / s
inline constexpr double m_e = 9.1093837015e-31;   // kg
inline constexpr double eV = 1.602176634e-19;     // J
}  // namespace si

/// Two systems moving along one axis. Velocities are fractions of c; energies
/// and momenta (as p c) come out in units of mass * c^2.
struct RelativisticPair {
  double m_j = 1.0;
  double m_k = 1.0;
  double v_j = 0.0;
  double v_k = 0.0;
  /// Interaction energy V_jk.
  double V = 0.0;
  double c = 1.0;

  void validate() const;
};

struct Boost {
  double u = 0.0;

  void validate() const;
  double lorentz_factor() const;
};

/// 1 / sqrt(1 - u^2); throws unless |u| < 1.
double lorentz_factor(double u);

/// (E, p c): energy and momentum in the same units.
struct FourMomentum {
  double E = 0.0;
  double p = 0.0;
  double invariant() const { return E * E - p * p; }
};

FourMomentum particle_momentum(double m, double v, double c = 1.0);
FourMomentum boost(const FourMomentum& q, const Boost& b);

/// (m_j Gamma_j + m_k Gamma_k) c^2 + V.
double total_energy(const RelativisticPair& p);
/// p_j + p_k (as p c).
double total_momentum(const RelativisticPair& p);

/// Gamma (E - u p_par).
double boost_energy(double E, double p_par, const Boost& b);

struct RatioRow {
  double u = 0.0;
  double ratio_com = 0.0;
  double ratio_scaled = 0.0;
  double ratio_four_vector = 0.0;
  double deviation = 0.0;
};

struct RatioInvariance {
  double max_deviation = 0.0;
  std::vector<RatioRow> rows;
};

/// V'/E'_total in each boosted frame, both by scaling with Gamma and by boosting
/// every four-vector, compared with the c-o-m ratio. Throws unless the pair has
/// zero total momentum (to 1e-12 of its energy).
RatioInvariance ratio_invariance(const RelativisticPair& p, std::span<const Boost> boosts);

struct MeanSquare {
  double mean = 0.0;
  double std_error = 0.0;
};

struct RateIntegralInvariance {
  double integral = 0.0;
  double integral_primed = 0.0;
  double deviation = 0.0;
  /// Monte Carlo mean square of sum sqrt(gamma) dxi in each frame.
  MeanSquare mean_square;
  MeanSquare mean_square_primed;
  /// Exact value sum gamma_i dt_i of that mean square.
  double mean_square_exact = 0.0;
  double z = 0.0;
};

/// Trapezoid integrals of gamma dt under t' = Gamma t, gamma' = gamma / Gamma,
/// plus mean squares of sum sqrt(gamma_i) dxi_i over n_paths noise paths per
/// frame, with Var dxi' = Gamma dt in the primed frame.
RateIntegralInvariance rate_integral_invariance(std::span<const std::pair<double, double>> series, const Boost& b,
                                                std::size_t n_paths = 1000, std::uint64_t seed = 0);

struct ScaleEstimates {
  double dt_int = 0.0;
  double temporal_discrepancy = 0.0;
  double positional_discrepancy = 0.0;
  double fraction = 0.0;
  double nonlinearity = 0.0;
};

/// Published rounded figures for the same quantities.
struct ReferenceEstimates {
  static constexpr double dt_int = 2.5e-17;
  static constexpr double temporal_discrepancy = 1e-18;
  static constexpr double positional_discrepancy = 1e-12;
  static constexpr double fraction = 0.01;
  static constexpr double nonlinearity = 1e-9;
};

/// SI inputs: separation in m, v_max_energy in J, masses in kg, v_max in m/s.
ScaleEstimates scale_estimates(double separation, double v_max_energy, double m_j, double m_k, double v_max);

/// |log10(a / b)| <= 1 for positive a, b.
bool within_order_of_magnitude(double a, double b);

}  // namespace collapse
