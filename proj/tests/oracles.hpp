#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numerics beyond constructing inputs.

#include <cmath>
#include <complex>
#include <vector>

#include "collapse/integrator.hpp"

namespace oracles {

using collapse::Complex;

/// One collapse step for psi = (alpha, beta), O = diag(a, b), H = 0, expanded by hand:
/// with m = a alpha^2 + b beta^2 the deviation is (a - m, b - m), so
/// psi' = psi + sqrt(g) k (a - m, b - m) psi dxi - g k^2 / 2 (a - m, b - m)^2 psi dt,
/// then normalised.
inline std::pair<Complex, Complex> two_level_step(Complex alpha, Complex beta, double a, double b, double k,
                                                  double gamma, double dt, Complex dxi) {
  const double m = a * std::norm(alpha) + b * std::norm(beta);
  const double da = a - m, db = b - m;
  const double s = std::sqrt(gamma) * k;
  const Complex x = alpha * (1.0 + s * da * dxi - 0.5 * s * s * da * da * dt);
  const Complex y = beta * (1.0 + s * db * dxi - 0.5 * s * s * db * db * dt);
  const double n = std::sqrt(std::norm(x) + std::norm(y));
  return {x / n, y / n};
}

/// Mean over the two increments +-sqrt(dt) of |pre-renormalisation norm - 1| after
/// one step from psi. With |dxi|^2 = dt exactly, the O(dt) part of the drift
/// vanishes and what is left is odd in dxi at order dt^{3/2}.
inline double two_point_drift(const collapse::StateVector& psi, const collapse::UnitaryFlow& flow,
                              std::span<const collapse::CollapseTerm> terms) {
  const auto rates = collapse::fixed_rates(terms);
  double sum = 0.0;
  for (double sign : {1.0, -1.0}) {
    double pre = 0.0;
    (void)collapse::em_step(psi, flow, terms, rates, sign * std::sqrt(flow.dt()), &pre);
    sum += std::abs(pre - 1.0);
  }
  return 0.5 * sum;
}

/// Ratios drift(dt) / drift(dt / 2) for successive halvings, expected 2^{3/2}.
template <class FlowFactory>
std::vector<double> drift_ratios(const collapse::StateVector& psi, std::span<const collapse::CollapseTerm> terms,
                                 double dt0, int halvings, FlowFactory make) {
  std::vector<double> drifts;
  double dt = dt0;
  for (int i = 0; i <= halvings; ++i, dt *= 0.5) drifts.push_back(two_point_drift(psi, *make(dt), terms));
  std::vector<double> ratios;
  for (std::size_t i = 1; i < drifts.size(); ++i) ratios.push_back(drifts[i - 1] / drifts[i]);
  return ratios;
}

/// Mean and standard error of a sample.
struct Moments {
  double mean = 0.0;
  double se = 0.0;
};
inline Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += v;
  const double mean = s / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
}

/// Largest |mean(x(t)) - x(0)| / SE over sample times, from per-trajectory series.
/// Where the SE is at rounding level the mean must match to rounding.
inline double martingale_max_z(const std::vector<std::vector<double>>& samples, double x0) {
  double worst = 0.0;
  const std::size_t n_t = samples.front().size();
  for (std::size_t i = 0; i < n_t; ++i) {
    std::vector<double> col;
    col.reserve(samples.size());
    for (const auto& traj : samples) col.push_back(traj[i]);
    const auto m = moments(col);
    const double dev = std::abs(m.mean - x0);
    const double floor = 1e-12 * std::max(1.0, std::abs(x0));
    if (m.se > floor) worst = std::max(worst, dev / m.se);
    else if (dev > floor) worst = INFINITY;
  }
  return worst;
}

}  // namespace oracles
