#include "collapse/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "collapse/error.hpp"

namespace collapse {

double lorentz_factor(double u) {
  if (!(std::abs(u) < 1.0)) throw Error(ErrorKind::invalid_argument, "speed must satisfy |u| < 1");
  return 1.0 / std::sqrt((1.0 - u) * (1.0 + u));
}

void Boost::validate() const { collapse::lorentz_factor(u); }

double Boost::lorentz_factor() const { return collapse::lorentz_factor(u); }

void RelativisticPair::validate() const {
  if (!(m_j > 0.0) || !(m_k > 0.0) || !std::isfinite(m_j) || !std::isfinite(m_k)) {
    throw Error(ErrorKind::invalid_argument, "rest masses must be positive (massless systems are out of scope)");
  }
  if (!(std::abs(v_j) < 1.0) || !(std::abs(v_k) < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "velocities must satisfy |v| < c");
  }
  if (!std::isfinite(V) || !(c > 0.0)) throw Error(ErrorKind::invalid_argument, "V must be finite and c > 0");
}

FourMomentum particle_momentum(double m, double v, double c) {
  const double g = lorentz_factor(v);
  return {g * m * c * c, g * m * v * c * c};
}

FourMomentum boost(const FourMomentum& q, const Boost& b) {
  const double g = b.lorentz_factor();
  return {g * (q.E - b.u * q.p), g * (q.p - b.u * q.E)};
}

double total_energy(const RelativisticPair& p) {
  p.validate();
  return particle_momentum(p.m_j, p.v_j, p.c).E + particle_momentum(p.m_k, p.v_k, p.c).E + p.V;
}

double total_momentum(const RelativisticPair& p) {
  p.validate();
  return particle_momentum(p.m_j, p.v_j, p.c).p + particle_momentum(p.m_k, p.v_k, p.c).p;
}

double boost_energy(double E, double p_par, const Boost& b) {
  if (!std::isfinite(E) || !std::isfinite(p_par)) throw Error(ErrorKind::invalid_argument, "non-finite input");
  return b.lorentz_factor() * (E - b.u * p_par);
}

RatioInvariance ratio_invariance(const RelativisticPair& p, std::span<const Boost> boosts) {
  const double e_total = total_energy(p);
  const double p_total = total_momentum(p);
  if (std::abs(p_total) > 1e-12 * std::abs(e_total)) {
    throw Error(ErrorKind::invalid_argument, "pair is not in its centre-of-mass frame");
  }
  const FourMomentum qj = particle_momentum(p.m_j, p.v_j, p.c);
  const FourMomentum qk = particle_momentum(p.m_k, p.v_k, p.c);
  // In the c-o-m frame the interaction energy is the time component of (V, 0).
  const FourMomentum qv{p.V, 0.0};
  const double ratio_com = p.V / e_total;

  RatioInvariance out;
  for (const Boost& b : boosts) {
    const double g = b.lorentz_factor();
    RatioRow row;
    row.u = b.u;
    row.ratio_com = ratio_com;
    row.ratio_scaled = (g * p.V) / (g * e_total);
    const double v_prime = boost(qv, b).E;
    const double e_prime = boost(qj, b).E + boost(qk, b).E + v_prime;
    row.ratio_four_vector = v_prime / e_prime;
    const double scale = std::max(std::abs(ratio_com), std::numeric_limits<double>::min());
    row.deviation = std::max(std::abs(row.ratio_scaled - ratio_com), std::abs(row.ratio_four_vector - ratio_com)) /
                    scale;
    if (ratio_com == 0.0) row.deviation = std::max(std::abs(row.ratio_scaled), std::abs(row.ratio_four_vector));
    out.max_deviation = std::max(out.max_deviation, row.deviation);
    out.rows.push_back(row);
  }
  return out;
}

namespace {

double trapezoid(std::span<const std::pair<double, double>> s, double t_scale, double y_scale) {
  double sum = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = (s[i].first - s[i - 1].first) * t_scale;
    sum += 0.5 * dt * (s[i].second + s[i - 1].second) * y_scale;
  }
  return sum;
}

MeanSquare mean_square(std::span<const std::pair<double, double>> s, double t_scale, double y_scale,
                       std::size_t n_paths, std::uint64_t seed, std::uint64_t stream_offset) {
  std::vector<double> squares(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) {
    const NoiseStream noise(NoiseConfig{seed, 1.0, false, stream_offset + k});
    double sum = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double dt = (s[i].first - s[i - 1].first) * t_scale;
      sum += std::sqrt(std::max(s[i - 1].second * y_scale, 0.0)) * std::sqrt(dt) * noise.normal_pair(i).first;
    }
    squares[k] = sum * sum;
  }
  const double n = static_cast<double>(n_paths);
  const double mean = std::accumulate(squares.begin(), squares.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : squares) ss += (x - mean) * (x - mean);
  return {mean, n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

RateIntegralInvariance rate_integral_invariance(std::span<const std::pair<double, double>> series, const Boost& b,
                                                std::size_t n_paths, std::uint64_t seed) {
  if (series.empty()) throw Error(ErrorKind::invalid_argument, "rate series is empty");
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (!(series[i].first > series[i - 1].first)) {
      throw Error(ErrorKind::invalid_argument, "rate series times must be strictly increasing");
    }
  }
  for (const auto& [t, g] : series) {
    if (!std::isfinite(t) || !(g >= 0.0)) throw Error(ErrorKind::invalid_argument, "rates must be finite and >= 0");
  }
  const double g = b.lorentz_factor();
  RateIntegralInvariance r;
  r.integral = trapezoid(series, 1.0, 1.0);
  r.integral_primed = trapezoid(series, g, 1.0 / g);
  r.deviation = std::abs(r.integral_primed - r.integral) / std::max(std::abs(r.integral), 1e-300);
  if (r.integral == 0.0) r.deviation = std::abs(r.integral_primed);
  for (std::size_t i = 1; i < series.size(); ++i) {
    r.mean_square_exact += series[i - 1].second * (series[i].first - series[i - 1].first);
  }
  if (n_paths > 0) {
    r.mean_square = mean_square(series, 1.0, 1.0, n_paths, seed, 0);
    r.mean_square_primed = mean_square(series, g, 1.0 / g, n_paths, seed, n_paths);
    const double se = std::hypot(r.mean_square.std_error, r.mean_square_primed.std_error);
    r.z = se > 0.0 ? (r.mean_square_primed.mean - r.mean_square.mean) / se : 0.0;
  }
  return r;
}

ScaleEstimates scale_estimates(double separation, double v_max_energy, double m_j, double m_k, double v_max) {
  for (double x : {separation, v_max_energy, m_j, m_k, v_max}) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::invalid_argument, "scale inputs must be positive");
  }
  ScaleEstimates e;
  e.dt_int = si::hbar / v_max_energy;
  e.temporal_discrepancy = separation / si::c;
  e.positional_discrepancy = v_max * e.temporal_discrepancy;
  e.fraction = e.positional_discrepancy / separation;
  const double ratio = v_max_energy / ((m_j + m_k) * si::c * si::c);
  e.nonlinearity = ratio * ratio;
  return e;
}

bool within_order_of_magnitude(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return false;
  return std::abs(std::log10(a / b)) <= 1.0;
}

}  // namespace collapse
