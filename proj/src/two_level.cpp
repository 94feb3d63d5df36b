#include "collapse/two_level.hpp"

#include <algorithm>
#include <cmath>

namespace collapse {

void TwoLevelSpec::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "two-level amplitudes must be real and nonnegative");
  }
  if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-12) {
    throw Error(ErrorKind::invalid_argument, "two-level amplitudes must satisfy alpha^2 + beta^2 = 1");
  }
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(k)) {
    throw Error(ErrorKind::invalid_argument, "two-level eigenvalues and strength must be finite");
  }
  if (!(gamma >= 0.0 && std::isfinite(gamma))) {
    throw Error(ErrorKind::invalid_argument, "two-level rate must be finite and >= 0");
  }
}

TwoLevelSpec TwoLevelSpec::from_beta2(double beta2, double a, double b, double k, double gamma) {
  if (!(beta2 >= 0.0 && beta2 <= 1.0)) throw Error(ErrorKind::invalid_argument, "beta2 must lie in [0, 1]");
  TwoLevelSpec s{std::sqrt(1.0 - beta2), std::sqrt(beta2), a, b, k, gamma};
  s.validate();
  return s;
}

StateVector TwoLevelSpec::state() const {
  validate();
  ComplexVector v(2);
  v << alpha, beta;
  return StateVector::normalized(v);
}

DiagonalOperator TwoLevelSpec::observable() const { return DiagonalOperator(RealVector{{a, b}}); }

CollapseTerm TwoLevelSpec::term() const { return {observable(), k, FixedRate{gamma}}; }

double TwoLevelSpec::collapse_rate() const { return gamma * k * k * (a - b) * (a - b); }

double TwoLevelSpec::coherence_decay_rate() const { return 0.5 * collapse_rate(); }

TangentTerm tangent_term(const TwoLevelSpec& spec) {
  spec.validate();
  ComplexVector t(2);
  t << spec.beta, -spec.alpha;
  return {spec.k * spec.alpha * spec.beta * (spec.a - spec.b), StateVector::normalized(t)};
}

double walk_coordinate(double alpha, double beta) {
  if (!(alpha >= 0.0 && beta >= 0.0) || std::abs(alpha * alpha + beta * beta - 1.0) > 1e-12) {
    throw Error(ErrorKind::invalid_argument, "walk coordinate needs alpha, beta >= 0 on the unit arc");
  }
  if (alpha == 0.0) return 1.0;
  if (beta == 0.0) return 0.0;
  return beta * beta;
}

GamblerRuinResult gambler_ruin_oracle(double p, const StepRule& rule, std::size_t n_walks,
                                      std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_argument, "walk start must lie in [0, 1]");
  if (n_walks == 0) throw Error(ErrorKind::invalid_argument, "need at least one walk");
  const double max_delta = std::visit(
      [](const auto& r) {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, FixedStep>) return r.delta;
        else return r.max_delta;
      },
      rule);
  if (!(max_delta > 0.0 && max_delta <= 0.5)) {
    throw Error(ErrorKind::invalid_argument, "step size must lie in (0, 0.5]");
  }
  const bool random_size = std::holds_alternative<CappedRandomStep>(rule);
  constexpr double kAbsorb = 1e-12;

  GamblerRuinResult res;
  res.n_walks = n_walks;
  double total_steps = 0.0;
  for (std::size_t w = 0; w < n_walks; ++w) {
    const NoiseStream rng(NoiseConfig{seed, 1.0, false, w});
    double x = p;
    std::uint64_t s = 0;
    while (x > kAbsorb && x < 1.0 - kAbsorb) {
      double delta = random_size ? max_delta * rng.uniform(2 * s + 1) : max_delta;
      delta = std::min({delta, x, 1.0 - x});
      x += (rng.word(2 * s) >> 63) ? delta : -delta;
      ++s;
    }
    if (x >= 1.0 - kAbsorb) ++res.absorbed_at_one;
    total_steps += static_cast<double>(s);
  }
  res.frequency = static_cast<double>(res.absorbed_at_one) / static_cast<double>(n_walks);
  res.mean_steps = total_steps / static_cast<double>(n_walks);
  return res;
}

Completion two_level_completion(double threshold) {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "completion threshold must lie in (0.5, 1]");
  }
  Completion c;
  c.branches.emplace_back("x", DiagonalOperator(RealVector{{1.0, 0.0}}));
  c.branches.emplace_back("y", DiagonalOperator(RealVector{{0.0, 1.0}}));
  c.threshold = threshold;
  return c;
}

DenseScenario two_level_scenario(const TwoLevelSpec& spec, const HermitianOperator& h, double threshold) {
  spec.validate();
  if (h.dim() != 2) throw Error(ErrorKind::dimension_mismatch, "two-level Hamiltonian must be 2x2");
  DenseScenario s{spec.state(), h, {spec.term()}, two_level_completion(threshold), false, {}, {}};
  s.observables.emplace_back("beta2", DiagonalOperator(RealVector{{0.0, 1.0}}));
  return s;
}

std::size_t default_step_budget(const TwoLevelSpec& spec, double dt) {
  const double rate = spec.collapse_rate();
  if (!(rate > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "step budget needs gamma k^2 (a - b)^2 > 0 and dt > 0");
  }
  return static_cast<std::size_t>(std::ceil(50.0 / (rate * dt)));
}

double default_two_level_dt(const TwoLevelSpec& spec, const HermitianOperator& h) {
  const double scale = std::max(h.inf_norm(), spec.collapse_rate());
  if (!(scale > 0.0)) throw Error(ErrorKind::invalid_argument, "no dynamics to set a time step from");
  return 1e-3 / scale;
}

BornExperimentResult born_experiment(const TwoLevelSpec& spec, std::size_t n_traj, std::uint64_t seed,
                                     const BornExperimentOptions& opts) {
  return born_experiment(spec, HermitianOperator::zero(2), n_traj, seed, opts);
}

BornExperimentResult born_experiment(const TwoLevelSpec& spec, const HermitianOperator& h,
                                     std::size_t n_traj, std::uint64_t seed,
                                     const BornExperimentOptions& opts) {
  spec.validate();
  if (!(spec.gamma > 0.0) || spec.a == spec.b) {
    throw Error(ErrorKind::invalid_argument, "Born experiment needs gamma > 0 and a != b");
  }
  BornExperimentResult r;
  r.n_traj = n_traj;
  r.dt = opts.dt > 0.0 ? opts.dt : default_two_level_dt(spec, h);
  r.step_budget = opts.step_budget > 0 ? opts.step_budget : default_step_budget(spec, r.dt);
  r.threshold = opts.threshold;

  const DenseScenario scenario = two_level_scenario(spec, h, opts.threshold);
  const Schedule schedule{r.dt, r.step_budget, r.step_budget, false};
  const EnsembleStats st = run_ensemble(scenario, n_traj, seed, schedule, opts.ensemble);
  const auto count = [&st](const char* label) {
    const auto it = st.outcome_counts.find(label);
    return it == st.outcome_counts.end() ? std::size_t{0} : it->second;
  };
  r.count_x = count("x");
  r.count_y = count("y");
  r.unresolved = st.unresolved;
  r.budget_exhausted = static_cast<double>(r.unresolved) > 0.01 * static_cast<double>(n_traj);
  return r;
}

}  // namespace collapse
