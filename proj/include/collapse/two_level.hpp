#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "collapse/ensemble.hpp"
#include "collapse/integrator.hpp"
#include "collapse/state.hpp"

namespace collapse {

/// psi = alpha |x> + beta |y> with real nonnegative amplitudes, collapse
/// observable O = a |x><x| + b |y><y|, strength k and fixed rate gamma.
struct TwoLevelSpec {
  double alpha = 1.0;
  double beta = 0.0;
  double a = 1.0;
  double b = -1.0;
  double k = 1.0;
  double gamma = 1.0;

  void validate() const;
  /// Spec with alpha = sqrt(1 - beta2), beta = sqrt(beta2).
  static TwoLevelSpec from_beta2(double beta2, double a = 1.0, double b = -1.0, double k = 1.0,
                                 double gamma = 1.0);

  StateVector state() const;
  DiagonalOperator observable() const;
  CollapseTerm term() const;
  /// gamma k^2 (a - b)^2, the inverse collapse time scale.
  double collapse_rate() const;
  /// Decay rate of the mean off-diagonal element: gamma k^2 (a - b)^2 / 2.
  double coherence_decay_rate() const;
};

struct TangentTerm {
  double coefficient = 0.0;
  /// beta |x> - alpha |y>.
  StateVector tangent;
};

/// k alpha beta (a - b) and the unit tangent to the arc at psi.
TangentTerm tangent_term(const TwoLevelSpec& spec);

/// Position beta^2 of psi along the arc from |x> (0) to |y> (1).
double walk_coordinate(double alpha, double beta);

struct FixedStep {
  double delta = 0.05;
};
/// delta drawn uniformly on (0, max_delta] each step.
struct CappedRandomStep {
  double max_delta = 0.1;
};
using StepRule = std::variant<FixedStep, CappedRandomStep>;

struct GamblerRuinResult {
  double frequency = 0.0;
  std::size_t absorbed_at_one = 0;
  std::size_t n_walks = 0;
  double mean_steps = 0.0;
};

/// Unbiased +-delta walks on [0, 1] from p. Each step is capped by the distance to
/// both walls so the walk never overshoots, and is absorbed on reaching 0 or 1.
GamblerRuinResult gambler_ruin_oracle(double p, const StepRule& rule, std::size_t n_walks,
                                      std::uint64_t seed);

/// Collapse completion on the two eigenbranches, labelled "x" and "y".
Completion two_level_completion(double threshold = 1.0 - 1e-6);

/// The two-level system as an ensemble scenario; records "beta2" = <y|rho|y>.
DenseScenario two_level_scenario(const TwoLevelSpec& spec, const HermitianOperator& h,
                                 double threshold = 1.0 - 1e-6);

/// 50 collapse time constants: ceil(50 / (gamma k^2 (a - b)^2 dt)).
std::size_t default_step_budget(const TwoLevelSpec& spec, double dt);

/// dt such that max(||H|| dt, gamma k^2 (a - b)^2 dt) = 1e-3.
double default_two_level_dt(const TwoLevelSpec& spec, const HermitianOperator& h);

struct BornExperimentResult {
  std::size_t count_x = 0;
  std::size_t count_y = 0;
  std::size_t unresolved = 0;
  std::size_t n_traj = 0;
  std::size_t step_budget = 0;
  double dt = 0.0;
  double threshold = 0.0;
  /// More than 1% of trajectories did not resolve within the budget.
  bool budget_exhausted = false;

  double frequency_y() const {
    const auto resolved = count_x + count_y;
    return resolved ? static_cast<double>(count_y) / static_cast<double>(resolved) : 0.0;
  }
};

struct BornExperimentOptions {
  /// 0 selects default_two_level_dt.
  double dt = 0.0;
  /// 0 selects default_step_budget.
  std::size_t step_budget = 0;
  double threshold = 1.0 - 1e-6;
  EnsembleOptions ensemble;
};

/// n_traj collapse trajectories; H must commute with the collapse observable for
/// the outcome statistics to be the Born weights. H = 0 if omitted.
BornExperimentResult born_experiment(const TwoLevelSpec& spec, std::size_t n_traj, std::uint64_t seed,
                                     const BornExperimentOptions& opts = {});
BornExperimentResult born_experiment(const TwoLevelSpec& spec, const HermitianOperator& h,
                                     std::size_t n_traj, std::uint64_t seed,
                                     const BornExperimentOptions& opts = {});

}  // namespace collapse
