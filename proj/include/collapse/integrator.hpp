#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "collapse/noise.hpp"
#include "collapse/state.hpp"

namespace collapse {

/// Exact Hamiltonian propagator exp(-i H dt / hbar) for one fixed step size.
class UnitaryFlow {
 public:
  virtual ~UnitaryFlow() = default;
  virtual double dt() const = 0;
  virtual Index dim() const = 0;
  /// psi <- exp(-i H dt / hbar) psi. `scratch` is caller-owned workspace.
  virtual void apply(ComplexVector& psi, ComplexVector& scratch) const = 0;
  virtual bool is_identity() const { return false; }
};

/// H = 0.
class IdentityFlow final : public UnitaryFlow {
 public:
  IdentityFlow(Index dim, double dt) : dim_(dim), dt_(dt) {}
  double dt() const override { return dt_; }
  Index dim() const override { return dim_; }
  void apply(ComplexVector&, ComplexVector&) const override {}
  bool is_identity() const override { return true; }

 private:
  Index dim_;
  double dt_;
};

/// Dense propagator built from an eigendecomposition of H.
class DenseFlow final : public UnitaryFlow {
 public:
  DenseFlow(const HermitianOperator& h, double dt, double hbar = 1.0);
  double dt() const override { return dt_; }
  Index dim() const override { return u_.rows(); }
  void apply(ComplexVector& psi, ComplexVector& scratch) const override;
  const ComplexMatrix& matrix() const { return u_; }

 private:
  ComplexMatrix u_;
  double dt_;
};

/// IdentityFlow when H is exactly zero, DenseFlow otherwise.
std::shared_ptr<const UnitaryFlow> make_flow(const HermitianOperator& h, double dt, double hbar = 1.0);

struct FixedRate {
  double gamma = 0.0;
};
/// Rate supplied per step by the caller (e.g. the interaction rate gamma_jk).
struct VariableRate {};
using RateMode = std::variant<FixedRate, VariableRate>;

/// One collapse term k (O - <O>) driven at rate gamma.
struct CollapseTerm {
  Observable op;
  double strength = 1.0;
  RateMode rate = FixedRate{0.0};

  void validate() const;
};

/// Per-step rates: fixed values for FixedRate terms, `variable` filled in order
/// for VariableRate terms.
std::vector<double> fixed_rates(std::span<const CollapseTerm> terms);

/// Reusable workspace for the Euler-Maruyama collapse step.
class EmKernel {
 public:
  explicit EmKernel(Index dim);

  /// One step in place: psi <- U psi, then psi += V psi dxi - 1/2 V^2 psi dt with
  /// V = sum_i sqrt(gamma_i) k_i (O_i - <O_i>), then renormalise.
  /// Returns the norm before renormalisation. Throws Error(integration_failure)
  /// if the result is not finite.
  double step(ComplexVector& psi, const UnitaryFlow& flow, std::span<const CollapseTerm> terms,
              std::span<const double> rates, Complex dxi);

 private:
  ComplexVector scratch_, opv_, drive_, comp_;
  std::vector<double> means_;
};

/// Single step on a StateVector (allocates its own workspace).
StateVector em_step(const StateVector& psi, const UnitaryFlow& flow,
                    std::span<const CollapseTerm> terms, std::span<const double> rates, Complex dxi,
                    double* pre_norm = nullptr);

/// Convenience form taking H and dt directly; rates are the fixed rates of `terms`.
StateVector em_step(const StateVector& psi, const HermitianOperator& h,
                    std::span<const CollapseTerm> terms, double dt, Complex dxi);

struct Schedule {
  double dt = 1e-3;
  std::size_t n_steps = 1000;
  std::size_t record_every = 1;
  bool record_states = false;

  void validate() const;
  std::size_t n_samples() const { return n_steps / record_every + 1; }
};

/// Outcome rule: label the trajectory with the first branch whose weight
/// <psi|P|psi> reaches `threshold`.
struct Completion {
  std::vector<std::pair<std::string, Observable>> branches;
  double threshold = 1.0 - 1e-6;
};

/// Optional per-trajectory callbacks. Instances are trajectory-local.
struct TrajectoryHooks {
  /// Called at the start of each step with the current state; must write one
  /// rate per VariableRate term, in term order.
  std::function<void(const ComplexVector& psi, std::span<double> variable_rates)> update_rates;
  /// Extra named series sampled at record points.
  std::vector<std::pair<std::string, std::function<double(const ComplexVector& psi)>>> observables;
  /// Replaces the drawn increment; used only for negative-control experiments.
  std::function<Complex(Complex dxi)> transform_increment;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> norms;
  /// Largest |pre-renormalisation norm - 1| over the steps since the previous sample.
  std::vector<double> pre_norm_drift;
  std::map<std::string, std::vector<double>> series;
  std::optional<std::string> outcome;
  std::size_t steps_taken = 0;
  double completion_threshold = 0.0;
};

/// Integrates from `initial` for schedule.n_steps steps or until `completion`
/// fires. Fixed-rate terms record their expectation <O_i> as series "O<i>".
TrajectoryRecord integrate_trajectory(const StateVector& initial, const UnitaryFlow& flow,
                                      std::span<const CollapseTerm> terms, const Schedule& schedule,
                                      const NoiseConfig& noise, const Completion* completion = nullptr,
                                      TrajectoryHooks* hooks = nullptr);

/// Spectral width max - min of an observable (exact for diagonal and dim <= 64,
/// bounded by twice the inf-norm above that).
double spectral_spread(const Observable& op);

/// Step size satisfying max(||H|| dt / hbar, sum_i k_i^2 spread(O_i)^2 gamma_i dt) <= 1e-3.
double default_dt(const HermitianOperator& h, std::span<const CollapseTerm> terms, double hbar = 1.0);

}  // namespace collapse
