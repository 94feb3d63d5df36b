#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collapse/integrator.hpp"
#include "collapse/state.hpp"

namespace collapse {

/// What the ensemble keeps from one trajectory.
struct TrajectorySummary {
  std::uint64_t index = 0;
  std::optional<std::string> outcome;
  std::optional<std::string> failure;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  /// |psi><psi| at each sample; only for dim <= 4.
  std::vector<ComplexMatrix> densities;
};

/// Largest state dimension for which densities are retained.
inline constexpr Index kMaxDensityDim = 4;

TrajectorySummary summarize(const TrajectoryRecord& rec, std::uint64_t index);

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> std_error;
};

struct EnsembleStats {
  std::size_t n_traj = 0;
  /// Trajectories without an outcome label (includes failed ones).
  std::size_t unresolved = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> outcome_counts;
  std::vector<double> times;
  std::map<std::string, SeriesStats> mean_series;
  std::vector<ComplexMatrix> mean_density;

  /// Per-trajectory data in trajectory-index order, present when requested.
  std::map<std::string, std::vector<std::vector<double>>> samples;
  std::vector<std::vector<ComplexMatrix>> density_samples;
  std::vector<std::string> failure_messages;
};

/// Order-independent collection of trajectory summaries. Statistics are
/// computed in trajectory-index order at finalize(), so any grouping of
/// merges yields bit-identical results.
class EnsembleAccumulator {
 public:
  void add(TrajectorySummary summary);
  void merge(const EnsembleAccumulator& other);
  std::size_t size() const { return by_index_.size(); }
  EnsembleStats finalize(bool keep_samples = false) const;

 private:
  std::map<std::uint64_t, TrajectorySummary> by_index_;
};

struct EnsembleOptions {
  /// Worker threads; 0 means the OpenMP default.
  int workers = 0;
  bool keep_samples = false;
  /// Fraction of failed trajectories above which the run throws.
  double max_failure_fraction = 1e-3;
};

using TrajectoryFn = std::function<TrajectorySummary(std::uint64_t index)>;

/// OpenMP worker pool over trajectory indices 0..n_traj-1.
EnsembleStats run_ensemble(const TrajectoryFn& fn, std::size_t n_traj, const EnsembleOptions& opts = {});

/// Single-threaded reference implementation of run_ensemble.
EnsembleStats run_ensemble_serial(const TrajectoryFn& fn, std::size_t n_traj,
                                  const EnsembleOptions& opts = {});

/// A dense-operator system driven by fixed-rate collapse terms.
struct DenseScenario {
  StateVector initial;
  HermitianOperator hamiltonian;
  std::vector<CollapseTerm> terms;
  std::optional<Completion> completion;
  bool complex_noise = false;
  /// Extra expectations recorded as named series.
  std::vector<std::pair<std::string, Observable>> observables;
  /// Negative controls only: replaces each drawn increment.
  std::function<Complex(Complex)> transform_increment;
};

/// Trajectory i of `scenario` (noise index i, seed base_seed).
TrajectoryRecord run_trajectory(const DenseScenario& scenario, std::uint64_t base_seed,
                                const Schedule& schedule, std::uint64_t index);

EnsembleStats run_ensemble(const DenseScenario& scenario, std::size_t n_traj, std::uint64_t base_seed,
                           const Schedule& schedule, const EnsembleOptions& opts = {});
EnsembleStats run_ensemble_serial(const DenseScenario& scenario, std::size_t n_traj,
                                  std::uint64_t base_seed, const Schedule& schedule,
                                  const EnsembleOptions& opts = {});

struct BornTestResult {
  std::size_t n = 0;
  std::map<std::string, double> observed;
  std::map<std::string, double> z_scores;
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool pass = false;
  std::string diagnostic;
};

/// Per-label binomial z-scores and a k-cell chi-square goodness-of-fit test of
/// outcome counts against `expected` (which must sum to 1). Passes iff every
/// |z| <= z_limit and the chi-square p-value >= significance.
BornTestResult born_test(const std::map<std::string, std::size_t>& counts,
                         const std::map<std::string, double>& expected, double significance = 1e-3,
                         double z_limit = 3.0);
BornTestResult born_test(const EnsembleStats& stats, const std::map<std::string, double>& expected,
                         double significance = 1e-3, double z_limit = 3.0);

struct JointChiSquare {
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool pass = false;
};

/// Sum of independent chi-square statistics, tested at `significance`.
JointChiSquare joint_chi_square(std::span<const BornTestResult> results, double significance = 1e-3);

/// Upper-tail probability of a chi-square variate with `dof` degrees of freedom.
double chi_square_p_value(double chi_square, int dof);

/// Deterministic oracle for the ensemble-mean density matrix at time t.
using DensityReference = std::function<ComplexMatrix(double t)>;

/// exp(L t) rho0 for the master equation
/// d rho/dt = -i/hbar [H, rho] + sum_i gamma_i k_i^2 (O_i rho O_i - 1/2 {O_i^2, rho}),
/// the Ito average of the collapse dynamics (the <O> shifts cancel in the mean).
DensityReference lindblad_reference(const ComplexMatrix& rho0, const HermitianOperator& h,
                                    std::span<const CollapseTerm> terms, double hbar = 1.0);

struct DensityCheck {
  double max_deviation = 0.0;
  /// Largest deviation in units of its Monte Carlo standard error (needs samples).
  double max_z = 0.0;
};

DensityCheck mean_density_check(const EnsembleStats& stats, const DensityReference& reference);

struct DecayFit {
  double rate = 0.0;
  double std_error = 0.0;
  std::size_t n_points = 0;
};

/// Least-squares fit of log|mean rho(row, col)(t)| = c - rate t over samples
/// whose magnitude stays above floor_fraction of the initial one. Jackknife
/// (delete-one trajectory) standard error; needs density samples.
DecayFit fit_coherence_decay(const EnsembleStats& stats, Index row, Index col,
                             double floor_fraction = 0.135);

struct BipartiteScenario {
  StateVector initial;
  BipartitePartition partition;
  /// Collapse observable on subsystem A (dim_a x dim_a).
  HermitianOperator observable_a;
  double strength = 1.0;
  double gamma = 1.0;
  Schedule schedule;
};

enum class SignalingProbe {
  genuine,
  /// Adds a deterministic bias to every increment; must be detected.
  negative_control,
};

struct NoSignalingResult {
  double trace_distance = 0.0;
  double std_error = 0.0;
  bool pass = false;
  ComplexMatrix rho_b_test;
  ComplexMatrix rho_b_reference;
};

/// Trace distance between the final ensemble-mean reduced states of B with and
/// without the A-side collapse term. Passes if within 5 jackknife standard
/// errors of 0.
NoSignalingResult no_signaling_test(const BipartiteScenario& scenario, bool collapse_on_a,
                                    std::size_t n_traj, std::uint64_t seed,
                                    SignalingProbe probe = SignalingProbe::genuine,
                                    const EnsembleOptions& opts = {});

}  // namespace collapse
