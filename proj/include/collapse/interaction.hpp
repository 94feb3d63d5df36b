#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "collapse/ensemble.hpp"
#include "collapse/integrator.hpp"
#include "collapse/state.hpp"

namespace collapse {

enum class Boundary { periodic, hard_wall };

/// Both particles live on the same 1-D grid x_i = i * spacing, i < n_points.
struct GridSpec {
  int n_points = 32;
  double spacing = 1.0;
  Boundary boundary = Boundary::periodic;

  void validate() const;
  Index dim() const { return static_cast<Index>(n_points) * n_points; }
  double length() const { return n_points * spacing; }
};

/// Largest configuration dimension (128 x 128).
inline constexpr Index kMaxGridDim = 16384;
/// Largest dimension for which build_hamiltonian materialises a dense matrix.
inline constexpr Index kMaxDenseHamiltonianDim = 4096;

/// q_j q_k / sqrt(r^2 + softening^2); softening 0 means 2 * spacing.
struct SoftenedCoulomb {
  double charge_product = 1.0;
  double softening = 0.0;
};
/// -depth * exp(-r^2 / (2 width^2)).
struct GaussianWell {
  double depth = 1.0;
  double width = 1.0;
};
struct NoPotential {};
using Potential = std::variant<NoPotential, SoftenedCoulomb, GaussianWell>;

double potential_at(const Potential& v, double r, const GridSpec& grid);

/// Gaussian amplitude exp(-(x - center)^2 / (4 width^2) + i wavenumber (x - center)).
struct Packet {
  double center = 0.0;
  double width = 1.0;
  double wavenumber = 0.0;
};
struct ProductPackets {
  Packet j;
  Packet k;
};
/// sqrt(w1) phi_1 + sqrt(w2) phi_2 with each branch normalised first.
struct BranchSuperposition {
  double w1 = 0.5;
  ProductPackets branch1;
  double w2 = 0.5;
  ProductPackets branch2;
};
/// exp(2 pi i M i_j / n) g(r), g a Gaussian in the separation: an eigenstate of
/// total translation on a periodic grid.
struct MomentumEigenstate {
  int total_index = 0;
  double separation = 0.0;
  double width = 1.0;
};
using InitialState = std::variant<ProductPackets, BranchSuperposition, MomentumEigenstate>;

struct InteractionScenario {
  double m_j = 1.0;
  double m_k = 1.0;
  Potential potential = NoPotential{};
  InitialState initial = ProductPackets{};
  GridSpec grid;
  /// c^2 in internal units; 0 selects 1e4 * E_char / (m_j + m_k).
  double c2 = 0.0;
  double hbar = 1.0;

  void validate() const;
};

/// Precomputed operators for one scenario. Immutable and shareable across threads.
class InteractionModel {
 public:
  explicit InteractionModel(const InteractionScenario& s);

  const InteractionScenario& scenario() const { return s_; }
  const GridSpec& grid() const { return s_.grid; }
  Index dim() const { return s_.grid.dim(); }
  int n() const { return s_.grid.n_points; }

  const StateVector& initial_state() const { return psi0_; }
  /// Diagonal of V_jk over the flattened grid, index i_j * n + i_k.
  const RealVector& potential() const { return v_; }
  const DiagonalOperator& potential_operator() const { return v_op_; }
  /// Separation x_j - x_k at each grid point (minimum image when periodic).
  const RealVector& separation() const { return r_; }

  double c2() const { return c2_; }
  /// (m_j + m_k) c^2.
  double rest_energy() const { return rest_energy_; }
  /// |<V>| above which the interaction counts as on: 1e-6 (m_j + m_k) c^2.
  double onset_threshold() const { return 1e-6 * rest_energy_; }
  /// max(<T> of the initial state, max |V|).
  double characteristic_energy() const { return e_char_; }

  /// psi <- Lap_j psi and Lap_k psi, 3-point stencil with the grid boundary (units 1/length^2).
  void laplacian_j(const ComplexVector& psi, ComplexVector& out) const;
  void laplacian_k(const ComplexVector& psi, ComplexVector& out) const;
  /// Single-particle kinetic matrix -hbar^2 / (2 m spacing^2) * stencil.
  const Eigen::MatrixXd& kinetic_j() const { return t_j_; }
  const Eigen::MatrixXd& kinetic_k() const { return t_k_; }

  /// d<V>/dt under the Schrodinger part, -hbar sum V (Im(psi* Lap_j psi)/m_j + Im(psi* Lap_k psi)/m_k).
  double potential_rate(const ComplexVector& psi) const;
  double kinetic_energy(const ComplexVector& psi) const;
  double energy(const ComplexVector& psi) const;

  /// <P_total> and its variance; NaN on hard-wall grids.
  std::pair<double, double> total_momentum(const ComplexVector& psi) const;

  /// Collapse term (V - <V>) / ((m_j + m_k) c^2) with a per-step rate.
  CollapseTerm collapse_term() const;

 private:
  InteractionScenario s_;
  StateVector psi0_;
  RealVector v_, r_;
  DiagonalOperator v_op_;
  Eigen::MatrixXd t_j_, t_k_;
  ComplexMatrix dft_;
  RealVector p_of_index_;
  double c2_ = 0.0, rest_energy_ = 0.0, e_char_ = 0.0;
};

/// Strang-split propagator exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2), with the
/// kinetic factor applied exactly as U_k Psi U_j on the n x n amplitude array.
class GridFlow final : public UnitaryFlow {
 public:
  GridFlow(const InteractionModel& model, double dt);
  double dt() const override { return dt_; }
  Index dim() const override { return n_ * n_; }
  void apply(ComplexVector& psi, ComplexVector& scratch) const override;

 private:
  Index n_;
  double dt_;
  ComplexMatrix u_j_, u_k_;
  ComplexVector half_v_;
  bool has_potential_;
};

/// Dense H = T_j (x) I + I (x) T_k + V. Throws for dims above kMaxDenseHamiltonianDim.
HermitianOperator build_hamiltonian(const InteractionModel& model);
HermitianOperator build_hamiltonian(const InteractionScenario& s);

struct CollapseComponent {
  ComplexVector vector;
  double magnitude = 0.0;
};

/// (V - <V>) psi / ((m_j + m_k) c^2).
CollapseComponent collapse_component(const StateVector& psi, const InteractionModel& model);

struct RateState {
  double running_max = 0.0;
  bool onset = false;
  double gamma_integral = 0.0;
  /// Largest |<V>| seen over the whole run, for retrospective checks.
  double peak_abs_v = 0.0;
  std::size_t onsets = 0;
};

/// gamma = |d<V>/dt| / running_max while |<V>| exceeds the onset threshold, else 0.
/// The running max starts at the threshold at each onset and resets when the
/// interaction ends. Accumulates gamma * dt into rs.gamma_integral.
double gamma_rate(const ComplexVector& psi, const InteractionModel& model, RateState& rs, double dt);

enum class UnitSystem { internal, si };

/// hbar / V_max (seconds for SI, with V_max in joules).
double duration_estimate(double v_max, UnitSystem units);

/// Completion on separation: "near" if |r| < radius, "far" otherwise.
Completion separation_branches(const InteractionModel& model, double radius, double threshold = 1.0 - 1e-6);

/// 1e-3 / ||H||, with ||H|| bounded by the kinetic stencils plus max |V|.
double default_grid_dt(const InteractionModel& model);

struct InteractionRunOptions {
  std::optional<Completion> completion;
  bool complex_noise = false;
  /// Run with the collapse term switched off (Schrodinger reference).
  bool schrodinger_only = false;
};

/// One trajectory. Series: norm, v, gamma, gamma_integral, p_total, p_variance,
/// h_total, plus w_<label> for each completion branch. The pre-renormalisation
/// norm of the preceding step is in `norms`.
TrajectoryRecord run_interaction_trajectory(const InteractionModel& model, const Schedule& schedule,
                                            const NoiseConfig& noise, const InteractionRunOptions& opts = {});

/// States at the record times of `schedule`, propagated exactly with the dense
/// Hamiltonian (no splitting, no collapse).
std::vector<StateVector> dense_schrodinger_reference(const InteractionModel& model, const Schedule& schedule);

struct MeasurementResult {
  EnsembleStats stats;
  double dt = 0.0;
  double c2 = 0.0;
  double onset_threshold = 0.0;
  double completion_threshold = 0.0;
  /// Mean branch weights at the first interaction onset (trajectories that had one).
  std::map<std::string, double> onset_weights;
  bool budget_exhausted = false;
};

MeasurementResult simulate_measurement(const InteractionModel& model, std::size_t n_traj, std::uint64_t seed,
                                       const Schedule& schedule, const InteractionRunOptions& opts = {},
                                       const EnsembleOptions& ensemble = {});

/// Two packets (n = 32, periodic) approaching through a Gaussian well, the
/// Schrodinger-only reference for the rate integral. Use with reference_scattering_schedule().
InteractionScenario reference_scattering_scenario();
Schedule reference_scattering_schedule();

/// Superposition of a bound pair (weight w1, separation 1.5) and a far-apart pair
/// (separation 8) on a 16-point periodic grid, with c2 small enough that collapse
/// completes in a few thousand steps. Branches: separation_branches(model, 4).
InteractionScenario branch_measurement_scenario(double w1);

}  // namespace collapse
