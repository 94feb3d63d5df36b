#include "collapse/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "collapse/lorentz.hpp"

namespace collapse {

void GridSpec::validate() const {
  if (n_points < 2 || n_points > 128 || (n_points & (n_points - 1)) != 0) {
    throw Error(ErrorKind::invalid_argument, "grid n_points must be a power of two in [2, 128]",
                "grid.n_points");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorKind::invalid_argument, "grid spacing must be positive", "grid.spacing");
  }
}

double potential_at(const Potential& v, double r, const GridSpec& grid) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NoPotential>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, SoftenedCoulomb>) {
          const double eps = p.softening > 0.0 ? p.softening : 2.0 * grid.spacing;
          return p.charge_product / std::sqrt(r * r + eps * eps);
        } else {
          return -p.depth * std::exp(-r * r / (2.0 * p.width * p.width));
        }
      },
      v);
}

namespace {

void check_packet(const Packet& p, const char* path) {
  if (!(p.width > 0.0) || !std::isfinite(p.center) || !std::isfinite(p.wavenumber)) {
    throw Error(ErrorKind::invalid_argument, "packet needs finite center, wavenumber and width > 0", path);
  }
}

// Displacement x - c, taken as the minimum image on periodic grids.
double displacement(double x, double c, const GridSpec& g) {
  double d = x - c;
  if (g.boundary == Boundary::periodic) d -= g.length() * std::round(d / g.length());
  return d;
}

ComplexVector packet_amplitudes(const Packet& p, const GridSpec& g) {
  ComplexVector a(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double d = displacement(i * g.spacing, p.center, g);
    a[i] = std::polar(std::exp(-d * d / (4.0 * p.width * p.width)), p.wavenumber * d);
  }
  return a;
}

ComplexVector product_state(const ProductPackets& pp, const GridSpec& g) {
  const ComplexVector aj = packet_amplitudes(pp.j, g);
  const ComplexVector ak = packet_amplitudes(pp.k, g);
  const Index n = g.n_points;
  ComplexVector psi(n * n);
  for (Index ij = 0; ij < n; ++ij) psi.segment(ij * n, n) = aj[ij] * ak;
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::invalid_argument, "initial packets vanish on the grid");
  return psi / norm;
}

Eigen::MatrixXd stencil(int n, Boundary b) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    l(i, i) = -2.0;
    if (i + 1 < n) l(i, i + 1) = l(i + 1, i) = 1.0;
  }
  if (b == Boundary::periodic) {
    l(0, n - 1) += 1.0;
    l(n - 1, 0) += 1.0;
  }
  return l;
}

ComplexMatrix kinetic_propagator(const Eigen::MatrixXd& t, double dt, double hbar) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
  const ComplexVector phases =
      (eig.eigenvalues() * (-dt / hbar)).unaryExpr([](double x) { return std::polar(1.0, x); });
  const ComplexMatrix q = eig.eigenvectors().cast<Complex>();
  return q * phases.asDiagonal() * q.transpose();
}

}  // namespace

void InteractionScenario::validate() const {
  grid.validate();
  if (!(m_j > 0.0) || !std::isfinite(m_j)) throw Error(ErrorKind::invalid_argument, "m_j must be positive", "m_j");
  if (!(m_k > 0.0) || !std::isfinite(m_k)) throw Error(ErrorKind::invalid_argument, "m_k must be positive", "m_k");
  if (!(c2 >= 0.0) || !std::isfinite(c2)) throw Error(ErrorKind::invalid_argument, "c2 must be >= 0", "c2");
  if (!(hbar > 0.0)) throw Error(ErrorKind::invalid_argument, "hbar must be positive", "hbar");
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SoftenedCoulomb>) {
          if (!std::isfinite(p.charge_product) || !(p.softening >= 0.0)) {
            throw Error(ErrorKind::invalid_argument, "softened Coulomb needs finite charges, softening >= 0",
                        "potential");
          }
        } else if constexpr (std::is_same_v<T, GaussianWell>) {
          if (!std::isfinite(p.depth) || !(p.width > 0.0)) {
            throw Error(ErrorKind::invalid_argument, "gaussian well needs finite depth and width > 0", "potential");
          }
        }
      },
      potential);
  std::visit(
      [this](const auto& init) {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, ProductPackets>) {
          check_packet(init.j, "initial.j");
          check_packet(init.k, "initial.k");
        } else if constexpr (std::is_same_v<T, BranchSuperposition>) {
          check_packet(init.branch1.j, "initial.branch1.j");
          check_packet(init.branch1.k, "initial.branch1.k");
          check_packet(init.branch2.j, "initial.branch2.j");
          check_packet(init.branch2.k, "initial.branch2.k");
          if (!(init.w1 >= 0.0 && init.w2 >= 0.0) || std::abs(init.w1 + init.w2 - 1.0) > 1e-9) {
            throw Error(ErrorKind::invalid_argument, "branch weights must be >= 0 and sum to 1", "initial.w1");
          }
        } else {
          if (grid.boundary != Boundary::periodic) {
            throw Error(ErrorKind::invalid_argument, "momentum eigenstates need a periodic grid", "initial");
          }
          if (!(init.width > 0.0)) throw Error(ErrorKind::invalid_argument, "width must be positive", "initial.width");
        }
      },
      initial);
}

namespace {

StateVector build_initial(const InteractionScenario& s, const RealVector& r) {
  const GridSpec& g = s.grid;
  return std::visit(
      [&](const auto& init) -> StateVector {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, ProductPackets>) {
          return StateVector::normalized(product_state(init, g));
        } else if constexpr (std::is_same_v<T, BranchSuperposition>) {
          return StateVector::normalized(std::sqrt(init.w1) * product_state(init.branch1, g) +
                                         std::sqrt(init.w2) * product_state(init.branch2, g));
        } else {
          const Index n = g.n_points;
          ComplexVector psi(n * n);
          for (Index ij = 0; ij < n; ++ij) {
            const double phase = 2.0 * std::numbers::pi * init.total_index * static_cast<double>(ij) / n;
            for (Index ik = 0; ik < n; ++ik) {
              const double d = displacement(r[ij * n + ik], init.separation, g);
              psi[ij * n + ik] = std::polar(std::exp(-d * d / (4.0 * init.width * init.width)), phase);
            }
          }
          return StateVector::normalized(psi);
        }
      },
      s.initial);
}

}  // namespace

InteractionModel::InteractionModel(const InteractionScenario& s)
    : s_((s.validate(), s)),
      psi0_(StateVector::normalized(ComplexVector::Ones(2))),
      v_op_(RealVector::Zero(1)) {
  const GridSpec& g = s_.grid;
  const Index n = g.n_points;
  r_.resize(n * n);
  v_.resize(n * n);
  for (Index ij = 0; ij < n; ++ij) {
    for (Index ik = 0; ik < n; ++ik) {
      const double r = displacement(static_cast<double>(ij) * g.spacing, static_cast<double>(ik) * g.spacing, g);
      r_[ij * n + ik] = r;
      v_[ij * n + ik] = potential_at(s_.potential, r, g);
    }
  }
  v_op_ = DiagonalOperator(v_);
  const Eigen::MatrixXd l = stencil(g.n_points, g.boundary);
  const double h2 = g.spacing * g.spacing;
  t_j_ = (-s_.hbar * s_.hbar / (2.0 * s_.m_j * h2)) * l;
  t_k_ = (-s_.hbar * s_.hbar / (2.0 * s_.m_k * h2)) * l;

  psi0_ = build_initial(s_, r_);

  if (g.boundary == Boundary::periodic) {
    dft_.resize(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        dft_(a, b) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                -2.0 * std::numbers::pi * static_cast<double>((a * b) % n) / n);
      }
    }
    p_of_index_.resize(n);
    for (Index q = 0; q < n; ++q) {
      const Index wrapped = q < n / 2 ? q : q - n;
      p_of_index_[q] = s_.hbar * 2.0 * std::numbers::pi * static_cast<double>(wrapped) / g.length();
    }
  }

  e_char_ = std::max(kinetic_energy(psi0_.amplitudes()), v_.cwiseAbs().maxCoeff());
  const double mass = s_.m_j + s_.m_k;
  c2_ = s_.c2 > 0.0 ? s_.c2 : 1e4 * e_char_ / mass;
  rest_energy_ = mass * c2_;
}

void InteractionModel::laplacian_j(const ComplexVector& psi, ComplexVector& out) const {
  const Index n = this->n();
  const bool periodic = grid().boundary == Boundary::periodic;
  const double inv_h2 = 1.0 / (grid().spacing * grid().spacing);
  out.resize(psi.size());
  for (Index ij = 0; ij < n; ++ij) {
    const Index up = ij + 1 < n ? ij + 1 : (periodic ? 0 : -1);
    const Index down = ij > 0 ? ij - 1 : (periodic ? n - 1 : -1);
    for (Index ik = 0; ik < n; ++ik) {
      Complex acc = -2.0 * psi[ij * n + ik];
      if (up >= 0) acc += psi[up * n + ik];
      if (down >= 0) acc += psi[down * n + ik];
      out[ij * n + ik] = acc * inv_h2;
    }
  }
}

void InteractionModel::laplacian_k(const ComplexVector& psi, ComplexVector& out) const {
  const Index n = this->n();
  const bool periodic = grid().boundary == Boundary::periodic;
  const double inv_h2 = 1.0 / (grid().spacing * grid().spacing);
  out.resize(psi.size());
  for (Index ij = 0; ij < n; ++ij) {
    const Complex* col = psi.data() + ij * n;
    Complex* dst = out.data() + ij * n;
    for (Index ik = 0; ik < n; ++ik) {
      Complex acc = -2.0 * col[ik];
      if (ik + 1 < n) acc += col[ik + 1];
      else if (periodic) acc += col[0];
      if (ik > 0) acc += col[ik - 1];
      else if (periodic) acc += col[n - 1];
      dst[ik] = acc * inv_h2;
    }
  }
}

double InteractionModel::potential_rate(const ComplexVector& psi) const {
  thread_local ComplexVector lj, lk;
  laplacian_j(psi, lj);
  laplacian_k(psi, lk);
  double sum = 0.0;
  for (Index i = 0; i < psi.size(); ++i) {
    const Complex c = std::conj(psi[i]);
    sum += v_[i] * ((c * lj[i]).imag() / s_.m_j + (c * lk[i]).imag() / s_.m_k);
  }
  return -s_.hbar * sum;
}

double InteractionModel::kinetic_energy(const ComplexVector& psi) const {
  thread_local ComplexVector lj, lk;
  laplacian_j(psi, lj);
  laplacian_k(psi, lk);
  const double tj = psi.dot(lj).real();
  const double tk = psi.dot(lk).real();
  return -s_.hbar * s_.hbar * (tj / (2.0 * s_.m_j) + tk / (2.0 * s_.m_k));
}

double InteractionModel::energy(const ComplexVector& psi) const {
  return kinetic_energy(psi) + v_.dot(psi.cwiseAbs2());
}

std::pair<double, double> InteractionModel::total_momentum(const ComplexVector& psi) const {
  if (grid().boundary != Boundary::periodic) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const Index n = this->n();
  const Eigen::Map<const ComplexMatrix> m(psi.data(), n, n);
  const ComplexMatrix hat = dft_ * m * dft_;
  double mean = 0.0, second = 0.0;
  for (Index mj = 0; mj < n; ++mj) {
    for (Index mk = 0; mk < n; ++mk) {
      const double w = std::norm(hat(mk, mj));
      const double p = p_of_index_[(mj + mk) % n];
      mean += w * p;
      second += w * p * p;
    }
  }
  return {mean, std::max(second - mean * mean, 0.0)};
}

CollapseTerm InteractionModel::collapse_term() const {
  return {v_op_, 1.0 / rest_energy_, VariableRate{}};
}

GridFlow::GridFlow(const InteractionModel& model, double dt)
    : n_(model.n()), dt_(dt), has_potential_(model.potential().cwiseAbs().maxCoeff() > 0.0) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "flow needs dt > 0");
  const double hbar = model.scenario().hbar;
  u_j_ = kinetic_propagator(model.kinetic_j(), dt, hbar);
  u_k_ = kinetic_propagator(model.kinetic_k(), dt, hbar);
  half_v_ = (model.potential() * (-0.5 * dt / hbar)).unaryExpr([](double x) { return std::polar(1.0, x); });
}

void GridFlow::apply(ComplexVector& psi, ComplexVector& scratch) const {
  if (has_potential_) psi.array() *= half_v_.array();
  scratch.resize(psi.size());
  Eigen::Map<ComplexMatrix> m(psi.data(), n_, n_);
  Eigen::Map<ComplexMatrix> s(scratch.data(), n_, n_);
  s.noalias() = u_k_ * m;
  m.noalias() = s * u_j_;
  if (has_potential_) psi.array() *= half_v_.array();
}

HermitianOperator build_hamiltonian(const InteractionModel& model) {
  const Index n = model.n();
  if (model.dim() > kMaxDenseHamiltonianDim) {
    throw Error(ErrorKind::invalid_argument,
                "dense Hamiltonian limited to dim " + std::to_string(kMaxDenseHamiltonianDim), "grid.n_points");
  }
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ComplexMatrix h = kron(model.kinetic_j().cast<Complex>(), id) + kron(id, model.kinetic_k().cast<Complex>());
  h.diagonal() += model.potential().cast<Complex>();
  return HermitianOperator::from_matrix(h);
}

HermitianOperator build_hamiltonian(const InteractionScenario& s) { return build_hamiltonian(InteractionModel(s)); }

CollapseComponent collapse_component(const StateVector& psi, const InteractionModel& model) {
  if (psi.dim() != model.dim()) throw Error(ErrorKind::dimension_mismatch, "state is not on the scenario grid");
  CollapseComponent c;
  c.vector = deviation_apply(model.potential_operator(), psi, 1.0 / model.rest_energy());
  c.magnitude = c.vector.norm();
  return c;
}

double gamma_rate(const ComplexVector& psi, const InteractionModel& model, RateState& rs, double dt) {
  const double abs_v = std::abs(model.potential().dot(psi.cwiseAbs2()));
  rs.peak_abs_v = std::max(rs.peak_abs_v, abs_v);
  const double threshold = model.onset_threshold();
  if (!(abs_v > threshold)) {
    rs.onset = false;
    rs.running_max = threshold;
    return 0.0;
  }
  if (!rs.onset) {
    rs.onset = true;
    rs.running_max = threshold;
    ++rs.onsets;
  }
  rs.running_max = std::max(rs.running_max, abs_v);
  const double numerator = std::abs(model.potential_rate(psi));
  if (!(rs.running_max > 0.0)) {
    if (numerator > 0.0) throw Error(ErrorKind::internal, "rate denominator is zero after onset");
    return 0.0;
  }
  const double gamma = numerator / rs.running_max;
  rs.gamma_integral += gamma * dt;
  return gamma;
}

double duration_estimate(double v_max, UnitSystem units) {
  if (!(v_max > 0.0) || !std::isfinite(v_max)) {
    throw Error(ErrorKind::invalid_argument, "interaction energy must be positive");
  }
  return (units == UnitSystem::si ? si::hbar : 1.0) / v_max;
}

Completion separation_branches(const InteractionModel& model, double radius, double threshold) {
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "branch radius must be positive");
  const RealVector near = (model.separation().array().abs() < radius).cast<double>();
  Completion c;
  c.branches.emplace_back("near", DiagonalOperator(near));
  c.branches.emplace_back("far", DiagonalOperator(RealVector::Ones(near.size()) - near));
  c.threshold = threshold;
  return c;
}

double default_grid_dt(const InteractionModel& model) {
  const double bound = model.kinetic_j().cwiseAbs().rowwise().sum().maxCoeff() +
                       model.kinetic_k().cwiseAbs().rowwise().sum().maxCoeff() +
                       model.potential().cwiseAbs().maxCoeff();
  return 1e-3 * model.scenario().hbar / bound;
}

namespace {

struct TrajectoryOutput {
  TrajectoryRecord record;
  std::map<std::string, double> onset_weights;
};

TrajectoryOutput run_with_flow(const InteractionModel& model, const UnitaryFlow& flow, const Schedule& schedule,
                               const NoiseConfig& noise, const InteractionRunOptions& opts) {
  const std::vector<CollapseTerm> terms{model.collapse_term()};
  RateState rs;
  double last_gamma = 0.0;
  std::map<std::string, double> onset_weights;
  const Completion* completion = opts.completion ? &*opts.completion : nullptr;

  TrajectoryHooks hooks;
  hooks.update_rates = [&](const ComplexVector& psi, std::span<double> rates) {
    const bool was_on = rs.onset;
    last_gamma = gamma_rate(psi, model, rs, schedule.dt);
    if (rs.onset && !was_on && rs.onsets == 1 && completion != nullptr) {
      for (const auto& [label, p] : completion->branches) onset_weights[label] = expectation_unchecked(p, psi);
    }
    rates[0] = opts.schrodinger_only ? 0.0 : last_gamma;
  };
  hooks.observables.emplace_back("norm", [](const ComplexVector& psi) { return psi.norm(); });
  hooks.observables.emplace_back("v", [&model](const ComplexVector& psi) {
    return model.potential().dot(psi.cwiseAbs2());
  });
  hooks.observables.emplace_back("gamma", [&last_gamma](const ComplexVector&) { return last_gamma; });
  hooks.observables.emplace_back("gamma_integral", [&rs](const ComplexVector&) { return rs.gamma_integral; });
  hooks.observables.emplace_back("p_total", [&model](const ComplexVector& psi) {
    return model.total_momentum(psi).first;
  });
  hooks.observables.emplace_back("p_variance", [&model](const ComplexVector& psi) {
    return model.total_momentum(psi).second;
  });
  hooks.observables.emplace_back("h_total", [&model](const ComplexVector& psi) { return model.energy(psi); });
  if (completion != nullptr) {
    for (const auto& [label, p] : completion->branches) {
      hooks.observables.emplace_back("w_" + label, [&p](const ComplexVector& psi) {
        return expectation_unchecked(p, psi);
      });
    }
  }
  NoiseConfig cfg = noise;
  cfg.complex_noise = opts.complex_noise;
  TrajectoryOutput out;
  out.record = integrate_trajectory(model.initial_state(), flow, terms, schedule, cfg, completion, &hooks);
  out.onset_weights = std::move(onset_weights);
  return out;
}

}  // namespace

TrajectoryRecord run_interaction_trajectory(const InteractionModel& model, const Schedule& schedule,
                                            const NoiseConfig& noise, const InteractionRunOptions& opts) {
  schedule.validate();
  const GridFlow flow(model, schedule.dt);
  return run_with_flow(model, flow, schedule, noise, opts).record;
}

std::vector<StateVector> dense_schrodinger_reference(const InteractionModel& model, const Schedule& schedule) {
  schedule.validate();
  const HermitianOperator h = build_hamiltonian(model);
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h.matrix());
  const ComplexVector c0 = eig.eigenvectors().adjoint() * model.initial_state().amplitudes();
  const double hbar = model.scenario().hbar;
  std::vector<StateVector> out;
  for (std::size_t step = 0; step <= schedule.n_steps; step += schedule.record_every) {
    const double t = static_cast<double>(step) * schedule.dt;
    ComplexVector c(c0.size());
    for (Index i = 0; i < c.size(); ++i) c[i] = c0[i] * std::polar(1.0, -eig.eigenvalues()[i] * t / hbar);
    out.push_back(StateVector::normalized(eig.eigenvectors() * c));
  }
  return out;
}

MeasurementResult simulate_measurement(const InteractionModel& model, std::size_t n_traj, std::uint64_t seed,
                                       const Schedule& schedule, const InteractionRunOptions& opts,
                                       const EnsembleOptions& ensemble) {
  schedule.validate();
  const GridFlow flow(model, schedule.dt);
  std::vector<std::map<std::string, double>> onset(n_traj);
  const TrajectoryFn fn = [&](std::uint64_t index) {
    TrajectoryOutput out = run_with_flow(model, flow, schedule, NoiseConfig{seed, schedule.dt, false, index}, opts);
    onset[index] = std::move(out.onset_weights);
    return summarize(out.record, index);
  };
  MeasurementResult res;
  res.stats = run_ensemble(fn, n_traj, ensemble);
  res.dt = schedule.dt;
  res.c2 = model.c2();
  res.onset_threshold = model.onset_threshold();
  res.completion_threshold = opts.completion ? opts.completion->threshold : 0.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& m : onset) {
    for (const auto& [label, w] : m) {
      res.onset_weights[label] += w;
      ++counts[label];
    }
  }
  for (auto& [label, w] : res.onset_weights) w /= static_cast<double>(counts[label]);
  res.budget_exhausted = opts.completion.has_value() &&
                         static_cast<double>(res.stats.unresolved) > 0.01 * static_cast<double>(n_traj);
  return res;
}

InteractionScenario reference_scattering_scenario() {
  InteractionScenario s;
  s.grid = {32, 1.0, Boundary::periodic};
  s.potential = GaussianWell{1.0, 1.5};
  s.initial = ProductPackets{{8.0, 2.0, 1.0}, {24.0, 2.0, -1.0}};
  return s;
}

Schedule reference_scattering_schedule() { return {0.01, 2000, 10, false}; }

InteractionScenario branch_measurement_scenario(double w1) {
  InteractionScenario s;
  s.m_j = s.m_k = 10.0;
  s.grid = {16, 1.0, Boundary::periodic};
  s.potential = GaussianWell{10.0, 3.0};
  s.c2 = 0.05;
  s.initial = BranchSuperposition{w1, {{4.0, 0.5, 0.0}, {5.5, 0.5, 0.0}}, 1.0 - w1, {{4.0, 0.5, 0.0}, {12.0, 0.5, 0.0}}};
  return s;
}

}  // namespace collapse
