#include "collapse/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace collapse {

DenseFlow::DenseFlow(const HermitianOperator& h, double dt, double hbar) : dt_(dt) {
  if (!(dt > 0.0) || !(hbar > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "flow needs dt > 0 and hbar > 0");
  }
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h.matrix());
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::numerical, "eigendecomposition of the Hamiltonian failed");
  }
  const ComplexVector phases =
      (eig.eigenvalues() * (-dt / hbar)).unaryExpr([](double x) { return std::polar(1.0, x); });
  u_ = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

void DenseFlow::apply(ComplexVector& psi, ComplexVector& scratch) const {
  scratch.noalias() = u_ * psi;
  psi.swap(scratch);
}

std::shared_ptr<const UnitaryFlow> make_flow(const HermitianOperator& h, double dt, double hbar) {
  if (h.matrix().cwiseAbs().maxCoeff() == 0.0) {
    if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "flow needs dt > 0");
    return std::make_shared<IdentityFlow>(h.dim(), dt);
  }
  return std::make_shared<DenseFlow>(h, dt, hbar);
}

void CollapseTerm::validate() const {
  if (!std::isfinite(strength)) {
    throw Error(ErrorKind::invalid_argument, "collapse strength must be finite");
  }
  if (const auto* f = std::get_if<FixedRate>(&rate); f && !(f->gamma >= 0.0 && std::isfinite(f->gamma))) {
    throw Error(ErrorKind::invalid_argument, "fixed collapse rate must be finite and >= 0");
  }
}

std::vector<double> fixed_rates(std::span<const CollapseTerm> terms) {
  std::vector<double> rates;
  rates.reserve(terms.size());
  for (const auto& t : terms) {
    const auto* f = std::get_if<FixedRate>(&t.rate);
    rates.push_back(f ? f->gamma : 0.0);
  }
  return rates;
}

EmKernel::EmKernel(Index dim)
    : scratch_(dim), opv_(dim), drive_(dim), comp_(dim) {}

double EmKernel::step(ComplexVector& psi, const UnitaryFlow& flow, std::span<const CollapseTerm> terms,
                      std::span<const double> rates, Complex dxi) {
  flow.apply(psi, scratch_);

  bool active = false;
  for (std::size_t i = 0; i < terms.size(); ++i) active = active || (rates[i] > 0.0 && terms[i].strength != 0.0);

  if (active) {
    const double dt = flow.dt();
    means_.assign(terms.size(), 0.0);
    drive_.setZero();
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double c = std::sqrt(rates[i]) * terms[i].strength;
      if (c == 0.0) continue;
      means_[i] = expectation_unchecked(terms[i].op, psi);
      apply(terms[i].op, psi, opv_);
      drive_ += c * (opv_ - means_[i] * psi);
    }
    // Compensator V^2 psi, applying V to the drive vector V psi.
    comp_.setZero();
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double c = std::sqrt(rates[i]) * terms[i].strength;
      if (c == 0.0) continue;
      apply(terms[i].op, drive_, opv_);
      comp_ += c * (opv_ - means_[i] * drive_);
    }
    psi += dxi * drive_ - (0.5 * dt) * comp_;
  }

  const double pre_norm = psi.norm();
  if (!std::isfinite(pre_norm) || pre_norm == 0.0) {
    throw Error(ErrorKind::integration_failure,
                "non-finite state after step (pre-renormalisation norm " + std::to_string(pre_norm) +
                    ", dxi " + std::to_string(std::abs(dxi)) + ")");
  }
  psi /= pre_norm;
  return pre_norm;
}

StateVector em_step(const StateVector& psi, const UnitaryFlow& flow,
                    std::span<const CollapseTerm> terms, std::span<const double> rates, Complex dxi,
                    double* pre_norm) {
  if (flow.dim() != psi.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "flow dimension does not match state");
  }
  if (rates.size() != terms.size()) {
    throw Error(ErrorKind::invalid_argument, "one rate per collapse term is required");
  }
  for (const auto& t : terms) {
    t.validate();
    if (dim(t.op) != psi.dim()) {
      throw Error(ErrorKind::dimension_mismatch, "collapse operator dimension does not match state");
    }
  }
  EmKernel kernel(psi.dim());
  ComplexVector amps = psi.amplitudes();
  const double n = kernel.step(amps, flow, terms, rates, dxi);
  if (pre_norm) *pre_norm = n;
  return StateVector::from_normalized(std::move(amps));
}

StateVector em_step(const StateVector& psi, const HermitianOperator& h,
                    std::span<const CollapseTerm> terms, double dt, Complex dxi) {
  const auto flow = make_flow(h, dt);
  const auto rates = fixed_rates(terms);
  return em_step(psi, *flow, terms, rates, dxi);
}

void Schedule::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::invalid_argument, "schedule dt must be positive", "schedule.dt");
  }
  if (n_steps == 0) {
    throw Error(ErrorKind::invalid_argument, "schedule needs n_steps >= 1", "schedule.n_steps");
  }
  if (record_every == 0) {
    throw Error(ErrorKind::invalid_argument, "schedule needs record_every >= 1", "schedule.record_every");
  }
}

namespace {

std::optional<std::string> check_completion(const Completion* completion, const ComplexVector& psi) {
  if (completion == nullptr) return std::nullopt;
  for (const auto& [label, projector] : completion->branches) {
    if (expectation_unchecked(projector, psi) >= completion->threshold) return label;
  }
  return std::nullopt;
}

}  // namespace

TrajectoryRecord integrate_trajectory(const StateVector& initial, const UnitaryFlow& flow,
                                      std::span<const CollapseTerm> terms, const Schedule& schedule,
                                      const NoiseConfig& noise, const Completion* completion,
                                      TrajectoryHooks* hooks) {
  schedule.validate();
  if (flow.dim() != initial.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "flow dimension does not match initial state");
  }
  if (std::abs(flow.dt() - schedule.dt) > 1e-15 * schedule.dt) {
    throw Error(ErrorKind::invalid_argument, "flow was built for a different dt than the schedule");
  }
  std::size_t n_variable = 0;
  for (const auto& t : terms) {
    t.validate();
    if (dim(t.op) != initial.dim()) {
      throw Error(ErrorKind::dimension_mismatch, "collapse operator dimension does not match state");
    }
    if (std::holds_alternative<VariableRate>(t.rate)) ++n_variable;
  }
  if (n_variable > 0 && (hooks == nullptr || !hooks->update_rates)) {
    throw Error(ErrorKind::invalid_argument, "variable-rate terms need an update_rates hook");
  }
  if (completion != nullptr) {
    for (const auto& [label, p] : completion->branches) {
      if (dim(p) != initial.dim()) {
        throw Error(ErrorKind::dimension_mismatch, "branch projector '" + label + "' has wrong dimension");
      }
    }
  }

  NoiseConfig cfg = noise;
  cfg.dt = schedule.dt;
  const NoiseStream stream(cfg);

  TrajectoryRecord rec;
  rec.completion_threshold = completion ? completion->threshold : 0.0;
  std::vector<double> rates = fixed_rates(terms);
  std::vector<double> variable(n_variable, 0.0);
  std::vector<std::size_t> fixed_terms;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (std::holds_alternative<FixedRate>(terms[i].rate)) fixed_terms.push_back(i);
  }

  ComplexVector psi = initial.amplitudes();
  EmKernel kernel(psi.size());
  double drift_since_sample = 0.0;

  auto record = [&](std::size_t step) {
    rec.times.push_back(static_cast<double>(step) * schedule.dt);
    rec.norms.push_back(psi.norm());
    rec.pre_norm_drift.push_back(drift_since_sample);
    drift_since_sample = 0.0;
    if (schedule.record_states) rec.states.push_back(StateVector::from_normalized(psi));
    for (std::size_t i : fixed_terms) {
      rec.series["O" + std::to_string(i)].push_back(expectation_unchecked(terms[i].op, psi));
    }
    if (hooks) {
      for (const auto& [name, fn] : hooks->observables) rec.series[name].push_back(fn(psi));
    }
  };

  for (std::size_t step = 0;; ++step) {
    if (n_variable > 0) {
      hooks->update_rates(psi, variable);
      std::size_t v = 0;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        if (std::holds_alternative<VariableRate>(terms[i].rate)) rates[i] = variable[v++];
      }
    }
    const bool sample_due = step % schedule.record_every == 0;
    if (auto label = check_completion(completion, psi)) {
      rec.outcome = std::move(label);
      record(step);
      break;
    }
    if (sample_due) record(step);
    if (step == schedule.n_steps) break;

    Complex dxi = stream.increment(step);
    if (hooks && hooks->transform_increment) dxi = hooks->transform_increment(dxi);
    double pre = 0.0;
    try {
      pre = kernel.step(psi, flow, terms, rates, dxi);
    } catch (const Error& e) {
      throw Error(ErrorKind::integration_failure,
                  std::string(e.what()) + " at step " + std::to_string(step) + ", t = " +
                      std::to_string(static_cast<double>(step) * schedule.dt));
    }
    drift_since_sample = std::max(drift_since_sample, std::abs(pre - 1.0));
    rec.steps_taken = step + 1;
  }
  return rec;
}

double spectral_spread(const Observable& op) {
  if (const auto* d = std::get_if<DiagonalOperator>(&op)) {
    return d->diagonal().maxCoeff() - d->diagonal().minCoeff();
  }
  const auto& h = std::get<HermitianOperator>(op);
  if (h.dim() <= 64) {
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h.matrix(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff() - eig.eigenvalues().minCoeff();
  }
  return 2.0 * h.inf_norm();
}

double default_dt(const HermitianOperator& h, std::span<const CollapseTerm> terms, double hbar) {
  double rate = h.inf_norm() / hbar;
  double collapse = 0.0;
  for (const auto& t : terms) {
    const auto* f = std::get_if<FixedRate>(&t.rate);
    if (f == nullptr) continue;
    const double s = spectral_spread(t.op);
    collapse += t.strength * t.strength * s * s * f->gamma;
  }
  rate = std::max(rate, collapse);
  if (rate == 0.0) return 1e-3;
  return 1e-3 / rate;
}

}  // namespace collapse
