#include "collapse/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <omp.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace collapse {

TrajectorySummary summarize(const TrajectoryRecord& rec, std::uint64_t index) {
  TrajectorySummary s;
  s.index = index;
  s.outcome = rec.outcome;
  s.times = rec.times;
  s.series = rec.series;
  if (!rec.states.empty() && rec.states.front().dim() <= kMaxDensityDim) {
    s.densities.reserve(rec.states.size());
    for (const auto& st : rec.states) {
      s.densities.push_back(st.amplitudes() * st.amplitudes().adjoint());
    }
  }
  return s;
}

void EnsembleAccumulator::add(TrajectorySummary summary) {
  const auto idx = summary.index;
  if (!by_index_.emplace(idx, std::move(summary)).second) {
    throw Error(ErrorKind::invalid_argument, "trajectory " + std::to_string(idx) + " added twice");
  }
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  for (const auto& [idx, s] : other.by_index_) add(s);
}

namespace {

// Value of a (possibly early-terminated) series at sample i: the stopped process.
double padded(const std::vector<double>& xs, std::size_t i) {
  return xs.empty() ? 0.0 : xs[std::min(i, xs.size() - 1)];
}

const ComplexMatrix& padded(const std::vector<ComplexMatrix>& xs, std::size_t i) {
  return xs[std::min(i, xs.size() - 1)];
}

}  // namespace

EnsembleStats EnsembleAccumulator::finalize(bool keep_samples) const {
  EnsembleStats st;
  st.n_traj = by_index_.size();
  std::size_t n_samples = 0;
  const TrajectorySummary* longest = nullptr;
  std::map<std::string, bool> names;
  bool densities = !by_index_.empty();
  for (const auto& [idx, s] : by_index_) {
    if (s.failure) {
      ++st.failed;
      if (st.failure_messages.size() < 10) st.failure_messages.push_back(*s.failure);
    }
    if (s.outcome) {
      ++st.outcome_counts[*s.outcome];
    } else {
      ++st.unresolved;
    }
    if (s.failure) continue;
    if (s.times.size() > n_samples) {
      n_samples = s.times.size();
      longest = &s;
    }
    for (const auto& [name, xs] : s.series) names[name] = true;
    densities = densities && !s.densities.empty();
  }
  if (longest != nullptr) st.times = longest->times;

  const std::size_t n_ok = st.n_traj - st.failed;
  for (const auto& [name, unused] : names) {
    SeriesStats ss;
    ss.mean.assign(n_samples, 0.0);
    ss.std_error.assign(n_samples, 0.0);
    std::vector<std::vector<double>> per_traj;
    for (std::size_t i = 0; i < n_samples; ++i) {
      double sum = 0.0;
      for (const auto& [idx, s] : by_index_) {
        if (s.failure) continue;
        const auto it = s.series.find(name);
        if (it != s.series.end()) sum += padded(it->second, i);
      }
      const double mean = sum / static_cast<double>(n_ok);
      double ss2 = 0.0;
      for (const auto& [idx, s] : by_index_) {
        if (s.failure) continue;
        const auto it = s.series.find(name);
        const double x = it != s.series.end() ? padded(it->second, i) : 0.0;
        ss2 += (x - mean) * (x - mean);
      }
      ss.mean[i] = mean;
      ss.std_error[i] = n_ok > 1 ? std::sqrt(ss2 / static_cast<double>(n_ok - 1) / static_cast<double>(n_ok)) : 0.0;
    }
    st.mean_series[name] = std::move(ss);
    if (keep_samples) {
      auto& out = st.samples[name];
      for (const auto& [idx, s] : by_index_) {
        if (s.failure) continue;
        std::vector<double> row(n_samples);
        const auto it = s.series.find(name);
        for (std::size_t i = 0; i < n_samples; ++i) row[i] = it != s.series.end() ? padded(it->second, i) : 0.0;
        out.push_back(std::move(row));
      }
    }
  }

  if (densities && n_ok > 0) {
    const Index d = by_index_.begin()->second.densities.front().rows();
    st.mean_density.assign(n_samples, ComplexMatrix::Zero(d, d));
    for (const auto& [idx, s] : by_index_) {
      if (s.failure) continue;
      for (std::size_t i = 0; i < n_samples; ++i) st.mean_density[i] += padded(s.densities, i);
      if (keep_samples) {
        std::vector<ComplexMatrix> row;
        row.reserve(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) row.push_back(padded(s.densities, i));
        st.density_samples.push_back(std::move(row));
      }
    }
    for (auto& m : st.mean_density) m /= static_cast<double>(n_ok);
  }
  return st;
}

namespace {

TrajectorySummary guarded(const TrajectoryFn& fn, std::uint64_t index) {
  try {
    return fn(index);
  } catch (const std::exception& e) {
    TrajectorySummary s;
    s.index = index;
    s.failure = "trajectory " + std::to_string(index) + ": " + e.what();
    return s;
  }
}

EnsembleStats collect(std::vector<TrajectorySummary>& slots, const EnsembleOptions& opts) {
  EnsembleAccumulator acc;
  for (auto& s : slots) acc.add(std::move(s));
  EnsembleStats st = acc.finalize(opts.keep_samples);
  if (st.n_traj > 0 &&
      static_cast<double>(st.failed) > opts.max_failure_fraction * static_cast<double>(st.n_traj)) {
    throw Error(ErrorKind::integration_failure,
                std::to_string(st.failed) + " of " + std::to_string(st.n_traj) +
                    " trajectories failed; first: " + st.failure_messages.front());
  }
  return st;
}

}  // namespace

EnsembleStats run_ensemble(const TrajectoryFn& fn, std::size_t n_traj, const EnsembleOptions& opts) {
  if (n_traj == 0) throw Error(ErrorKind::invalid_argument, "ensemble needs n_traj >= 1");
  std::vector<TrajectorySummary> slots(n_traj);
  const int workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(n_traj);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t i = 0; i < n; ++i) {
    slots[static_cast<std::size_t>(i)] = guarded(fn, static_cast<std::uint64_t>(i));
  }
  return collect(slots, opts);
}

EnsembleStats run_ensemble_serial(const TrajectoryFn& fn, std::size_t n_traj, const EnsembleOptions& opts) {
  if (n_traj == 0) throw Error(ErrorKind::invalid_argument, "ensemble needs n_traj >= 1");
  std::vector<TrajectorySummary> slots;
  slots.reserve(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) slots.push_back(guarded(fn, i));
  return collect(slots, opts);
}

TrajectoryRecord run_trajectory(const DenseScenario& scenario, std::uint64_t base_seed,
                                const Schedule& schedule, std::uint64_t index) {
  const auto flow = make_flow(scenario.hamiltonian, schedule.dt);
  TrajectoryHooks hooks;
  for (const auto& [name, op] : scenario.observables) {
    hooks.observables.emplace_back(name, [op](const ComplexVector& psi) { return expectation_unchecked(op, psi); });
  }
  hooks.transform_increment = scenario.transform_increment;
  const NoiseConfig noise{base_seed, schedule.dt, scenario.complex_noise, index};
  return integrate_trajectory(scenario.initial, *flow, scenario.terms, schedule, noise,
                              scenario.completion ? &*scenario.completion : nullptr, &hooks);
}

namespace {

TrajectoryFn dense_fn(const DenseScenario& scenario, std::uint64_t base_seed, Schedule schedule) {
  schedule.validate();
  // Small systems keep their states so that summaries carry density matrices.
  if (scenario.initial.dim() <= kMaxDensityDim) schedule.record_states = true;
  const auto flow = make_flow(scenario.hamiltonian, schedule.dt);
  return [&scenario, base_seed, schedule, flow](std::uint64_t index) {
    TrajectoryHooks hooks;
    for (const auto& [name, op] : scenario.observables) {
      hooks.observables.emplace_back(name, [&op](const ComplexVector& psi) { return expectation_unchecked(op, psi); });
    }
    hooks.transform_increment = scenario.transform_increment;
    const NoiseConfig noise{base_seed, schedule.dt, scenario.complex_noise, index};
    return summarize(integrate_trajectory(scenario.initial, *flow, scenario.terms, schedule, noise,
                                          scenario.completion ? &*scenario.completion : nullptr, &hooks),
                     index);
  };
}

}  // namespace

EnsembleStats run_ensemble(const DenseScenario& scenario, std::size_t n_traj, std::uint64_t base_seed,
                           const Schedule& schedule, const EnsembleOptions& opts) {
  return run_ensemble(dense_fn(scenario, base_seed, schedule), n_traj, opts);
}

EnsembleStats run_ensemble_serial(const DenseScenario& scenario, std::size_t n_traj,
                                  std::uint64_t base_seed, const Schedule& schedule,
                                  const EnsembleOptions& opts) {
  return run_ensemble_serial(dense_fn(scenario, base_seed, schedule), n_traj, opts);
}

double chi_square_p_value(double chi_square, int dof) {
  if (dof <= 0) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, std::max(chi_square, 0.0)));
}

BornTestResult born_test(const std::map<std::string, std::size_t>& counts,
                         const std::map<std::string, double>& expected, double significance,
                         double z_limit) {
  double total_p = 0.0;
  for (const auto& [label, p] : expected) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_argument, "expected probability out of [0, 1]");
    total_p += p;
  }
  if (std::abs(total_p - 1.0) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "expected probabilities must sum to 1");
  }
  BornTestResult r;
  for (const auto& [label, c] : counts) {
    if (!expected.contains(label) && c > 0) {
      r.diagnostic = "outcome '" + label + "' has no expected probability";
      return r;
    }
    r.n += c;
  }
  if (r.n == 0) {
    r.diagnostic = "no resolved outcomes";
    return r;
  }
  const double n = static_cast<double>(r.n);
  bool ok = true;
  int cells = 0;
  for (const auto& [label, p] : expected) {
    const auto it = counts.find(label);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    r.observed[label] = c / n;
    if (p == 0.0 || p == 1.0) {
      const bool exact = (p == 0.0) ? c == 0.0 : c == n;
      r.z_scores[label] = 0.0;
      if (!exact) {
        ok = false;
        r.diagnostic = "label '" + label + "' has probability " + std::to_string(p) + " but count " +
                       std::to_string(static_cast<std::size_t>(c));
      }
    } else {
      const double z = (c / n - p) / std::sqrt(p * (1.0 - p) / n);
      r.z_scores[label] = z;
      ok = ok && std::abs(z) <= z_limit;
    }
    if (p > 0.0) {
      r.chi_square += (c - n * p) * (c - n * p) / (n * p);
      ++cells;
    }
  }
  r.dof = std::max(cells - 1, 0);
  r.p_value = chi_square_p_value(r.chi_square, r.dof);
  r.pass = ok && r.p_value >= significance;
  return r;
}

BornTestResult born_test(const EnsembleStats& stats, const std::map<std::string, double>& expected,
                         double significance, double z_limit) {
  return born_test(stats.outcome_counts, expected, significance, z_limit);
}

JointChiSquare joint_chi_square(std::span<const BornTestResult> results, double significance) {
  JointChiSquare j;
  for (const auto& r : results) {
    j.chi_square += r.chi_square;
    j.dof += r.dof;
  }
  j.p_value = chi_square_p_value(j.chi_square, j.dof);
  j.pass = j.p_value >= significance;
  return j;
}

namespace {

ComplexMatrix dense_matrix(const Observable& op) {
  if (const auto* d = std::get_if<DiagonalOperator>(&op)) return d->to_dense().matrix();
  return std::get<HermitianOperator>(op).matrix();
}

}  // namespace

DensityReference lindblad_reference(const ComplexMatrix& rho0, const HermitianOperator& h,
                                    std::span<const CollapseTerm> terms, double hbar) {
  const Index d = rho0.rows();
  if (d > kMaxDensityDim || rho0.cols() != d || h.dim() != d) {
    throw Error(ErrorKind::dimension_mismatch, "density reference needs matching dims <= 4");
  }
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  // Column-stacking vec: vec(A X B) = (B^T (x) A) vec(X).
  ComplexMatrix liou = Complex(0.0, -1.0 / hbar) * (kron(id, h.matrix()) - kron(h.matrix().transpose(), id));
  for (const auto& t : terms) {
    const auto* f = std::get_if<FixedRate>(&t.rate);
    if (f == nullptr) throw Error(ErrorKind::invalid_argument, "density reference needs fixed rates");
    const ComplexMatrix o = dense_matrix(t.op);
    const ComplexMatrix o2 = o * o;
    const double c = f->gamma * t.strength * t.strength;
    liou += c * (kron(o.transpose(), o) - 0.5 * kron(id, o2) - 0.5 * kron(o2.transpose(), id));
  }
  ComplexVector vec0 = Eigen::Map<const ComplexVector>(rho0.data(), d * d);
  return [liou, vec0, d](double t) {
    const ComplexMatrix prop = (liou * t).exp();
    const ComplexVector v = prop * vec0;
    return ComplexMatrix(Eigen::Map<const ComplexMatrix>(v.data(), d, d));
  };
}

DensityCheck mean_density_check(const EnsembleStats& stats, const DensityReference& reference) {
  if (stats.mean_density.empty()) {
    throw Error(ErrorKind::invalid_argument, "ensemble did not retain densities (dims > 4 or states not recorded)");
  }
  DensityCheck c;
  const std::size_t n = stats.density_samples.size();
  for (std::size_t i = 0; i < stats.mean_density.size(); ++i) {
    const ComplexMatrix ref = reference(stats.times[i]);
    const ComplexMatrix& mean = stats.mean_density[i];
    for (Index r = 0; r < mean.rows(); ++r) {
      for (Index col = 0; col < mean.cols(); ++col) {
        const double dev = std::abs(mean(r, col) - ref(r, col));
        c.max_deviation = std::max(c.max_deviation, dev);
        if (n > 1) {
          double ss = 0.0;
          for (const auto& traj : stats.density_samples) ss += std::norm(traj[i](r, col) - mean(r, col));
          const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
          // Samples where every trajectory agrees to rounding carry no statistical information.
          if (se > 1e-12) c.max_z = std::max(c.max_z, dev / se);
          else if (dev > 1e-12) c.max_z = std::max(c.max_z, std::numeric_limits<double>::infinity());
        }
      }
    }
  }
  return c;
}

namespace {

double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  double my = 0.0;
  for (double v : y) my += std::log(v);
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (std::log(y[i]) - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  return -sxy / sxx;
}

}  // namespace

DecayFit fit_coherence_decay(const EnsembleStats& stats, Index row, Index col, double floor_fraction) {
  if (stats.mean_density.size() < 3) {
    throw Error(ErrorKind::invalid_argument, "coherence fit needs at least three density samples");
  }
  const double initial = std::abs(stats.mean_density.front()(row, col));
  if (initial == 0.0) throw Error(ErrorKind::invalid_argument, "initial coherence is zero");
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < stats.mean_density.size(); ++i) {
    if (std::abs(stats.mean_density[i](row, col)) < floor_fraction * initial) break;
    window.push_back(i);
  }
  if (window.size() < 3) throw Error(ErrorKind::numerical, "coherence decays below the floor too fast to fit");

  std::vector<double> t, y;
  for (std::size_t i : window) {
    t.push_back(stats.times[i]);
    y.push_back(std::abs(stats.mean_density[i](row, col)));
  }
  DecayFit fit;
  fit.rate = fit_log_slope(t, y);
  fit.n_points = window.size();

  const std::size_t n = stats.density_samples.size();
  if (n > 1) {
    std::vector<Complex> sums;
    for (std::size_t i : window) sums.push_back(stats.mean_density[i](row, col) * static_cast<double>(n));
    std::vector<double> loo(n);
    std::vector<double> yj(window.size());
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t w = 0; w < window.size(); ++w) {
        yj[w] = std::abs((sums[w] - stats.density_samples[j][window[w]](row, col)) / static_cast<double>(n - 1));
      }
      loo[j] = fit_log_slope(t, yj);
    }
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    fit.std_error = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return fit;
}

NoSignalingResult no_signaling_test(const BipartiteScenario& scenario, bool collapse_on_a,
                                    std::size_t n_traj, std::uint64_t seed, SignalingProbe probe,
                                    const EnsembleOptions& opts) {
  const auto& part = scenario.partition;
  if (part.dim() != scenario.initial.dim() || scenario.observable_a.dim() != part.dim_a) {
    throw Error(ErrorKind::dimension_mismatch, "bipartite scenario does not match its partition");
  }
  if (part.dim() > kMaxDensityDim * kMaxDensityDim) {
    throw Error(ErrorKind::dimension_mismatch, "no-signaling test supports dims up to 16");
  }
  const ComplexMatrix lifted = kron(scenario.observable_a.matrix(), ComplexMatrix::Identity(part.dim_b, part.dim_b));
  const bool diagonal = lifted.isDiagonal(0.0);
  Observable op = diagonal ? Observable{DiagonalOperator(lifted.diagonal().real())}
                           : Observable{HermitianOperator::from_matrix(lifted)};

  Schedule schedule = scenario.schedule;
  schedule.record_every = schedule.n_steps;
  schedule.record_states = true;

  // Per-trajectory final reduced state of B, in trajectory order.
  auto run = [&](bool with_collapse, SignalingProbe p) {
    DenseScenario ds{scenario.initial, HermitianOperator::zero(part.dim()), {}, std::nullopt, false, {}, {}};
    if (with_collapse) ds.terms.push_back({op, scenario.strength, FixedRate{scenario.gamma}});
    if (p == SignalingProbe::negative_control) {
      const double spread = spectral_spread(op);
      const double bias = std::abs(scenario.strength) * spread * std::sqrt(scenario.gamma) * schedule.dt;
      ds.transform_increment = [bias](Complex dxi) { return dxi + bias; };
    }
    const TrajectoryFn fn = [&](std::uint64_t index) {
      const TrajectoryRecord rec = run_trajectory(ds, seed, schedule, index);
      TrajectorySummary s;
      s.index = index;
      s.times = rec.times;
      const StateVector& last = rec.states.back();
      const ComplexMatrix rho_b = reduced_density(last, part, Side::b);
      for (Index r = 0; r < rho_b.rows(); ++r) {
        for (Index c = 0; c < rho_b.cols(); ++c) {
          const std::string key = std::to_string(r) + "_" + std::to_string(c);
          s.series["re_" + key] = {rho_b(r, c).real()};
          s.series["im_" + key] = {rho_b(r, c).imag()};
        }
      }
      return s;
    };
    EnsembleOptions o = opts;
    o.keep_samples = true;
    return run_ensemble(fn, n_traj, o);
  };

  const EnsembleStats test = run(collapse_on_a, probe);
  const EnsembleStats ref = run(false, SignalingProbe::genuine);

  const Index db = part.dim_b;
  auto mean_matrix = [db](const EnsembleStats& st, std::size_t drop, std::size_t n) {
    ComplexMatrix m(db, db);
    for (Index r = 0; r < db; ++r) {
      for (Index c = 0; c < db; ++c) {
        const std::string key = std::to_string(r) + "_" + std::to_string(c);
        const auto& re = st.samples.at("re_" + key);
        const auto& im = st.samples.at("im_" + key);
        Complex sum = Complex(st.mean_series.at("re_" + key).mean.back(), st.mean_series.at("im_" + key).mean.back()) *
                      static_cast<double>(n);
        if (drop < n) {
          sum -= Complex(re[drop].back(), im[drop].back());
          sum /= static_cast<double>(n - 1);
        } else {
          sum /= static_cast<double>(n);
        }
        m(r, c) = sum;
      }
    }
    return m;
  };

  const std::size_t n = test.n_traj - test.failed;
  NoSignalingResult res;
  res.rho_b_test = mean_matrix(test, n, n);
  res.rho_b_reference = mean_matrix(ref, ref.n_traj - ref.failed, ref.n_traj - ref.failed);
  res.trace_distance = trace_distance(res.rho_b_test, res.rho_b_reference);
  if (n > 1) {
    std::vector<double> loo(n);
    for (std::size_t j = 0; j < n; ++j) loo[j] = trace_distance(mean_matrix(test, j, n), res.rho_b_reference);
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    res.std_error = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  }
  res.pass = res.trace_distance <= 5.0 * res.std_error + 1e-12;
  return res;
}

}  // namespace collapse
