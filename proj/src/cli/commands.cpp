#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "collapse/cli.hpp"
#include "collapse/interaction.hpp"
#include "collapse/lorentz.hpp"
#include "collapse/noise.hpp"
#include "collapse/two_level.hpp"
#include "config.hpp"
#include "output.hpp"

namespace collapse::cli {

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out;
};

void add_common(CLI::App* sub, CommonOptions& o, bool config_required) {
  auto* c = sub->add_option("--config", o.config, "JSON config file");
  if (config_required) c->required();
  sub->add_option("--seed", o.seed, "base seed (overrides COLLAPSE_SEED and the config)");
  sub->add_option("--workers", o.workers, "worker threads (default: available parallelism)")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", o.out, "output file or prefix");
}

Json load_or_default(const std::string& path) {
  if (path.empty()) return Json{{"version", kSchemaVersion}};
  return load_config(path);
}

std::uint64_t effective_seed(const CommonOptions& o, std::uint64_t from_config) {
  try {
    return resolve_seed(o.seed, from_config);
  } catch (const Error& e) {
    throw ConfigError(e.what(), "COLLAPSE_SEED");
  }
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------- born-test

struct BornFlags {
  std::vector<double> beta2;
  std::optional<std::size_t> n;
  std::optional<double> dt;
  std::optional<double> threshold;
};

int born_test_command(const CommonOptions& o, const BornFlags& flags) {
  BornTestConfig c = parse_born_test(load_or_default(o.config));
  if (!flags.beta2.empty()) c.beta2 = flags.beta2;
  if (flags.n) c.n_traj = *flags.n;
  if (flags.dt) c.dt = *flags.dt;
  if (flags.threshold) c.threshold = *flags.threshold;
  if (!o.out.empty()) c.output = o.out;
  c.seed = effective_seed(o, c.seed);
  if (c.n_traj == 0) throw ConfigError("n_traj must be >= 1", "n_traj");
  std::vector<TwoLevelSpec> specs;
  for (std::size_t i = 0; i < c.beta2.size(); ++i) {
    try {
      specs.push_back(TwoLevelSpec::from_beta2(c.beta2[i], c.a, c.b, c.k, c.gamma));
      if (!(c.gamma > 0.0) || c.a == c.b) throw Error(ErrorKind::invalid_argument, "need gamma > 0 and a != b");
    } catch (const Error& e) {
      throw ConfigError(e.what(), "beta2[" + std::to_string(i) + "]");
    }
  }
  if (!(c.threshold > 0.5 && c.threshold <= 1.0)) throw ConfigError("threshold must lie in (0.5, 1]", "threshold");

  BornExperimentOptions opts;
  opts.dt = c.dt;
  opts.step_budget = c.step_budget;
  opts.threshold = c.threshold;
  opts.ensemble.workers = o.workers;

  Json results = Json::array();
  std::vector<BornTestResult> tests;
  bool pass = true;
  double dt_used = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const BornExperimentResult r = born_experiment(specs[i], c.n_traj, c.seed + i, opts);
    dt_used = r.dt;
    const double b2 = c.beta2[i];
    const BornTestResult t =
        born_test({{"x", r.count_x}, {"y", r.count_y}}, {{"x", 1.0 - b2}, {"y", b2}}, c.significance);
    tests.push_back(t);
    pass = pass && t.pass && !r.budget_exhausted;
    Json entry = to_json(t);
    entry["beta2"] = b2;
    entry["seed"] = c.seed + i;
    entry["count_x"] = r.count_x;
    entry["count_y"] = r.count_y;
    entry["unresolved"] = r.unresolved;
    entry["step_budget"] = r.step_budget;
    entry["budget_exhausted"] = r.budget_exhausted;
    results.push_back(entry);
    std::printf("beta2 = %.4g: y frequency %.5f (n = %zu, unresolved %zu), z = %+.3f, chi2 p = %.4g  %s\n", b2,
                r.frequency_y(), t.n, r.unresolved, t.z_scores.count("y") ? t.z_scores.at("y") : 0.0, t.p_value,
                verdict(t.pass && !r.budget_exhausted));
  }
  const JointChiSquare joint = joint_chi_square(tests, c.significance);
  pass = pass && joint.pass;
  std::printf("joint chi-square %.4g on %d dof, p = %.4g  %s\n", joint.chi_square, joint.dof, joint.p_value,
              verdict(joint.pass));

  Json doc;
  doc["metadata"] = metadata("born-test", c.seed, dt_used,
                             {{"completion", c.threshold}, {"significance", c.significance}, {"z_limit", 3.0}});
  doc["spec"] = {{"a", c.a}, {"b", c.b}, {"k", c.k}, {"gamma", c.gamma}, {"n_traj", c.n_traj}};
  doc["results"] = results;
  doc["joint"] = {{"chi_square", joint.chi_square}, {"dof", joint.dof}, {"p_value", number(joint.p_value)},
                  {"pass", joint.pass}};
  doc["pass"] = pass;
  write_json(c.output, doc);
  return pass ? kExitOk : kExitAssertion;
}

// ------------------------------------------------------ simulate-interaction

Table ledger_table(const EnsembleStats& st, const Json& meta, const std::string& expectation_column) {
  Table t;
  t.metadata = meta;
  t.columns = {"t", "norm", expectation_column, "gamma", "gamma_integral", "p_total", "h_total"};
  const std::vector<std::string> keys = {"norm", "v", "gamma", "gamma_integral", "p_total", "h_total"};
  for (std::size_t i = 0; i < st.times.size(); ++i) {
    std::vector<double> row{st.times[i]};
    for (const auto& k : keys) {
      const auto it = st.mean_series.find(k);
      row.push_back(it == st.mean_series.end() ? std::nan("") : it->second.mean[i]);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

int interaction_command(const CommonOptions& o, std::optional<std::size_t> n_flag) {
  InteractionConfig c = parse_interaction(load_config(o.config));
  if (n_flag) c.n_traj = *n_flag;
  if (!o.out.empty()) c.output = o.out;
  c.seed = effective_seed(o, c.seed);
  if (c.n_traj == 0) throw ConfigError("n_traj must be >= 1", "ensemble.n_traj");

  const InteractionModel model(c.scenario);
  InteractionRunOptions opts;
  if (c.branch_radius) opts.completion = separation_branches(model, *c.branch_radius, c.threshold);
  opts.schrodinger_only = c.schrodinger_only;
  opts.complex_noise = c.complex_noise;
  EnsembleOptions eo;
  eo.workers = o.workers;
  const bool eigenstate = std::holds_alternative<MomentumEigenstate>(c.scenario.initial);
  eo.keep_samples = eigenstate;
  const MeasurementResult r = simulate_measurement(model, c.n_traj, c.seed, c.schedule, opts, eo);

  bool pass = !r.budget_exhausted;
  Json checks = Json::object();
  if (!c.expected_outcomes.empty()) {
    const BornTestResult t = born_test(r.stats, c.expected_outcomes);
    checks["born"] = to_json(t);
    pass = pass && t.pass;
    std::printf("outcome frequencies vs expected: chi2 p = %.4g  %s\n", t.p_value, verdict(t.pass));
  }
  if (c.gamma_integral_range) {
    const double gi = r.stats.mean_series.at("gamma_integral").mean.back();
    const bool ok = gi >= c.gamma_integral_range->first && gi <= c.gamma_integral_range->second;
    checks["gamma_integral"] = {{"value", gi}, {"low", c.gamma_integral_range->first},
                                {"high", c.gamma_integral_range->second}, {"pass", ok}};
    pass = pass && ok;
    std::printf("final gamma integral %.6g in [%g, %g]  %s\n", gi, c.gamma_integral_range->first,
                c.gamma_integral_range->second, verdict(ok));
  }
  if (eigenstate) {
    double worst = 0.0;
    for (const auto& traj : r.stats.samples.at("p_variance")) {
      for (double v : traj) worst = std::max(worst, v);
    }
    const bool ok = worst <= 1e-10;
    checks["momentum_eigenstate"] = {{"max_p_variance", worst}, {"limit", 1e-10}, {"pass", ok}};
    pass = pass && ok;
    std::printf("max P_total variance over all trajectories %.3g  %s\n", worst, verdict(ok));
  }

  const Json meta = metadata("simulate-interaction", c.seed, c.schedule.dt,
                             {{"completion", r.completion_threshold}, {"onset", r.onset_threshold}});
  write_csv(c.output + "_ledger.csv", ledger_table(r.stats, meta, "v"));
  Json doc;
  doc["metadata"] = meta;
  doc["c2"] = r.c2;
  doc["stats"] = to_json(r.stats);
  doc["onset_weights"] = r.onset_weights;
  doc["budget_exhausted"] = r.budget_exhausted;
  doc["checks"] = checks;
  doc["pass"] = pass;
  write_json(c.output + ".json", doc);
  std::printf("%zu trajectories, outcomes:", r.stats.n_traj);
  for (const auto& [label, n] : r.stats.outcome_counts) std::printf(" %s=%zu", label.c_str(), n);
  std::printf(" unresolved=%zu\n", r.stats.unresolved);
  return pass ? kExitOk : kExitAssertion;
}

// ------------------------------------------------------------ lorentz-check

struct LorentzFlags {
  std::string pair, V, separation, v_max, gamma_series;
  std::vector<double> boosts;
  std::optional<std::size_t> n_paths;
};

std::vector<std::pair<double, double>> gamma_series(const std::string& path) {
  std::vector<std::pair<double, double>> out;
  if (path.empty()) {
    const InteractionModel model(reference_scattering_scenario());
    InteractionRunOptions opts;
    opts.schrodinger_only = true;
    const auto rec = run_interaction_trajectory(model, reference_scattering_schedule(), NoiseConfig{}, opts);
    for (std::size_t i = 0; i < rec.times.size(); ++i) out.emplace_back(rec.times[i], rec.series.at("gamma")[i]);
    return out;
  }
  Table t;
  try {
    t = read_csv(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), "gamma_series");
  }
  std::size_t it = t.columns.size(), ig = t.columns.size();
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (t.columns[i] == "t") it = i;
    if (t.columns[i] == "gamma") ig = i;
  }
  if (it == t.columns.size() || ig == t.columns.size()) throw ConfigError("series needs t and gamma columns", "gamma_series");
  for (const auto& row : t.rows) out.emplace_back(row[it], row[ig]);
  return out;
}

int lorentz_command(const CommonOptions& o, const LorentzFlags& flags) {
  LorentzConfig c = parse_lorentz(load_or_default(o.config));
  if (!flags.pair.empty()) apply_pair_preset(c, flags.pair, "--pair");
  if (!flags.V.empty()) c.V = parse_quantity(flags.V, Quantity::energy, "--V");
  if (!flags.separation.empty()) c.separation = parse_quantity(flags.separation, Quantity::length, "--separation");
  if (!flags.v_max.empty()) c.v_max = parse_quantity(flags.v_max, Quantity::speed, "--vmax");
  if (!flags.boosts.empty()) c.boosts = flags.boosts;
  if (flags.n_paths) c.n_paths = *flags.n_paths;
  if (!flags.gamma_series.empty()) c.gamma_series = flags.gamma_series;
  if (!o.out.empty()) c.output = o.out;
  c.seed = effective_seed(o, c.seed);
  for (double u : c.boosts) {
    if (!(std::abs(u) < 1.0)) throw ConfigError("boost must satisfy |u| < 1", "boosts");
  }
  if (!(c.v_max > 0.0 && c.v_max < si::c)) throw ConfigError("v_max must lie in (0, c)", "v_max");
  if (!(c.V > 0.0)) throw ConfigError("V must be positive", "V");
  if (!(c.separation > 0.0)) throw ConfigError("separation must be positive", "separation");
  const auto series = gamma_series(c.gamma_series);

  std::vector<std::vector<std::string>> rows;
  bool pass = true;
  auto row = [&](const std::string& name, double value, double reference, const std::string& criterion, bool ok) {
    rows.push_back({name, format_number(value), format_number(reference), criterion, ok ? "pass" : "fail"});
    pass = pass && ok;
    std::printf("%-34s %-14s ref %-10s %-20s %s\n", name.c_str(), short_number(value).c_str(),
                short_number(reference).c_str(), criterion.c_str(), verdict(ok));
  };

  const ScaleEstimates e = scale_estimates(c.separation, c.V, c.m_j, c.m_k, c.v_max);
  row("dt_int_s", e.dt_int, ReferenceEstimates::dt_int, "within 10%",
      std::abs(e.dt_int / ReferenceEstimates::dt_int - 1.0) <= 0.1);
  row("temporal_discrepancy_s", e.temporal_discrepancy, ReferenceEstimates::temporal_discrepancy, "order of magnitude",
      within_order_of_magnitude(e.temporal_discrepancy, ReferenceEstimates::temporal_discrepancy));
  row("positional_discrepancy_m", e.positional_discrepancy, ReferenceEstimates::positional_discrepancy,
      "order of magnitude",
      within_order_of_magnitude(e.positional_discrepancy, ReferenceEstimates::positional_discrepancy));
  row("fraction", e.fraction, ReferenceEstimates::fraction, "order of magnitude",
      within_order_of_magnitude(e.fraction, ReferenceEstimates::fraction));
  row("nonlinearity", e.nonlinearity, ReferenceEstimates::nonlinearity, "order of magnitude",
      within_order_of_magnitude(e.nonlinearity, ReferenceEstimates::nonlinearity));

  // The pair in its c-o-m frame: v_j = v_max, v_k chosen so the momenta cancel.
  RelativisticPair pair{c.m_j, c.m_k, c.v_max / si::c, 0.0, c.V, si::c};
  const double pj = particle_momentum(pair.m_j, pair.v_j, 1.0).p;
  pair.v_k = -pj / std::sqrt(pair.m_k * pair.m_k + pj * pj);
  std::vector<Boost> boosts;
  for (double u : c.boosts) boosts.push_back({u});
  const RatioInvariance ri = ratio_invariance(pair, boosts);
  for (const auto& r : ri.rows) {
    row("ratio_deviation_u=" + short_number(r.u), r.deviation, 0.0, "<= 1e-12", r.deviation <= 1e-12);
  }
  for (const Boost& b : boosts) {
    const RateIntegralInvariance rr = rate_integral_invariance(series, b, c.n_paths, c.seed);
    row("rate_integral_deviation_u=" + short_number(b.u), rr.deviation, 0.0, "<= 1e-12", rr.deviation <= 1e-12);
    row("mean_square_z_u=" + short_number(b.u), rr.z, 0.0, "|z| <= 5", std::abs(rr.z) <= 5.0);
  }

  const Json meta = metadata("lorentz-check", c.seed, std::nan(""), {{"ratio", 1e-12}, {"z_limit", 5.0}});
  write_text_csv(c.output + ".csv", meta, {"quantity", "value", "reference", "criterion", "result"}, rows);
  Json table = Json::array();
  for (const auto& r : rows) {
    table.push_back({{"quantity", r[0]}, {"value", std::strtod(r[1].c_str(), nullptr)},
                     {"reference", std::strtod(r[2].c_str(), nullptr)}, {"criterion", r[3]}, {"pass", r[4] == "pass"}});
  }
  Json doc{{"metadata", meta}, {"inputs", {{"m_j_kg", c.m_j}, {"m_k_kg", c.m_k}, {"V_J", c.V},
                                          {"separation_m", c.separation}, {"v_max_m_per_s", c.v_max}}},
           {"table", table}, {"pass", pass}};
  write_json(c.output + ".json", doc);
  return pass ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------- ensemble

int ensemble_command(const CommonOptions& o, std::optional<std::size_t> n_flag) {
  EnsembleConfig c = parse_ensemble(load_config(o.config));
  if (n_flag) c.n_traj = *n_flag;
  if (!o.out.empty()) c.output = o.out;
  c.seed = effective_seed(o, c.seed);
  const Index d = c.scenario.initial.dim();
  RealVector pop = RealVector::Zero(d);
  pop[1] = 1.0;
  c.scenario.observables.emplace_back("beta2", DiagonalOperator(pop));
  c.scenario.observables.emplace_back("h_total", c.scenario.hamiltonian);
  c.scenario.observables.emplace_back("norm", DiagonalOperator(RealVector::Ones(d)));
  EnsembleOptions eo;
  eo.workers = o.workers;
  const EnsembleStats st = run_ensemble(c.scenario, c.n_traj, c.seed, c.schedule, eo);

  bool pass = true;
  Json checks = Json::object();
  if (!c.expected_outcomes.empty()) {
    const BornTestResult t = born_test(st, c.expected_outcomes);
    checks["born"] = to_json(t);
    pass = t.pass;
    std::printf("outcome frequencies vs expected: chi2 p = %.4g  %s\n", t.p_value, verdict(t.pass));
  }
  double gamma = 0.0;
  for (const double g : fixed_rates(c.scenario.terms)) gamma += g;
  Table t;
  const Json meta = metadata("ensemble", c.seed, c.schedule.dt,
                             {{"completion", c.scenario.completion ? c.scenario.completion->threshold : 0.0}});
  t.metadata = meta;
  t.columns = {"t", "norm", "beta2", "gamma", "gamma_integral", "p_total", "h_total"};
  for (std::size_t i = 0; i < st.times.size(); ++i) {
    t.rows.push_back({st.times[i], st.mean_series.at("norm").mean[i], st.mean_series.at("beta2").mean[i], gamma,
                      gamma * st.times[i], std::nan(""), st.mean_series.at("h_total").mean[i]});
  }
  write_csv(c.output + ".csv", t);
  write_json(c.output + ".json", {{"metadata", meta}, {"stats", to_json(st)}, {"checks", checks}, {"pass", pass}});
  std::printf("%zu trajectories, outcomes:", st.n_traj);
  for (const auto& [label, n] : st.outcome_counts) std::printf(" %s=%zu", label.c_str(), n);
  std::printf(" unresolved=%zu\n", st.unresolved);
  return pass ? kExitOk : kExitAssertion;
}

// ------------------------------------------------------------- noise-audit

struct NoiseFlags {
  std::optional<double> dt;
  std::optional<std::size_t> paths, steps;
  bool complex_noise = false;
};

int noise_audit_command(const CommonOptions& o, const NoiseFlags& flags) {
  NoiseAuditConfig c = parse_noise_audit(load_or_default(o.config));
  if (flags.dt) c.dt = *flags.dt;
  if (flags.paths) c.n_paths = *flags.paths;
  if (flags.steps) c.n_steps = *flags.steps;
  if (flags.complex_noise) c.complex_noise = true;
  if (!o.out.empty()) c.output = o.out;
  c.seed = effective_seed(o, c.seed);
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive", "dt");
  if (c.n_paths < 2 || c.n_steps == 0) throw ConfigError("need n_paths >= 2 and n_steps >= 1", "n_paths");

  const MeanEstimate ito = ito_variance_audit(c.seed, c.dt, c.n_paths, c.n_steps, c.complex_noise);
  const bool ito_ok = std::abs(ito.z()) <= 5.0;
  std::printf("Ito variance statistic %.6f +- %.6f (z = %+.3f)  %s\n", ito.mean, ito.std_error, ito.z(), verdict(ito_ok));

  const std::size_t sup_steps = std::min<std::size_t>(c.n_steps, 10000);
  const auto ratios = dt_dxi_suppression(c.seed, c.suppression_dts, c.n_paths, sup_steps);
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    monotone = monotone && (c.suppression_dts[i] < c.suppression_dts[i - 1]) == (ratios[i] < ratios[i - 1]);
  }
  std::printf("dt.dxi suppression ratios:");
  for (double r : ratios) std::printf(" %.4g", r);
  std::printf("  %s\n", verdict(monotone));

  const CorrelationEstimate corr = cross_correlation_audit(c.seed, c.dt, c.n_pairs, c.n_steps);
  const double cz = corr.std_error > 0.0 ? corr.mean / corr.std_error : 0.0;
  const bool corr_ok = std::abs(cz) <= 5.0;
  std::printf("cross-correlation %.3g +- %.3g (z = %+.3f)  %s\n", corr.mean, corr.std_error, cz, verdict(corr_ok));

  const bool pass = ito_ok && monotone && corr_ok;
  Json doc;
  doc["metadata"] = metadata("noise-audit", c.seed, c.dt, {{"z_limit", 5.0}});
  doc["ito_variance"] = {{"mean", ito.mean}, {"std_error", ito.std_error}, {"z", ito.z()}, {"n_paths", c.n_paths},
                         {"n_steps", c.n_steps}, {"complex_noise", c.complex_noise}, {"pass", ito_ok}};
  doc["suppression"] = {{"dts", c.suppression_dts}, {"ratios", ratios}, {"n_steps", sup_steps}, {"pass", monotone}};
  doc["cross_correlation"] = {{"mean", corr.mean}, {"std_error", corr.std_error}, {"z", cz}, {"pass", corr_ok}};
  doc["pass"] = pass;
  write_json(c.output, doc);
  return pass ? kExitOk : kExitAssertion;
}

void report_error(const char* kind, const std::string& message, const std::string& path) {
  Json err{{"kind", kind}, {"message", message}};
  if (!path.empty()) err["path"] = path;
  std::cerr << Json{{"error", err}}.dump() << std::endl;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Stochastic collapse simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOptions born_o, inter_o, lor_o, ens_o, noise_o;
  BornFlags born_f;
  LorentzFlags lor_f;
  NoiseFlags noise_f;
  std::optional<std::size_t> inter_n, ens_n;

  auto* born = app.add_subcommand("born-test", "two-level ensembles and a chi-square Born-rule test");
  add_common(born, born_o, false);
  born->add_option("--beta2", born_f.beta2, "initial |y> weight(s)")->delimiter(',');
  born->add_option("--n", born_f.n, "trajectories per beta2");
  born->add_option("--dt", born_f.dt, "time step (default from the collapse rate)");
  born->add_option("--threshold", born_f.threshold, "completion threshold on a branch weight");

  auto* inter = app.add_subcommand("simulate-interaction", "interaction-induced collapse on a two-particle grid");
  add_common(inter, inter_o, true);
  inter->add_option("--n", inter_n, "trajectories");

  auto* lor = app.add_subcommand("lorentz-check", "frame invariance and scale estimates");
  add_common(lor, lor_o, false);
  lor->add_option("--pair", lor_f.pair, "pair preset (electron-electron)");
  lor->add_option("--V", lor_f.V, "maximum interaction energy, e.g. 27.2eV");
  lor->add_option("--separation", lor_f.separation, "interaction distance, e.g. 1e-10m");
  lor->add_option("--vmax", lor_f.v_max, "maximum speed, e.g. 1e6m/s");
  lor->add_option("--boost", lor_f.boosts, "boost speeds as fractions of c")->delimiter(',');
  lor->add_option("--n-paths", lor_f.n_paths, "noise paths per frame for the mean-square check");
  lor->add_option("--gamma-series", lor_f.gamma_series, "CSV with t and gamma columns");

  auto* ens = app.add_subcommand("ensemble", "generic dense-operator ensemble runner");
  add_common(ens, ens_o, true);
  ens->add_option("--n", ens_n, "trajectories");

  auto* noise = app.add_subcommand("noise-audit", "Ito variance and independence checks of the noise");
  add_common(noise, noise_o, false);
  noise->add_option("--dt", noise_f.dt, "time step");
  noise->add_option("--paths", noise_f.paths, "paths");
  noise->add_option("--steps", noise_f.steps, "steps per path");
  noise->add_flag("--complex", noise_f.complex_noise, "complex increments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what(), "");
    return kExitConfig;
  }

  try {
    if (*born) return born_test_command(born_o, born_f);
    if (*inter) return interaction_command(inter_o, inter_n);
    if (*lor) return lorentz_command(lor_o, lor_f);
    if (*ens) return ensemble_command(ens_o, ens_n);
    if (*noise) return noise_audit_command(noise_o, noise_f);
  } catch (const Error& e) {
    const bool config = e.kind() == ErrorKind::config;
    report_error(to_string(e.kind()), e.what(), e.path());
    return config ? kExitConfig : kExitAssertion;
  } catch (const std::exception& e) {
    report_error("internal", e.what(), "");
    return kExitAssertion;
  }
  return kExitConfig;
}

}  // namespace collapse::cli
