#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "collapse/cli.hpp"

namespace collapse::cli {

Fields::Fields(const Json& obj, std::string path) : obj_(&obj), path_(std::move(path)) {
  if (!obj.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
}

const Json& Fields::raw(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required field", path_of(key));
  used_.insert(key);
  return obj_->at(key);
}

Fields Fields::object(const std::string& key) { return Fields(raw(key), path_of(key)); }

void Fields::finish() const {
  for (const auto& [key, value] : obj_->items()) {
    if (!used_.contains(key)) throw ConfigError("unknown field", path_of(key));
  }
}

namespace {

template <class T>
T convert(const Json& v, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError("expected a boolean", path);
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError("expected a string", path);
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError("expected a number", path);
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("expected a finite number", path);
    return x;
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError("expected an integer", path);
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
      if (v.get<std::int64_t>() < 0) throw ConfigError("expected a nonnegative integer", path);
    }
    return static_cast<T>(v.get<std::int64_t>());
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    if (!v.is_array()) throw ConfigError("expected an array of numbers", path);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert<double>(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  } else {
    static_assert(sizeof(T) == 0, "unsupported field type");
  }
}

}  // namespace

template <class T>
T Fields::required(const std::string& key) {
  return convert<T>(raw(key), path_of(key));
}

template bool Fields::required<bool>(const std::string&);
template std::string Fields::required<std::string>(const std::string&);
template double Fields::required<double>(const std::string&);
template int Fields::required<int>(const std::string&);
template std::size_t Fields::required<std::size_t>(const std::string&);
template std::vector<double> Fields::required<std::vector<double>>(const std::string&);

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "<file>");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "<file>");
  }
}

void check_version(Fields& root) {
  if (!root.has("version")) throw ConfigError("config has no schema version", "version");
  const int v = root.required<int>("version");
  if (v != kSchemaVersion) {
    throw ConfigError("unsupported schema version " + std::to_string(v) + " (expected " +
                          std::to_string(kSchemaVersion) + ")",
                      "version");
  }
}

double parse_quantity(const std::string& text, Quantity q, const std::string& path) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number with an optional unit, got '" + text + "'", path);
  }
  std::string unit = text.substr(used);
  while (!unit.empty() && unit.front() == ' ') unit.erase(unit.begin());
  double scale = 0.0;
  if (unit.empty()) {
    scale = 1.0;
  } else {
    switch (q) {
      case Quantity::energy:
        if (unit == "eV") scale = si::eV;
        else if (unit == "keV") scale = 1e3 * si::eV;
        else if (unit == "MeV") scale = 1e6 * si::eV;
        else if (unit == "J") scale = 1.0;
        break;
      case Quantity::length:
        if (unit == "m") scale = 1.0;
        else if (unit == "nm") scale = 1e-9;
        else if (unit == "pm") scale = 1e-12;
        break;
      case Quantity::speed:
        if (unit == "m/s") scale = 1.0;
        break;
      case Quantity::time:
        if (unit == "s") scale = 1.0;
        else if (unit == "fs") scale = 1e-15;
        else if (unit == "as") scale = 1e-18;
        break;
    }
  }
  if (scale == 0.0) throw ConfigError("unknown unit '" + unit + "'", path);
  const double x = value * scale;
  if (!std::isfinite(x)) throw ConfigError("value is not finite", path);
  return x;
}

double parse_quantity(const Json& value, Quantity q, const std::string& path) {
  if (value.is_number()) return convert<double>(value, path);
  if (value.is_string()) return parse_quantity(value.get<std::string>(), q, path);
  throw ConfigError("expected a number or a string with a unit", path);
}

namespace {

std::vector<double> number_or_list(const Json& v, const std::string& path) {
  if (v.is_number()) return {convert<double>(v, path)};
  return convert<std::vector<double>>(v, path);
}

std::map<std::string, double> probability_map(const Json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError("expected an object of label -> probability", path);
  std::map<std::string, double> out;
  for (const auto& [label, p] : v.items()) out[label] = convert<double>(p, path + "." + label);
  return out;
}

Packet parse_packet(Fields f) {
  Packet p;
  p.center = f.required<double>("center");
  p.width = f.required<double>("width");
  p.wavenumber = f.optional<double>("wavenumber", 0.0);
  f.finish();
  return p;
}

ProductPackets parse_pair(Fields f) {
  ProductPackets pp{parse_packet(f.object("j")), parse_packet(f.object("k"))};
  f.finish();
  return pp;
}

// Entry of a complex matrix: a number or [re, im].
Complex parse_complex(const Json& v, const std::string& path) {
  if (v.is_number()) return {convert<double>(v, path), 0.0};
  if (v.is_array() && v.size() == 2) return {convert<double>(v[0], path + "[0]"), convert<double>(v[1], path + "[1]")};
  throw ConfigError("expected a number or [re, im]", path);
}

ComplexMatrix parse_matrix(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError("expected a square matrix (array of rows)", path);
  const auto n = static_cast<Index>(v.size());
  ComplexMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const Json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) throw ConfigError("matrix is not square", row_path);
    for (Index j = 0; j < n; ++j) {
      m(i, j) = parse_complex(row[static_cast<std::size_t>(j)], row_path + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

// {"diagonal": [...]} or a full matrix.
Observable parse_observable(const Json& v, const std::string& path) {
  if (v.is_object()) {
    Fields f(v, path);
    const auto d = f.required<std::vector<double>>("diagonal");
    f.finish();
    return DiagonalOperator(Eigen::Map<const RealVector>(d.data(), static_cast<Index>(d.size())));
  }
  try {
    return HermitianOperator::from_matrix(parse_matrix(v, path));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), path);
  }
}

Schedule parse_schedule(Fields f, Schedule s) {
  s.dt = f.optional<double>("dt", s.dt);
  s.n_steps = f.optional<std::size_t>("n_steps", s.n_steps);
  s.record_every = f.optional<std::size_t>("record_every", s.record_every);
  f.finish();
  if (!(s.dt > 0.0)) throw ConfigError("dt must be positive", f.path_of("dt"));
  if (s.n_steps == 0) throw ConfigError("n_steps must be >= 1", f.path_of("n_steps"));
  if (s.record_every == 0) throw ConfigError("record_every must be >= 1", f.path_of("record_every"));
  return s;
}

}  // namespace

BornTestConfig parse_born_test(const Json& root) {
  Fields f(root, "");
  check_version(f);
  BornTestConfig c;
  if (f.has("beta2")) c.beta2 = number_or_list(f.raw("beta2"), "beta2");
  c.a = f.optional("a", c.a);
  c.b = f.optional("b", c.b);
  c.k = f.optional("k", c.k);
  c.gamma = f.optional("gamma", c.gamma);
  c.n_traj = f.optional("n_traj", c.n_traj);
  c.seed = f.optional<std::size_t>("seed", c.seed);
  c.dt = f.optional("dt", c.dt);
  c.step_budget = f.optional("step_budget", c.step_budget);
  c.threshold = f.optional("threshold", c.threshold);
  c.significance = f.optional("significance", c.significance);
  c.output = f.optional("output", c.output);
  f.finish();
  return c;
}

InteractionScenario parse_scenario(Fields f) {
  InteractionScenario s;
  s.m_j = f.required<double>("m_j");
  s.m_k = f.required<double>("m_k");
  s.c2 = f.optional("c2", 0.0);
  s.hbar = f.optional("hbar", 1.0);

  Fields g = f.object("grid");
  s.grid.n_points = g.required<int>("n_points");
  s.grid.spacing = g.optional("spacing", 1.0);
  const std::string boundary = g.optional<std::string>("boundary", "periodic");
  if (boundary == "periodic") s.grid.boundary = Boundary::periodic;
  else if (boundary == "hard-wall") s.grid.boundary = Boundary::hard_wall;
  else throw ConfigError("boundary must be 'periodic' or 'hard-wall'", g.path_of("boundary"));
  g.finish();

  if (f.has("potential")) {
    Fields p = f.object("potential");
    const std::string shape = p.required<std::string>("shape");
    if (shape == "none") {
      s.potential = NoPotential{};
    } else if (shape == "softened-coulomb") {
      s.potential = SoftenedCoulomb{p.required<double>("charge_product"), p.optional("softening", 0.0)};
    } else if (shape == "gaussian-well") {
      s.potential = GaussianWell{p.required<double>("depth"), p.required<double>("width")};
    } else {
      throw ConfigError("shape must be 'none', 'softened-coulomb' or 'gaussian-well'", p.path_of("shape"));
    }
    p.finish();
  }

  Fields init = f.object("initial");
  const std::string type = init.required<std::string>("type");
  if (type == "packets") {
    s.initial = ProductPackets{parse_packet(init.object("j")), parse_packet(init.object("k"))};
  } else if (type == "branches") {
    BranchSuperposition b;
    b.w1 = init.required<double>("w1");
    b.w2 = init.optional("w2", 1.0 - b.w1);
    b.branch1 = parse_pair(init.object("branch1"));
    b.branch2 = parse_pair(init.object("branch2"));
    s.initial = b;
  } else if (type == "momentum-eigenstate") {
    s.initial = MomentumEigenstate{init.required<int>("total_index"), init.optional("separation", 0.0),
                                   init.required<double>("width")};
  } else {
    throw ConfigError("type must be 'packets', 'branches' or 'momentum-eigenstate'", init.path_of("type"));
  }
  init.finish();
  f.finish();
  try {
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), e.path().empty() ? "scenario" : "scenario." + e.path());
  }
  return s;
}

InteractionConfig parse_interaction(const Json& root) {
  Fields f(root, "");
  check_version(f);
  InteractionConfig c;
  c.scenario = parse_scenario(f.object("scenario"));
  if (f.has("schedule")) c.schedule = parse_schedule(f.object("schedule"), c.schedule);
  if (f.has("ensemble")) {
    Fields e = f.object("ensemble");
    c.n_traj = e.optional("n_traj", c.n_traj);
    c.seed = e.optional<std::size_t>("seed", c.seed);
    c.complex_noise = e.optional("complex_noise", false);
    e.finish();
    if (c.n_traj == 0) throw ConfigError("n_traj must be >= 1", "ensemble.n_traj");
  }
  if (f.has("completion")) {
    Fields cf = f.object("completion");
    c.branch_radius = cf.required<double>("radius");
    c.threshold = cf.optional("threshold", c.threshold);
    cf.finish();
    if (!(*c.branch_radius > 0.0)) throw ConfigError("radius must be positive", "completion.radius");
    if (!(c.threshold > 0.5 && c.threshold <= 1.0)) throw ConfigError("threshold must lie in (0.5, 1]", "completion.threshold");
  }
  c.schrodinger_only = f.optional("schrodinger_only", false);
  if (f.has("expected_outcomes")) c.expected_outcomes = probability_map(f.raw("expected_outcomes"), "expected_outcomes");
  if (f.has("gamma_integral_range")) {
    const auto r = f.required<std::vector<double>>("gamma_integral_range");
    if (r.size() != 2 || !(r[0] <= r[1])) throw ConfigError("expected [low, high]", "gamma_integral_range");
    c.gamma_integral_range = std::make_pair(r[0], r[1]);
  }
  c.output = f.optional("output", c.output);
  f.finish();
  return c;
}

void apply_pair_preset(LorentzConfig& c, const std::string& name, const std::string& path) {
  if (name == "electron-electron") {
    c.m_j = c.m_k = si::m_e;
  } else {
    throw ConfigError("unknown pair preset '" + name + "'", path);
  }
}

LorentzConfig parse_lorentz(const Json& root) {
  Fields f(root, "");
  check_version(f);
  LorentzConfig c;
  if (f.has("pair")) {
    const Json& pair = f.raw("pair");
    if (pair.is_string()) {
      apply_pair_preset(c, pair.get<std::string>(), "pair");
    } else {
      Fields p(pair, "pair");
      c.m_j = p.required<double>("m_j");
      c.m_k = p.required<double>("m_k");
      p.finish();
      if (!(c.m_j > 0.0)) throw ConfigError("mass must be positive", "pair.m_j");
      if (!(c.m_k > 0.0)) throw ConfigError("mass must be positive", "pair.m_k");
    }
  }
  if (f.has("V")) c.V = parse_quantity(f.raw("V"), Quantity::energy, "V");
  if (f.has("separation")) c.separation = parse_quantity(f.raw("separation"), Quantity::length, "separation");
  if (f.has("v_max")) c.v_max = parse_quantity(f.raw("v_max"), Quantity::speed, "v_max");
  c.boosts = f.optional("boosts", c.boosts);
  c.n_paths = f.optional("n_paths", c.n_paths);
  c.seed = f.optional<std::size_t>("seed", c.seed);
  c.gamma_series = f.optional("gamma_series", c.gamma_series);
  c.output = f.optional("output", c.output);
  f.finish();
  for (std::size_t i = 0; i < c.boosts.size(); ++i) {
    if (!(std::abs(c.boosts[i]) < 1.0)) throw ConfigError("boost must satisfy |u| < 1", "boosts[" + std::to_string(i) + "]");
  }
  return c;
}

EnsembleConfig parse_ensemble(const Json& root) {
  Fields f(root, "");
  check_version(f);
  const auto init = f.raw("initial");
  if (!init.is_array() || init.size() < 2) throw ConfigError("expected at least two amplitudes", "initial");
  ComplexVector amps(static_cast<Index>(init.size()));
  for (std::size_t i = 0; i < init.size(); ++i) {
    amps[static_cast<Index>(i)] = parse_complex(init[i], "initial[" + std::to_string(i) + "]");
  }
  const Index d = amps.size();
  const StateVector initial = [&] {
    try {
      return StateVector::normalized(amps);
    } catch (const Error& e) {
      throw ConfigError(e.what(), "initial");
    }
  }();
  EnsembleConfig c{DenseScenario{initial, HermitianOperator::zero(d), {}, std::nullopt, false, {}, {}}};
  if (f.has("hamiltonian")) {
    const Observable h = parse_observable(f.raw("hamiltonian"), "hamiltonian");
    if (dim(h) != d) throw ConfigError("Hamiltonian dimension does not match the initial state", "hamiltonian");
    c.scenario.hamiltonian = std::holds_alternative<HermitianOperator>(h) ? std::get<HermitianOperator>(h)
                                                                         : std::get<DiagonalOperator>(h).to_dense();
  }
  const Json& terms = f.raw("terms");
  if (!terms.is_array()) throw ConfigError("expected an array of collapse terms", "terms");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string path = "terms[" + std::to_string(i) + "]";
    Fields t(terms[i], path);
    CollapseTerm term{parse_observable(t.raw("operator"), t.path_of("operator")), t.optional("strength", 1.0),
                      FixedRate{t.required<double>("gamma")}};
    t.finish();
    if (dim(term.op) != d) throw ConfigError("operator dimension does not match the initial state", path + ".operator");
    try {
      term.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what(), path);
    }
    c.scenario.terms.push_back(std::move(term));
  }
  if (f.has("completion")) {
    Fields cf = f.object("completion");
    Completion comp;
    comp.threshold = cf.optional("threshold", comp.threshold);
    Fields branches = cf.object("branches");
    for (const auto& [label, value] : cf.raw("branches").items()) {
      const auto diag = branches.required<std::vector<double>>(label);
      if (static_cast<Index>(diag.size()) != d) throw ConfigError("projector dimension mismatch", branches.path_of(label));
      comp.branches.emplace_back(label, DiagonalOperator(Eigen::Map<const RealVector>(diag.data(), d)));
    }
    branches.finish();
    cf.finish();
    c.scenario.completion = std::move(comp);
  }
  if (f.has("schedule")) c.schedule = parse_schedule(f.object("schedule"), c.schedule);
  c.scenario.complex_noise = f.optional("complex_noise", false);
  c.n_traj = f.optional("n_traj", c.n_traj);
  c.seed = f.optional<std::size_t>("seed", c.seed);
  if (f.has("expected_outcomes")) c.expected_outcomes = probability_map(f.raw("expected_outcomes"), "expected_outcomes");
  c.output = f.optional("output", c.output);
  f.finish();
  if (c.n_traj == 0) throw ConfigError("n_traj must be >= 1", "n_traj");
  return c;
}

NoiseAuditConfig parse_noise_audit(const Json& root) {
  Fields f(root, "");
  check_version(f);
  NoiseAuditConfig c;
  c.seed = f.optional<std::size_t>("seed", c.seed);
  c.dt = f.optional("dt", c.dt);
  c.n_paths = f.optional("n_paths", c.n_paths);
  c.n_steps = f.optional("n_steps", c.n_steps);
  c.complex_noise = f.optional("complex_noise", c.complex_noise);
  c.suppression_dts = f.optional("suppression_dts", c.suppression_dts);
  c.n_pairs = f.optional("n_pairs", c.n_pairs);
  c.output = f.optional("output", c.output);
  f.finish();
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive", "dt");
  return c;
}

}  // namespace collapse::cli
