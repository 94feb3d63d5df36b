#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "collapse/ensemble.hpp"
#include "collapse/interaction.hpp"
#include "collapse/lorentz.hpp"

namespace collapse::cli {

using Json = nlohmann::json;

/// Thrown for anything wrong with user input; maps to exit code 2.
struct ConfigError : Error {
  ConfigError(const std::string& message, const std::string& path) : Error(ErrorKind::config, message, path) {}
};

/// Typed access to one JSON object. Every key must be consumed before finish(),
/// so unknown keys surface as errors with their full path.
class Fields {
 public:
  Fields(const Json& obj, std::string path);

  bool has(const std::string& key) const { return obj_->contains(key); }
  std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T required(const std::string& key);
  template <class T>
  T optional(const std::string& key, T fallback) {
    return has(key) ? required<T>(key) : fallback;
  }
  const Json& raw(const std::string& key);
  Fields object(const std::string& key);
  void finish() const;

 private:
  const Json* obj_;
  std::string path_;
  std::set<std::string> used_;
};

/// Reads and parses a config file and checks its schema version.
Json load_config(const std::string& path);
void check_version(Fields& root);

enum class Quantity { energy, length, speed, time };

/// A number, or a string with a unit suffix: energy eV/keV/MeV/J (to joules),
/// length m/nm/pm (to metres), speed m/s (to m/s), time s/fs/as (to seconds).
double parse_quantity(const Json& value, Quantity q, const std::string& path);
double parse_quantity(const std::string& text, Quantity q, const std::string& path);

struct BornTestConfig {
  std::vector<double> beta2{0.3};
  double a = 1.0, b = -1.0, k = 1.0, gamma = 1.0;
  std::size_t n_traj = 10000;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t step_budget = 0;
  double threshold = 1.0 - 1e-6;
  double significance = 1e-3;
  std::string output = "born_test.json";
};
BornTestConfig parse_born_test(const Json& root);

struct InteractionConfig {
  InteractionScenario scenario;
  Schedule schedule{0.01, 1000, 10, false};
  std::size_t n_traj = 1;
  std::uint64_t seed = 0;
  std::optional<double> branch_radius;
  double threshold = 1.0 - 1e-6;
  bool schrodinger_only = false;
  bool complex_noise = false;
  std::map<std::string, double> expected_outcomes;
  std::optional<std::pair<double, double>> gamma_integral_range;
  std::string output = "interaction";
};
InteractionConfig parse_interaction(const Json& root);
InteractionScenario parse_scenario(Fields f);

struct LorentzConfig {
  double m_j = si::m_e, m_k = si::m_e;
  double V = 27.2 * si::eV;
  double separation = 1e-10;
  double v_max = 1e6;
  std::vector<double> boosts{0.1, 0.5, 0.9, 0.99};
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  std::string gamma_series;
  std::string output = "lorentz_check";
};
LorentzConfig parse_lorentz(const Json& root);
/// Named pair presets; "electron-electron" is the only one.
void apply_pair_preset(LorentzConfig& c, const std::string& name, const std::string& path);

struct EnsembleConfig {
  DenseScenario scenario;
  Schedule schedule{1e-3, 1000, 10, false};
  std::size_t n_traj = 1000;
  std::uint64_t seed = 0;
  std::map<std::string, double> expected_outcomes;
  std::string output = "ensemble";
};
EnsembleConfig parse_ensemble(const Json& root);

struct NoiseAuditConfig {
  std::uint64_t seed = 0;
  double dt = 1e-3;
  std::size_t n_paths = 100;
  std::size_t n_steps = 100000;
  bool complex_noise = false;
  std::vector<double> suppression_dts{1e-2, 1e-3, 1e-4};
  std::size_t n_pairs = 100;
  std::string output = "noise_audit.json";
};
NoiseAuditConfig parse_noise_audit(const Json& root);

}  // namespace collapse::cli
