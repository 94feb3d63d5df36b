#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "collapse/state.hpp"

namespace collapse {

/// Configuration of the single global white-noise process of one trajectory.
struct NoiseConfig {
  std::uint64_t seed = 0;
  double dt = 1e-3;
  bool complex_noise = false;
  std::uint64_t trajectory_index = 0;

  void validate() const;
};

struct NoisePath {
  std::vector<Complex> increments;
  double dt = 0.0;
};

/// Counter-based Gaussian increments.
///
/// splitmix64 below is the SplitMix64 output finaliser. The stream key is
/// splitmix64(seed ^ splitmix64(trajectory_index + 0x9e3779b97f4a7c15)). Raw word
/// c of a stream is the SplitMix64 finaliser applied to key + (c + 1) * 0x9e3779b97f4a7c15,
/// i.e. the c-th output of a SplitMix64 generator seeded with the key. Step s
/// consumes words 2s and 2s+1, turned into uniforms on (0, 1] from their top 53
/// bits, then into a standard normal pair (z0, z1) by Box-Muller:
///   r = sqrt(-2 ln u0), z0 = r cos(2 pi u1), z1 = r sin(2 pi u1).
/// Real mode: dxi = sqrt(dt) z0. Complex mode: dxi = sqrt(dt / 2) (z0 + i z1).
/// Every increment is a pure function of (seed, trajectory_index, step); bit-exact
/// output is promised for a given build and libm, not across platforms.
class NoiseStream {
 public:
  explicit NoiseStream(const NoiseConfig& cfg);

  Complex increment(std::uint64_t step) const;
  /// Standard normal pair for step `step` (unit variance, before dt scaling).
  std::pair<double, double> normal_pair(std::uint64_t step) const;
  /// Uniform on (0, 1] from raw word `counter`.
  double uniform(std::uint64_t counter) const;
  std::uint64_t word(std::uint64_t counter) const;

  double dt() const noexcept { return dt_; }
  bool complex_noise() const noexcept { return complex_; }

 private:
  std::uint64_t key_;
  double dt_;
  double sqrt_dt_;
  bool complex_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// n_steps increments of the stream described by cfg. Throws if n_steps == 0.
NoisePath sample_path(const NoiseConfig& cfg, std::size_t n_steps);

/// Seed from COLLAPSE_SEED (decimal u64), if set. Throws Error(config) if malformed.
std::optional<std::uint64_t> seed_from_env();

/// Precedence: CLI flag, then COLLAPSE_SEED, then the configured fallback.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli_flag, std::uint64_t fallback);

// Statistical audits of the Ito rules, used by the test suite and `noise-audit`.

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double z() const { return std_error > 0.0 ? (mean - 1.0) / std_error : 0.0; }
};

/// Statistic (sum |dxi|^2) / (n dt) over n_paths independent paths; mean should be 1.
MeanEstimate ito_variance_audit(std::uint64_t seed, double dt, std::size_t n_paths,
                                std::size_t n_steps, bool complex_noise);

/// For each dt: mean over paths of |sum dt dxi| / (sum |dxi|^2), the dt.dxi suppression ratio.
std::vector<double> dt_dxi_suppression(std::uint64_t seed, std::span<const double> dts,
                                       std::size_t n_paths, std::size_t n_steps);

struct CorrelationEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Normalised cross-correlation sum dxi_a dxi_b / (n dt) between paths with
/// trajectory indices 2i and 2i+1 for i < n_pairs; mean should be 0.
CorrelationEstimate cross_correlation_audit(std::uint64_t seed, double dt, std::size_t n_pairs,
                                            std::size_t n_steps);

}  // namespace collapse
