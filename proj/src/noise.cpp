#include "collapse/noise.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace collapse {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

MeanEstimate mean_and_error(const std::vector<double>& xs) {
  MeanEstimate est;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) est.mean += x;
  est.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - est.mean) * (x - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void NoiseConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::invalid_argument, "noise dt must be positive and finite", "dt");
  }
}

NoiseStream::NoiseStream(const NoiseConfig& cfg)
    : key_(splitmix64(cfg.seed ^ splitmix64(cfg.trajectory_index + kGolden))),
      dt_(cfg.dt),
      sqrt_dt_(std::sqrt(cfg.dt)),
      complex_(cfg.complex_noise) {
  cfg.validate();
}

std::uint64_t NoiseStream::word(std::uint64_t counter) const {
  return splitmix64(key_ + (counter + 1) * kGolden);
}

double NoiseStream::uniform(std::uint64_t counter) const {
  // (k + 1) / 2^53 with k the top 53 bits: never 0, so log() is finite.
  return static_cast<double>((word(counter) >> 11) + 1) * 0x1.0p-53;
}

std::pair<double, double> NoiseStream::normal_pair(std::uint64_t step) const {
  const double u0 = uniform(2 * step);
  const double u1 = uniform(2 * step + 1);
  const double r = std::sqrt(-2.0 * std::log(u0));
  const double angle = 2.0 * std::numbers::pi * u1;
  return {r * std::cos(angle), r * std::sin(angle)};
}

Complex NoiseStream::increment(std::uint64_t step) const {
  const auto [z0, z1] = normal_pair(step);
  if (complex_) {
    return sqrt_dt_ * std::numbers::sqrt2 * 0.5 * Complex(z0, z1);
  }
  return {sqrt_dt_ * z0, 0.0};
}

NoisePath sample_path(const NoiseConfig& cfg, std::size_t n_steps) {
  if (n_steps == 0) {
    throw Error(ErrorKind::invalid_argument, "sample_path needs n_steps >= 1", "n_steps");
  }
  const NoiseStream stream(cfg);
  NoisePath path;
  path.dt = cfg.dt;
  path.increments.reserve(n_steps);
  for (std::size_t s = 0; s < n_steps; ++s) path.increments.push_back(stream.increment(s));
  return path;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("COLLAPSE_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  if (text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::config, "COLLAPSE_SEED must be a decimal unsigned integer", "COLLAPSE_SEED");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (errno == ERANGE) {
    throw Error(ErrorKind::config, "COLLAPSE_SEED out of 64-bit range", "COLLAPSE_SEED");
  }
  return static_cast<std::uint64_t>(value);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli_flag, std::uint64_t fallback) {
  if (cli_flag) return *cli_flag;
  if (auto env = seed_from_env()) return *env;
  return fallback;
}

MeanEstimate ito_variance_audit(std::uint64_t seed, double dt, std::size_t n_paths,
                                std::size_t n_steps, bool complex_noise) {
  std::vector<double> stats;
  stats.reserve(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const NoiseStream stream({seed, dt, complex_noise, p});
    double sum = 0.0;
    for (std::size_t s = 0; s < n_steps; ++s) sum += std::norm(stream.increment(s));
    stats.push_back(sum / (static_cast<double>(n_steps) * dt));
  }
  return mean_and_error(stats);
}

std::vector<double> dt_dxi_suppression(std::uint64_t seed, std::span<const double> dts,
                                       std::size_t n_paths, std::size_t n_steps) {
  std::vector<double> ratios;
  for (double dt : dts) {
    double acc = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const NoiseStream stream({seed, dt, false, p});
      Complex cross = 0.0;
      double quad = 0.0;
      for (std::size_t s = 0; s < n_steps; ++s) {
        const Complex d = stream.increment(s);
        cross += dt * d;
        quad += std::norm(d);
      }
      acc += std::abs(cross) / quad;
    }
    ratios.push_back(acc / static_cast<double>(n_paths));
  }
  return ratios;
}

CorrelationEstimate cross_correlation_audit(std::uint64_t seed, double dt, std::size_t n_pairs,
                                            std::size_t n_steps) {
  std::vector<double> corr;
  corr.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const NoiseStream a({seed, dt, false, 2 * i});
    const NoiseStream b({seed, dt, false, 2 * i + 1});
    double sum = 0.0;
    for (std::size_t s = 0; s < n_steps; ++s) sum += a.increment(s).real() * b.increment(s).real();
    corr.push_back(sum / (static_cast<double>(n_steps) * dt));
  }
  const MeanEstimate m = mean_and_error(corr);
  return {m.mean, m.std_error};
}

}  // namespace collapse
