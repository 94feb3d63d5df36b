#pragma once

#include <complex>
#include <variant>

#include <Eigen/Dense>

#include "collapse/error.hpp"

namespace collapse {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Accepted |norm - 1| for a stored state after renormalisation.
inline constexpr double kNormTolerance = 1e-6;

/// Largest Hermiticity defect max|M - M^dagger| tolerated at construction.
inline constexpr double kMaxHermiticityDefect = 1e-10;

/// Unit-norm amplitude vector over a finite basis of dimension >= 2.
class StateVector {
 public:
  /// Scales `amplitudes` to unit norm. Throws on zero/non-finite norm or dim < 2.
  static StateVector normalized(ComplexVector amplitudes);

  /// Wraps amplitudes already normalised to within kNormTolerance.
  static StateVector from_normalized(ComplexVector amplitudes);

  const ComplexVector& amplitudes() const noexcept { return amps_; }
  Index dim() const noexcept { return amps_.size(); }
  Complex operator[](Index i) const { return amps_[i]; }
  double norm() const { return amps_.norm(); }

 private:
  explicit StateVector(ComplexVector amps) : amps_(std::move(amps)) {}
  ComplexVector amps_;
};

/// Dense self-adjoint matrix. Construction symmetrises (M + M^dagger)/2 and
/// keeps the pre-symmetrisation defect for auditing.
class HermitianOperator {
 public:
  static HermitianOperator from_matrix(const ComplexMatrix& m);
  static HermitianOperator from_diagonal(const RealVector& diagonal);
  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double hermiticity_defect() const noexcept { return defect_; }

  /// Max absolute row sum; a cheap upper bound on the spectral radius.
  double inf_norm() const;

  void apply(const ComplexVector& in, ComplexVector& out) const { out.noalias() = m_ * in; }

 private:
  HermitianOperator(ComplexMatrix m, double defect) : m_(std::move(m)), defect_(defect) {}
  ComplexMatrix m_;
  double defect_ = 0.0;
};

/// Real diagonal operator (position-space potentials, branch projectors).
class DiagonalOperator {
 public:
  explicit DiagonalOperator(RealVector diagonal);

  const RealVector& diagonal() const noexcept { return d_; }
  Index dim() const noexcept { return d_.size(); }
  double inf_norm() const { return d_.cwiseAbs().maxCoeff(); }

  void apply(const ComplexVector& in, ComplexVector& out) const { out = d_.cwiseProduct(in); }
  HermitianOperator to_dense() const { return HermitianOperator::from_diagonal(d_); }

 private:
  RealVector d_;
};

/// Either storage form of an observable; used for collapse operators and projectors.
using Observable = std::variant<HermitianOperator, DiagonalOperator>;

Index dim(const Observable& op);
double inf_norm(const Observable& op);
void apply(const Observable& op, const ComplexVector& in, ComplexVector& out);

/// <psi|op|psi> for a raw (unit-norm) amplitude vector; no validation. Hot path.
double expectation_unchecked(const Observable& op, const ComplexVector& psi);

/// Factorisation of the basis as A (x) B, index = a * dims_b + b.
struct BipartitePartition {
  Index dim_a = 0;
  Index dim_b = 0;

  Index dim() const { return dim_a * dim_b; }
};

enum class Side { a, b };

/// <psi|op|psi>. Throws on dimension mismatch or when the imaginary residue of
/// the bilinear form exceeds 1e-12 (relative to the operator scale).
double expectation(const HermitianOperator& op, const StateVector& psi);
double expectation(const Observable& op, const StateVector& psi);

/// k (op - <psi|op|psi>) psi, orthogonal to psi.
ComplexVector deviation_apply(const HermitianOperator& op, const StateVector& psi, double k);
ComplexVector deviation_apply(const Observable& op, const StateVector& psi, double k);

/// Partial trace of |psi><psi| keeping subsystem `keep`.
ComplexMatrix reduced_density(const StateVector& psi, const BipartitePartition& part, Side keep);

/// Kronecker product A (x) B with the index convention of BipartitePartition.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Trace norm distance 0.5 * sum |eig(rho - sigma)| for Hermitian inputs.
double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma);

}  // namespace collapse

namespace collapse {

/// Partial trace of a density matrix on the A (x) B factorisation.
ComplexMatrix partial_trace(const ComplexMatrix& rho, const BipartitePartition& part, Side keep);

}  // namespace collapse
