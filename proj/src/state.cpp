#include "collapse/state.hpp"

#include <cmath>
#include <string>

namespace collapse {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::integration_failure: return "integration_failure";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::config: return "config";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

namespace {

void require_dim(Index expected, Index actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorKind::dimension_mismatch, std::string(what) + ": operator dimension " +
                                                   std::to_string(expected) + " vs state dimension " +
                                                   std::to_string(actual));
  }
}

}  // namespace

StateVector StateVector::normalized(ComplexVector amplitudes) {
  if (amplitudes.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "state dimension must be at least 2");
  }
  const double n = amplitudes.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorKind::numerical, "cannot normalise state with norm " + std::to_string(n));
  }
  amplitudes /= n;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::from_normalized(ComplexVector amplitudes) {
  if (amplitudes.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "state dimension must be at least 2");
  }
  const double n = amplitudes.norm();
  if (!(std::abs(n - 1.0) <= kNormTolerance)) {
    throw Error(ErrorKind::numerical, "state is not normalised: norm " + std::to_string(n));
  }
  return StateVector(std::move(amplitudes));
}

HermitianOperator HermitianOperator::from_matrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::dimension_mismatch, "Hermitian operator must be a non-empty square matrix");
  }
  const ComplexMatrix adj = m.adjoint();
  const double defect = (m - adj).cwiseAbs().maxCoeff();
  if (!std::isfinite(defect) || defect > kMaxHermiticityDefect) {
    throw Error(ErrorKind::numerical,
                "matrix is not Hermitian: defect " + std::to_string(defect) + " exceeds 1e-10");
  }
  return HermitianOperator(0.5 * (m + adj), defect);
}

HermitianOperator HermitianOperator::from_diagonal(const RealVector& diagonal) {
  ComplexMatrix m = ComplexMatrix::Zero(diagonal.size(), diagonal.size());
  m.diagonal() = diagonal.cast<Complex>();
  return HermitianOperator(std::move(m), 0.0);
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(ComplexMatrix::Identity(dim, dim), 0.0);
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim), 0.0);
}

double HermitianOperator::inf_norm() const {
  return m_.cwiseAbs().rowwise().sum().maxCoeff();
}

DiagonalOperator::DiagonalOperator(RealVector diagonal) : d_(std::move(diagonal)) {
  if (d_.size() == 0 || !d_.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "diagonal operator must be non-empty and finite");
  }
}

Index dim(const Observable& op) {
  return std::visit([](const auto& o) { return o.dim(); }, op);
}

double inf_norm(const Observable& op) {
  return std::visit([](const auto& o) { return o.inf_norm(); }, op);
}

void apply(const Observable& op, const ComplexVector& in, ComplexVector& out) {
  std::visit([&](const auto& o) { o.apply(in, out); }, op);
}

double expectation_unchecked(const Observable& op, const ComplexVector& psi) {
  if (const auto* d = std::get_if<DiagonalOperator>(&op)) {
    return d->diagonal().dot(psi.cwiseAbs2());
  }
  const auto& m = std::get<HermitianOperator>(op).matrix();
  return psi.dot(m * psi).real();
}

double expectation(const HermitianOperator& op, const StateVector& psi) {
  require_dim(op.dim(), psi.dim(), "expectation");
  const Complex value = psi.amplitudes().dot(op.matrix() * psi.amplitudes());
  const double scale = std::max(1.0, op.inf_norm());
  if (std::abs(value.imag()) > 1e-12 * scale) {
    throw Error(ErrorKind::numerical,
                "expectation has imaginary residue " + std::to_string(value.imag()));
  }
  return value.real();
}

double expectation(const Observable& op, const StateVector& psi) {
  if (const auto* h = std::get_if<HermitianOperator>(&op)) {
    return expectation(*h, psi);
  }
  require_dim(dim(op), psi.dim(), "expectation");
  return expectation_unchecked(op, psi.amplitudes());
}

ComplexVector deviation_apply(const HermitianOperator& op, const StateVector& psi, double k) {
  return deviation_apply(Observable{op}, psi, k);
}

ComplexVector deviation_apply(const Observable& op, const StateVector& psi, double k) {
  const double mean = expectation(op, psi);
  ComplexVector out(psi.dim());
  apply(op, psi.amplitudes(), out);
  out -= mean * psi.amplitudes();
  out *= k;
  return out;
}

ComplexMatrix reduced_density(const StateVector& psi, const BipartitePartition& part, Side keep) {
  if (part.dim_a <= 0 || part.dim_b <= 0 || part.dim() != psi.dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "partition " + std::to_string(part.dim_a) + "x" + std::to_string(part.dim_b) +
                    " does not factor state dimension " + std::to_string(psi.dim()));
  }
  // Column-major map: coeffs(b, a) = psi[a * dim_b + b].
  const Eigen::Map<const ComplexMatrix> coeffs(psi.amplitudes().data(), part.dim_b, part.dim_a);
  if (keep == Side::a) {
    // rho_A(a, a') = sum_b psi(a, b) conj(psi(a', b))
    return (coeffs.transpose() * coeffs.conjugate()).eval();
  }
  return (coeffs * coeffs.adjoint()).eval();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  const ComplexMatrix diff = rho - sigma;
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (diff + diff.adjoint()),
                                                        Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

}  // namespace collapse

namespace collapse {

ComplexMatrix partial_trace(const ComplexMatrix& rho, const BipartitePartition& part, Side keep) {
  if (rho.rows() != part.dim() || rho.cols() != part.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "density matrix does not match partition");
  }
  const Index da = part.dim_a;
  const Index db = part.dim_b;
  if (keep == Side::a) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (Index a = 0; a < da; ++a)
      for (Index a2 = 0; a2 < da; ++a2)
        for (Index b = 0; b < db; ++b) out(a, a2) += rho(a * db + b, a2 * db + b);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Index b = 0; b < db; ++b)
    for (Index b2 = 0; b2 < db; ++b2)
      for (Index a = 0; a < da; ++a) out(b, b2) += rho(a * db + b, a * db + b2);
  return out;
}

}  // namespace collapse
