#include "doctest.h"

#include <cmath>
#include <random>

#include "collapse/state.hpp"
#include "helpers.hpp"

using namespace collapse;

namespace {

// <psi|M|psi> as an explicit double sum over matrix elements.
Complex bilinear_sum(const ComplexMatrix& m, const ComplexVector& psi) {
  Complex sum = 0.0;
  for (Index i = 0; i < psi.size(); ++i) {
    for (Index j = 0; j < psi.size(); ++j) sum += std::conj(psi[i]) * m(i, j) * psi[j];
  }
  return sum;
}

ComplexMatrix partial_trace_loop(const ComplexVector& psi, Index da, Index db, Side keep) {
  if (keep == Side::a) {
    ComplexMatrix rho = ComplexMatrix::Zero(da, da);
    for (Index a1 = 0; a1 < da; ++a1)
      for (Index a2 = 0; a2 < da; ++a2)
        for (Index b = 0; b < db; ++b) rho(a1, a2) += psi[a1 * db + b] * std::conj(psi[a2 * db + b]);
    return rho;
  }
  ComplexMatrix rho = ComplexMatrix::Zero(db, db);
  for (Index b1 = 0; b1 < db; ++b1)
    for (Index b2 = 0; b2 < db; ++b2)
      for (Index a = 0; a < da; ++a) rho(b1, b2) += psi[a * db + b1] * std::conj(psi[a * db + b2]);
  return rho;
}

}  // namespace

TEST_CASE("state vector construction") {
  ComplexVector v(2);
  v << 3.0, Complex(0.0, 4.0);
  const auto psi = StateVector::normalized(v);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(psi[0] - 0.6) < 1e-15);

  CHECK_THROWS_AS(StateVector::normalized(ComplexVector::Zero(3)), Error);
  CHECK_THROWS_AS(StateVector::normalized(ComplexVector::Ones(1)), Error);
  ComplexVector bad = ComplexVector::Ones(2);
  bad[1] = std::nan("");
  CHECK_THROWS_AS(StateVector::normalized(bad), Error);
  CHECK_THROWS_AS(StateVector::from_normalized(ComplexVector::Ones(2)), Error);
}

TEST_CASE("hermitian operator rejects non-hermitian input") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator::from_matrix(m), Error);
  CHECK_THROWS_AS(HermitianOperator::from_matrix(ComplexMatrix::Zero(2, 3)), Error);
  m(1, 0) = 1.0 + 1e-13;
  CHECK(HermitianOperator::from_matrix(m).hermiticity_defect() > 0.0);
}

TEST_CASE("expectation") {
  std::mt19937_64 rng(1);
  SUBCASE("identity gives one") {
    for (int i = 0; i < 20; ++i) {
      const auto psi = testing::random_state(rng, 5);
      CHECK(expectation(HermitianOperator::identity(5), psi) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("eigenstate gives eigenvalue") {
    RealVector d(2);
    d << 1.7, -0.4;
    ComplexVector x(2);
    x << 1.0, 0.0;
    CHECK(expectation(HermitianOperator::from_diagonal(d), StateVector::normalized(x)) == 1.7);
  }
  SUBCASE("matches the double-sum oracle on random 4x4") {
    for (int i = 0; i < 200; ++i) {
      const auto m = testing::random_hermitian_matrix(rng, 4);
      const auto psi = testing::random_state(rng, 4);
      const Complex ref = bilinear_sum(m, psi.amplitudes());
      const double got = expectation(HermitianOperator::from_matrix(m), psi);
      CHECK(std::abs(got - ref.real()) <= 1e-12 * std::max(1.0, std::abs(ref.real())));
      CHECK(std::abs(ref.imag()) < 1e-12);
    }
  }
  SUBCASE("dimension mismatch is a structured error") {
    const auto psi = testing::random_state(rng, 3);
    try {
      (void)expectation(HermitianOperator::identity(4), psi);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::dimension_mismatch);
    }
  }
}

TEST_CASE("expectation lies within the spectrum") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const Index n = 2 + static_cast<Index>(rng() % 15);
    const auto h = testing::random_hermitian(rng, n);
    const auto psi = testing::random_state(rng, n);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h.matrix(), Eigen::EigenvaluesOnly);
    const double e = expectation(h, psi);
    const double scale = h.inf_norm();
    CHECK(e >= eig.eigenvalues().minCoeff() - 1e-12 * scale);
    CHECK(e <= eig.eigenvalues().maxCoeff() + 1e-12 * scale);
    CHECK(std::abs(bilinear_sum(h.matrix(), psi.amplitudes()).imag()) <= 1e-12 * scale);
  }
}

TEST_CASE("deviation_apply") {
  std::mt19937_64 rng(3);
  SUBCASE("eigenstate gives zero") {
    RealVector d(3);
    d << 2.0, -1.0, 0.5;
    ComplexVector e(3);
    e << 0.0, Complex(0.0, 1.0), 0.0;
    CHECK(deviation_apply(HermitianOperator::from_diagonal(d), StateVector::normalized(e), 1.3).norm() == 0.0);
  }
  SUBCASE("k = 0 gives zero") {
    const auto psi = testing::random_state(rng, 4);
    CHECK(deviation_apply(testing::random_hermitian(rng, 4), psi, 0.0).norm() == 0.0);
  }
  SUBCASE("two-level equal superposition") {
    RealVector d(2);
    d << 1.0, -1.0;
    ComplexVector v(2);
    v << 1.0, 1.0;
    const auto out = deviation_apply(HermitianOperator::from_diagonal(d), StateVector::normalized(v), 1.0);
    // k alpha beta (a - b) (beta, -alpha) with alpha = beta = 1/sqrt 2.
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(out[0] - Complex(s)) < 1e-15);
    CHECK(std::abs(out[1] + Complex(s)) < 1e-15);
  }
  SUBCASE("output is orthogonal to the input") {
    for (int i = 0; i < 1000; ++i) {
      const Index n = 2 + static_cast<Index>(rng() % 7);
      const auto psi = testing::random_state(rng, n);
      const auto out = deviation_apply(testing::random_hermitian(rng, n), psi, 0.7);
      CHECK(std::abs(psi.amplitudes().dot(out)) <= 1e-12 * std::max(out.norm(), 1e-300));
    }
  }
}

TEST_CASE("reduced density") {
  std::mt19937_64 rng(4);
  SUBCASE("product state is pure") {
    const auto a = testing::random_vector(rng, 2).normalized();
    const auto b = testing::random_vector(rng, 3).normalized();
    ComplexVector ab(6);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 3; ++j) ab[i * 3 + j] = a[i] * b[j];
    const auto rho = reduced_density(StateVector::normalized(ab), {2, 3}, Side::b);
    CHECK(std::abs((rho * rho).trace() - 1.0) < 1e-12);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho);
    CHECK(eig.eigenvalues()[1] < 1e-12);
  }
  SUBCASE("Bell state gives I/2") {
    ComplexVector bell = ComplexVector::Zero(4);
    bell[0] = bell[3] = 1.0;
    const auto psi = StateVector::normalized(bell);
    for (Side s : {Side::a, Side::b}) {
      const auto rho = reduced_density(psi, {2, 2}, s);
      CHECK((rho - 0.5 * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
    }
  }
  SUBCASE("matches the index-sum oracle and has unit trace") {
    for (int i = 0; i < 1000; ++i) {
      const Index da = 2 + static_cast<Index>(rng() % 3), db = 2 + static_cast<Index>(rng() % 3);
      const auto psi = testing::random_state(rng, da * db);
      for (Side s : {Side::a, Side::b}) {
        const auto rho = reduced_density(psi, {da, db}, s);
        CHECK((rho - partial_trace_loop(psi.amplitudes(), da, db, s)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
      }
    }
  }
  SUBCASE("density-matrix partial trace agrees") {
    const auto psi = testing::random_state(rng, 6);
    const ComplexMatrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
    CHECK((partial_trace(rho, {3, 2}, Side::a) - reduced_density(psi, {3, 2}, Side::a)).norm() < 1e-14);
  }
  SUBCASE("partition must match") {
    CHECK_THROWS_AS(reduced_density(testing::random_state(rng, 6), {2, 2}, Side::a), Error);
  }
}

TEST_CASE("kron and trace distance") {
  ComplexMatrix a(2, 2), b = ComplexMatrix::Identity(2, 2);
  a << 1, 2, 3, 4;
  const auto k = kron(a, b);
  CHECK(k(0, 2) == Complex(2.0));
  CHECK(k(3, 1) == Complex(3.0));
  ComplexMatrix r0 = ComplexMatrix::Zero(2, 2), r1 = ComplexMatrix::Zero(2, 2);
  r0(0, 0) = 1.0;
  r1(1, 1) = 1.0;
  CHECK(trace_distance(r0, r1) == doctest::Approx(1.0));
  CHECK(trace_distance(r0, r0) == 0.0);
}
