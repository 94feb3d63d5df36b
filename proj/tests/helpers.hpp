#pragma once

#include <random>

#include "collapse/state.hpp"

namespace testing {

inline collapse::ComplexVector random_vector(std::mt19937_64& rng, collapse::Index n) {
  std::normal_distribution<double> g;
  collapse::ComplexVector v(n);
  for (collapse::Index i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
  return v;
}

inline collapse::StateVector random_state(std::mt19937_64& rng, collapse::Index n) {
  return collapse::StateVector::normalized(random_vector(rng, n));
}

inline collapse::ComplexMatrix random_hermitian_matrix(std::mt19937_64& rng, collapse::Index n) {
  std::normal_distribution<double> g;
  collapse::ComplexMatrix m(n, n);
  for (collapse::Index i = 0; i < n; ++i) {
    for (collapse::Index j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  }
  return (m + m.adjoint()) * 0.5;
}

inline collapse::HermitianOperator random_hermitian(std::mt19937_64& rng, collapse::Index n) {
  return collapse::HermitianOperator::from_matrix(random_hermitian_matrix(rng, n));
}

}  // namespace testing
