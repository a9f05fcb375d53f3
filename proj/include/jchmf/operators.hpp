#pragma once

#include <cmath>
#include <cstddef>

#include "jchmf/dense_matrix.hpp"
#include "jchmf/errors.hpp"

namespace jchmf {

// Site basis: photon number n in [0, n_max] times qubit level q (0 = |g>, 1 = |e>),
// flattened as 2n + q. The NV spin is not in the basis; it is a conserved sector label.

struct BasisIndex {
  std::size_t n = 0;
  std::size_t q = 0;

  constexpr std::size_t flat() const noexcept { return 2 * n + q; }
  static constexpr BasisIndex from_flat(std::size_t i) noexcept { return {i / 2, i % 2}; }
};

constexpr std::size_t site_dimension(std::size_t n_max) noexcept { return 2 * (n_max + 1); }

struct LadderOps {
  DenseMatrix annihilate;
  DenseMatrix create;
};

/// Truncated bosonic ladder operators on photon numbers 0..n_max.
inline LadderOps ladder_ops(std::size_t n_max) {
  if (n_max == 0) throw ContractViolation("ladder_ops: n_max must be >= 1");
  DenseMatrix a(n_max + 1, n_max + 1);
  for (std::size_t n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {a, a.adjoint()};
}

struct PauliOps {
  DenseMatrix sigma_z;
  DenseMatrix sigma_plus;
  DenseMatrix sigma_minus;
};

/// Two-level operators in the (|g>, |e>) basis; sigma_z = diag(-1, +1).
inline PauliOps pauli_ops() {
  DenseMatrix sz = DenseMatrix::diagonal({-1.0, 1.0});
  DenseMatrix sp(2, 2);
  sp(1, 0) = 1.0;  // |e><g|
  return {sz, sp, sp.adjoint()};
}

/// Tensor product A (x) B with B as the fast index:
/// result(i*rB + p, j*cB + q) = A(i, j) * B(p, q).
inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  const std::size_t rb = b.rows();
  const std::size_t cb = b.cols();
  DenseMatrix out(a.rows() * rb, a.cols() * cb);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t p = 0; p < rb; ++p)
        for (std::size_t q = 0; q < cb; ++q) out(i * rb + p, j * cb + q) = aij * b(p, q);
    }
  return out;
}

}  // namespace jchmf
