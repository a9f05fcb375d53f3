#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "jchmf/dense_matrix.hpp"
#include "jchmf/errors.hpp"

namespace jchmf {

/// Eigenpairs of one matrix. Column k of `vectors` is the unit-norm (right)
/// eigenvector of `values[k]`; values ascend by real part, then imaginary part.
struct SpectrumResult {
  std::vector<cplx> values;
  DenseMatrix vectors;
  std::vector<double> residuals;  // ||M v - lambda v||_2 per pair
  bool defective = false;         // a near-zero pivot was regularised in back substitution
  std::size_t iterations = 0;

  std::size_t size() const noexcept { return values.size(); }

  std::vector<cplx> vector(std::size_t k) const {
    std::vector<cplx> v(vectors.rows());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = vectors(i, k);
    return v;
  }
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// |re| + |im|: cheap magnitude for pivoting and deflation tests.
inline double abs1(cplx x) noexcept { return std::abs(x.real()) + std::abs(x.imag()); }
inline double abs1(double x) noexcept { return std::abs(x); }

// Make the first non-negligible component of column k real and positive.
inline void fix_phase(DenseMatrix& v, std::size_t k) {
  const std::size_t n = v.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(v(i, k));
    if (a > 1e-10) {
      const cplx phase = std::conj(v(i, k)) / a;
      for (std::size_t r = 0; r < n; ++r) v(r, k) *= phase;
      v(i, k) = a;
      return;
    }
  }
}

inline void normalize_column(DenseMatrix& v, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i) s += std::norm(v(i, k));
  s = std::sqrt(s);
  if (s == 0.0) return;
  for (std::size_t i = 0; i < v.rows(); ++i) v(i, k) /= s;
}

// Sort eigenpairs by (real, imag) and attach residuals.
inline void finalize(const DenseMatrix& m, std::vector<cplx>& values, DenseMatrix& vectors,
                     SpectrumResult& out) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a].real() != values[b].real()) return values[a].real() < values[b].real();
    return values[a].imag() < values[b].imag();
  });
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = values[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = vectors(i, order[k]);
    fix_phase(out.vectors, k);
  }
  out.residuals.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx acc = -out.values[k] * out.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * out.vectors(j, k);
      r += std::norm(acc);
    }
    out.residuals[k] = std::sqrt(r);
  }
}

// Householder reduction of a real symmetric matrix (row-major v, in place) to
// tridiagonal form, accumulating the transformation. d: diagonal, e: subdiagonal.
inline void tridiagonalize(std::vector<double>& v, std::size_t n, std::vector<double>& d,
                           std::vector<double>& e) {
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), rotating the accumulated basis v when
// given. Returns the number of QL iterations spent.
inline std::size_t tridiagonal_ql(std::vector<double>* v, std::size_t n, std::vector<double>& d,
                                  std::vector<double>& e, std::size_t budget) {
  auto V = [&](std::size_t i, std::size_t j) -> double& { return (*v)[i * n + j]; };
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  std::size_t total = 0;
  double f = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= kEps * tst1) break;
      ++m;
    }
    if (m > l) {
      do {
        if (++total > budget)
          throw ConvergenceFailure("eig_sym: implicit QL did not converge", total);
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (v == nullptr) continue;
          for (std::size_t k = 0; k < n; ++k) {
            h = V(k, ii + 1);
            V(k, ii + 1) = s * V(k, ii) + c * h;
            V(k, ii) = c * V(k, ii) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > kEps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
  return total;
}

// Checked copy of a real symmetric matrix into row-major doubles.
inline std::vector<double> real_symmetric_copy(const DenseMatrix& m, const char* who) {
  if (!m.is_square()) throw ContractViolation(std::string(who) + ": matrix is not square");
  const std::size_t n = m.rows();
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx x = m(i, j);
      if (x.imag() != 0.0)
        throw ContractViolation(std::string(who) + ": entry (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") has nonzero imaginary part");
      if (std::abs(x.real() - m(j, i).real()) > 1e-12)
        throw ContractViolation(std::string(who) + ": matrix not symmetric at entry (" +
                                std::to_string(i) + ", " + std::to_string(j) + ")");
      v[i * n + j] = x.real();
    }
  return v;
}

}  // namespace detail

/// Eigen-decomposition of a real symmetric matrix (Householder tridiagonalization
/// followed by implicit QL). Throws ContractViolation on non-symmetric input and
/// ConvergenceFailure when the iteration budget (100 * dimension) runs out.
inline SpectrumResult eig_sym(const DenseMatrix& m) {
  std::vector<double> v = detail::real_symmetric_copy(m, "eig_sym");
  const std::size_t n = m.rows();
  SpectrumResult out;
  if (n == 0) return out;

  std::vector<double> d(n), e(n);
  detail::tridiagonalize(v, n, d, e);
  out.iterations = detail::tridiagonal_ql(&v, n, d, e, 100 * n);

  std::vector<cplx> values(d.begin(), d.end());
  DenseMatrix vectors(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) vectors(i, j) = v[i * n + j];
  detail::finalize(m, values, vectors, out);

  const double tol = 1e-10 * std::max(1.0, m.max_norm()) * static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k)
    if (!(out.residuals[k] <= tol))
      throw ConvergenceFailure("eig_sym: residual " + std::to_string(out.residuals[k]) +
                                   " exceeds contract for eigenpair " + std::to_string(k),
                               out.iterations);
  return out;
}

namespace detail {

// Givens rotation G = [[c, s], [-conj(s), c]] with G * (a, b)^T = (r, 0)^T.
struct Rotation {
  double c;
  cplx s;
};

inline Rotation make_rotation(cplx a, cplx b) {
  const double aa = std::abs(a);
  const double bb = std::abs(b);
  if (bb == 0.0) return {1.0, 0.0};
  if (aa == 0.0) return {0.0, 1.0};
  const double nrm = std::hypot(aa, bb);
  return {aa / nrm, (a / aa) * std::conj(b) / nrm};
}

// Reduce a (row-major n x n) to upper Hessenberg form by Householder
// reflections, accumulating the unitary q so that A_in = Q H Q^H.
inline void hessenberg(std::vector<cplx>& a, std::vector<cplx>* q, std::size_t n) {
  auto A = [&](std::size_t i, std::size_t j) -> cplx& { return a[i * n + j]; };
  auto Q = [&](std::size_t i, std::size_t j) -> cplx& { return (*q)[i * n + j]; };
  std::vector<cplx> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    double tail = 0.0;
    for (std::size_t i = 1; i < len; ++i) tail += std::norm(A(k + 1 + i, k));
    if (tail == 0.0) continue;
    const cplx x0 = A(k + 1, k);
    const double xnorm = std::sqrt(tail + std::norm(x0));
    const double ax0 = std::abs(x0);
    const cplx phase = ax0 == 0.0 ? cplx(1.0) : x0 / ax0;
    const cplx alpha = -phase * xnorm;

    for (std::size_t i = 0; i < len; ++i) v[i] = A(k + 1 + i, k);
    v[0] -= alpha;
    double vn = 0.0;
    for (std::size_t i = 0; i < len; ++i) vn += std::norm(v[i]);
    vn = std::sqrt(vn);
    for (std::size_t i = 0; i < len; ++i) v[i] /= vn;

    // A <- H A with H = I - 2 v v^H acting on rows k+1..n-1
    for (std::size_t j = k; j < n; ++j) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += std::conj(v[i]) * A(k + 1 + i, j);
      s *= 2.0;
      for (std::size_t i = 0; i < len; ++i) A(k + 1 + i, j) -= v[i] * s;
    }
    // A <- A H, Q <- Q H on columns k+1..n-1
    for (std::size_t r = 0; r < n; ++r) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += A(r, k + 1 + i) * v[i];
      s *= 2.0;
      for (std::size_t i = 0; i < len; ++i) A(r, k + 1 + i) -= s * std::conj(v[i]);
      if (q == nullptr) continue;
      cplx t = 0.0;
      for (std::size_t i = 0; i < len; ++i) t += Q(r, k + 1 + i) * v[i];
      t *= 2.0;
      for (std::size_t i = 0; i < len; ++i) Q(r, k + 1 + i) -= t * std::conj(v[i]);
    }
    A(k + 1, k) = alpha;
    for (std::size_t i = 2; i <= len; ++i) A(k + i, k) = 0.0;
  }
}

// Shifted QR on an upper Hessenberg matrix. With q given, runs to the full
// complex Schur form and accumulates rotations into q; without it only the
// active window is updated and just the diagonal (the eigenvalues) is meaningful.
inline std::size_t schur_qr(std::vector<cplx>& a, std::vector<cplx>* q, std::size_t n,
                            std::size_t budget) {
  auto A = [&](std::size_t i, std::size_t j) -> cplx& { return a[i * n + j]; };
  auto Q = [&](std::size_t i, std::size_t j) -> cplx& { return (*q)[i * n + j]; };
  const bool full = q != nullptr;
  double anorm = 0.0;
  for (const auto& x : a) anorm = std::max(anorm, std::abs(x));
  if (anorm == 0.0) return 0;

  std::size_t total = 0;
  std::size_t iter = 0;
  std::size_t iu = n - 1;
  while (iu > 0) {
    std::size_t il = iu;
    while (il > 0) {
      double s = abs1(A(il - 1, il - 1)) + abs1(A(il, il));
      if (s == 0.0) s = anorm;
      if (abs1(A(il, il - 1)) <= kEps * s) {
        A(il, il - 1) = 0.0;
        break;
      }
      --il;
    }
    if (il == iu) {
      --iu;
      iter = 0;
      continue;
    }
    ++iter;
    if (++total > budget) throw ConvergenceFailure("eig_general: shifted QR did not converge", total);

    cplx shift;
    if (iter % 10 == 0) {
      // exceptional shift to break cycles
      const double bump = std::abs(A(iu, iu - 1)) + (iu >= 2 ? std::abs(A(iu - 1, iu - 2)) : 0.0);
      shift = A(iu, iu) + 0.75 * bump;
    } else {
      const cplx p = A(iu - 1, iu - 1);
      const cplx d = A(iu, iu);
      const cplx mean = 0.5 * (p + d);
      const cplx disc = std::sqrt(0.25 * (p - d) * (p - d) + A(iu - 1, iu) * A(iu, iu - 1));
      const cplx l1 = mean + disc;
      const cplx l2 = mean - disc;
      shift = std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
    }

    cplx x = A(il, il) - shift;
    cplx y = A(il + 1, il);
    for (std::size_t k = il; k < iu; ++k) {
      if (k > il) {
        x = A(k, k - 1);
        y = A(k + 1, k - 1);
      }
      const Rotation g = make_rotation(x, y);
      const cplx sc = std::conj(g.s);
      const std::size_t jend = full ? n : iu + 1;
      for (std::size_t j = (k > il ? k - 1 : k); j < jend; ++j) {
        const cplx u = A(k, j);
        const cplx w = A(k + 1, j);
        A(k, j) = g.c * u + g.s * w;
        A(k + 1, j) = -sc * u + g.c * w;
      }
      if (k > il) A(k + 1, k - 1) = 0.0;
      const std::size_t rmax = std::min(k + 2, iu);
      for (std::size_t r = full ? 0 : il; r <= rmax; ++r) {
        const cplx u = A(r, k);
        const cplx w = A(r, k + 1);
        A(r, k) = u * g.c + w * sc;
        A(r, k + 1) = -u * g.s + w * g.c;
      }
      if (!full) continue;
      for (std::size_t r = 0; r < n; ++r) {
        const cplx u = Q(r, k);
        const cplx w = Q(r, k + 1);
        Q(r, k) = u * g.c + w * sc;
        Q(r, k + 1) = -u * g.s + w * g.c;
      }
    }
  }
  return total;
}

}  // namespace detail

/// Eigenvalues and right eigenvectors of a general complex matrix: Hessenberg
/// reduction, shifted QR to Schur form, back substitution for the vectors.
/// Near-zero pivots (defective or degenerate spectra) are regularised and
/// reported through `defective`.
inline SpectrumResult eig_general(const DenseMatrix& m) {
  if (!m.is_square()) throw ContractViolation("eig_general: matrix is not square");
  const std::size_t n = m.rows();
  SpectrumResult out;
  if (n == 0) return out;

  std::vector<cplx> a(m.data().begin(), m.data().end());
  std::vector<cplx> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;

  detail::hessenberg(a, &q, n);
  out.iterations = detail::schur_qr(a, &q, n, 100 * n);

  auto T = [&](std::size_t i, std::size_t j) -> const cplx& { return a[i * n + j]; };
  double tnorm = 0.0;
  for (const auto& x : a) tnorm = std::max(tnorm, std::abs(x));
  const double small = detail::kEps * std::max(tnorm, std::numeric_limits<double>::min());

  std::vector<cplx> values(n);
  DenseMatrix vectors(n, n);
  std::vector<cplx> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx lambda = T(k, k);
    values[k] = lambda;
    std::fill(y.begin(), y.end(), cplx{});
    y[k] = 1.0;
    for (std::size_t i = k; i-- > 0;) {
      cplx s = 0.0;
      for (std::size_t j = i + 1; j <= k; ++j) s += T(i, j) * y[j];
      cplx denom = T(i, i) - lambda;
      if (std::abs(denom) < small) {
        denom = small;
        out.defective = true;
      }
      y[i] = -s / denom;
      if (std::abs(y[i]) > 1e150) {
        for (std::size_t j = i; j <= k; ++j) y[j] *= 1e-150;
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j <= k; ++j) acc += q[r * n + j] * y[j];
      vectors(r, k) = acc;
    }
    detail::normalize_column(vectors, k);
  }
  detail::finalize(m, values, vectors, out);

  const double tol = 1e-8 * std::max(1.0, m.max_norm()) * static_cast<double>(n);
  if (!out.defective)
    for (std::size_t k = 0; k < n; ++k)
      if (!(out.residuals[k] <= tol))
        throw ConvergenceFailure("eig_general: residual " + std::to_string(out.residuals[k]) +
                                     " exceeds contract for eigenpair " + std::to_string(k),
                                 out.iterations);
  return out;
}

/// Lowest eigenpair (by real part, then imaginary part) with its residual.
struct Eigenpair {
  cplx value;
  std::vector<cplx> vector;
  double residual = 0.0;
};

namespace detail {

// Householder tridiagonalization without accumulating the transformation.
// On return d is the diagonal and e[i] couples i-1 and i (e[0] = 0).
inline void tridiagonal_values(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                               std::vector<double>& e) {
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  std::vector<double> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    double tail = 0.0;
    for (std::size_t i = 1; i < len; ++i) tail += A(k + 1 + i, k) * A(k + 1 + i, k);
    if (tail == 0.0) continue;
    const double x0 = A(k + 1, k);
    const double xnorm = std::sqrt(tail + x0 * x0);
    const double alpha = x0 > 0 ? -xnorm : xnorm;
    for (std::size_t i = 0; i < len; ++i) v[i] = A(k + 1 + i, k);
    v[0] -= alpha;
    double vn = 0.0;
    for (std::size_t i = 0; i < len; ++i) vn += v[i] * v[i];
    vn = std::sqrt(vn);
    for (std::size_t i = 0; i < len; ++i) v[i] /= vn;

    // A' = A - v w^T - w v^T with w = 2p - 2(v.p)v, p = A v (trailing block)
    double c = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < len; ++j) acc += A(k + 1 + i, k + 1 + j) * v[j];
      p[i] = acc;
      c += v[i] * acc;
    }
    for (std::size_t i = 0; i < len; ++i) p[i] = 2.0 * p[i] - 2.0 * c * v[i];
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j)
        A(k + 1 + i, k + 1 + j) -= v[i] * p[j] + p[i] * v[j];
    A(k + 1, k) = alpha;
    A(k, k + 1) = alpha;
    for (std::size_t i = 2; i <= len; ++i) A(k + i, k) = A(k, k + i) = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = A(i, i);
    e[i] = i == 0 ? 0.0 : A(i, i - 1);
  }
}

// Eigenvector for an (accurate) eigenvalue by inverse iteration on the
// original matrix: partial-pivot LU of (M - shift I), three solves from a
// fixed start vector. Exactly singular pivots are nudged to eps * scale.
template <class T>
std::vector<T> inverse_iteration(std::vector<T> b, std::size_t n, T shift, double scale) {
  auto B = [&](std::size_t i, std::size_t j) -> T& { return b[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) B(i, i) -= shift;
  const double tiny = kEps * std::max(scale, std::numeric_limits<double>::min());
  std::vector<std::size_t> piv(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = abs1(B(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (abs1(B(i, k)) > best) {
        best = abs1(B(i, k));
        p = i;
      }
    piv[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(B(k, j), B(p, j));
    if (abs1(B(k, k)) < tiny) B(k, k) = tiny;
    // banded input keeps the pivot row short; skip its zero tail
    std::size_t end = n;
    while (end > k + 1 && B(k, end - 1) == T{}) --end;
    for (std::size_t i = k + 1; i < n; ++i) {
      const T l = B(i, k) / B(k, k);
      B(i, k) = l;
      if (l == T{}) continue;
      for (std::size_t j = k + 1; j < end; ++j) B(i, j) -= l * B(k, j);
    }
  }
  std::vector<T> x(n, T(1.0 / std::sqrt(static_cast<double>(n))));
  for (int round = 0; round < 3; ++round) {
    for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[piv[k]]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= B(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= B(i, j) * x[j];
      x[i] /= B(i, i);
    }
    double s = 0.0;
    for (const auto& xi : x) s += std::norm(xi);
    s = std::sqrt(s);
    for (auto& xi : x) xi /= s;
  }
  return x;
}

inline Eigenpair make_pair_checked(const DenseMatrix& m, cplx value, std::vector<cplx> vec,
                                   double tol, std::size_t iterations, const char* who) {
  for (std::size_t i = 0; i < vec.size(); ++i) {
    const double a = std::abs(vec[i]);
    if (a > 1e-10) {
      const cplx phase = std::conj(vec[i]) / a;
      for (auto& x : vec) x *= phase;
      vec[i] = a;
      break;
    }
  }
  std::vector<cplx> mv = matvec(m, vec);
  for (std::size_t i = 0; i < vec.size(); ++i) mv[i] -= value * vec[i];
  const double res = norm2(mv);
  if (!(res <= tol))
    throw ConvergenceFailure(std::string(who) + ": residual " + std::to_string(res) +
                                 " exceeds contract for the lowest eigenpair",
                             iterations);
  return {value, std::move(vec), res};
}

}  // namespace detail

namespace detail {

inline std::size_t lower_bandwidth(const std::vector<double>& a, std::size_t n) {
  std::size_t b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j + b < i; ++j)
      if (a[i * n + j] != 0.0) {
        b = i - j;
        break;
      }
  return b;
}

// Is A - sigma I positive definite? Band LDL^T, failing at the first pivot
// that is not > 0. l keeps the unit-lower factor in band storage (entry (i, j)
// at i * b + j + b - i), u the current row of L * D.
inline bool band_positive_definite(const std::vector<double>& a, std::size_t n, std::size_t b, double sigma,
                                   std::vector<double>& l, std::vector<double>& u, std::vector<double>& inv_d) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > b ? i - b : 0;
    double d = a[i * n + i] - sigma;
    for (std::size_t j = j0; j < i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = j0; k < j; ++k) s -= u[k - j0] * l[j * b + k + b - j];
      u[j - j0] = s;
      const double lij = s * inv_d[j];
      l[i * b + j + b - i] = lij;
      d -= s * lij;
    }
    if (!(d > 0.0)) return false;
    inv_d[i] = 1.0 / d;
  }
  return true;
}

// Lowest eigenvalue of a narrow-band symmetric matrix: the largest shift for
// which A - sigma I stays positive definite, found by bisection between the
// Gershgorin lower bound and the smallest diagonal entry.
inline double band_lowest_value(const std::vector<double>& a, std::size_t n, std::size_t b, std::size_t& steps) {
  double lo = std::numeric_limits<double>::infinity(), hi = lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) r += std::abs(a[i * n + j]);
    lo = std::min(lo, a[i * n + i] - r);
    hi = std::min(hi, a[i * n + i]);
  }
  std::vector<double> l(n * b), u(b), inv_d(n);
  steps = 0;
  while (hi - lo > 2.0 * kEps * std::max(std::abs(lo), std::abs(hi)) && steps < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (band_positive_definite(a, n, b, mid, l, u, inv_d) ? lo : hi) = mid;
    ++steps;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Lowest eigenpair of a real symmetric matrix. Same preconditions and
/// accuracy contract as eig_sym. The vector comes from inverse iteration; the
/// value from tridiagonal QL, or for narrow-band matrices from Cholesky
/// bisection refined by the Rayleigh quotient.
inline Eigenpair lowest_eigenpair_sym(const DenseMatrix& m) {
  std::vector<double> a = detail::real_symmetric_copy(m, "lowest_eigenpair_sym");
  const std::size_t n = m.rows();
  if (n == 0) throw ContractViolation("lowest_eigenpair_sym: empty matrix");
  const double scale = std::max(1.0, m.max_norm());
  const double tol = 1e-10 * scale * static_cast<double>(n);
  const std::size_t b = detail::lower_bandwidth(a, n);

  // ~60 band factorizations against one dense tridiagonalization
  if (30 * (b + 1) * (b + 1) < n * n) {
    std::size_t steps = 0;
    const double shift = detail::band_lowest_value(a, n, b, steps);
    std::vector<double> x = detail::inverse_iteration(a, n, shift, scale);
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = i > b ? i - b : 0, j1 = std::min(n, i + b + 1);
      double ax = 0.0;
      for (std::size_t j = j0; j < j1; ++j) ax += a[i * n + j] * x[j];
      rq += x[i] * ax;
    }
    std::vector<cplx> vec(x.begin(), x.end());
    return detail::make_pair_checked(m, rq, std::move(vec), tol, steps, "lowest_eigenpair_sym");
  }

  const std::vector<double> original = a;
  std::vector<double> d(n), e(n);
  detail::tridiagonal_values(a, n, d, e);
  const std::size_t iterations = detail::tridiagonal_ql(nullptr, n, d, e, 100 * n);
  const double lambda = *std::min_element(d.begin(), d.end());
  std::vector<double> x = detail::inverse_iteration(original, n, lambda, scale);
  std::vector<cplx> vec(x.begin(), x.end());
  return detail::make_pair_checked(m, lambda, std::move(vec), tol, iterations,
                                   "lowest_eigenpair_sym");
}

/// Lowest-real-part eigenpair of a general complex matrix, same contract as eig_general.
inline Eigenpair lowest_eigenpair_general(const DenseMatrix& m) {
  if (!m.is_square()) throw ContractViolation("lowest_eigenpair_general: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0) throw ContractViolation("lowest_eigenpair_general: empty matrix");
  std::vector<cplx> a(m.data().begin(), m.data().end());
  detail::hessenberg(a, nullptr, n);
  const std::size_t iterations = detail::schur_qr(a, nullptr, n, 100 * n);
  cplx lambda = a[0];
  for (std::size_t i = 1; i < n; ++i) {
    const cplx v = a[i * n + i];
    if (v.real() < lambda.real() || (v.real() == lambda.real() && v.imag() < lambda.imag()))
      lambda = v;
  }
  const double scale = std::max(1.0, m.max_norm());
  std::vector<cplx> original(m.data().begin(), m.data().end());
  std::vector<cplx> vec = detail::inverse_iteration(std::move(original), n, lambda, scale);
  const double tol = 1e-8 * scale * static_cast<double>(n);
  return detail::make_pair_checked(m, lambda, std::move(vec), tol, iterations,
                                   "lowest_eigenpair_general");
}

}  // namespace jchmf
