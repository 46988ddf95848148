#ifndef PERIGIBBS_LINALG_HPP
#define PERIGIBBS_LINALG_HPP

// Small dense solves that must work over exact rationals as well as floats.
// Eigen's decompositions assume a floating scalar, so the elimination is
// written out here and templated on the scalar type.

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "perigibbs/grid.hpp"

#include <stdexcept>

namespace perigibbs {

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = Matrix<Rational>;
using RationalVector = Vector<Rational>;

namespace detail {
template <typename Scalar>
Scalar magnitude(const Scalar& x) {
  using std::abs;
  using boost::multiprecision::abs;
  return abs(x);
}
}  // namespace detail

/// Gaussian elimination with partial pivoting. Exact when Scalar is Rational.
/// Throws std::domain_error when a zero pivot shows the matrix is singular.
template <typename Scalar>
Vector<Scalar> solve_partial_pivot(Matrix<Scalar> a, Vector<Scalar> b) {
  const Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve: shape mismatch");
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    Scalar best = detail::magnitude(Scalar(a(col, col)));
    for (Index r = col + 1; r < n; ++r) {
      Scalar cand = detail::magnitude(Scalar(a(r, col)));
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best == Scalar(0)) throw std::domain_error("solve: singular matrix");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      std::swap(b(pivot), b(col));
    }
    for (Index r = col + 1; r < n; ++r) {
      const Scalar factor = Scalar(a(r, col) / a(col, col));
      if (factor == Scalar(0)) continue;
      for (Index c = col; c < n; ++c) a(r, c) = Scalar(a(r, c) - factor * a(col, c));
      b(r) = Scalar(b(r) - factor * b(col));
    }
  }
  Vector<Scalar> x(n);
  for (Index r = n - 1; r >= 0; --r) {
    Scalar acc = b(r);
    for (Index c = r + 1; c < n; ++c) acc = Scalar(acc - a(r, c) * x(c));
    x(r) = Scalar(acc / a(r, r));
  }
  return x;
}

/// Determinant by the same elimination (exact for Rational).
template <typename Scalar>
Scalar determinant(Matrix<Scalar> a) {
  const Index n = a.rows();
  Scalar det = 1;
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    while (pivot < n && a(pivot, col) == Scalar(0)) ++pivot;
    if (pivot == n) return Scalar(0);
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      det = -det;
    }
    det = Scalar(det * a(col, col));
    for (Index r = col + 1; r < n; ++r) {
      const Scalar factor = Scalar(a(r, col) / a(col, col));
      for (Index c = col; c < n; ++c) a(r, c) = Scalar(a(r, c) - factor * a(col, c));
    }
  }
  return det;
}

}  // namespace perigibbs

#endif  // PERIGIBBS_LINALG_HPP
