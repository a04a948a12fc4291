// Orthonormal Hermite polynomials (probabilists' convention).
//
// The basis is normalized so that E[h_m(Z) h_k(Z)] = δ_{mk} for
// Z ~ N(0,1).  With that normalization the three-term recurrence reads
//
//   h_0(z) = 1,   h_1(z) = z,
//   h_{m+1}(z) = ( z·h_m(z) − √m·h_{m−1}(z) ) / √(m+1),
//
// which is numerically stable for the orders used here (m ≤ a few
// hundred).  The recurrence lives in the base namespace because both
// the target definitions (index models built from Hermite ridges) and
// the dictionary expansion machinery need it.
#ifndef MFLAB_HERMITE_BASIS_HPP
#define MFLAB_HERMITE_BASIS_HPP

#include <cmath>
#include <stdexcept>

#include "mflab/types.hpp"

namespace mflab {

/// Value of the orthonormal probabilists' Hermite polynomial h_m at z.
template <typename Scalar>
Scalar hermite_value(int m, Scalar z) {
  if (m < 0) {
    throw std::invalid_argument("hermite_value: order m must be >= 0");
  }
  Scalar prev = Scalar(1);  // h_0
  if (m == 0) return prev;
  Scalar cur = z;  // h_1
  for (int j = 1; j < m; ++j) {
    const Scalar next =
        (z * cur - std::sqrt(Scalar(j)) * prev) / std::sqrt(Scalar(j + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

/// All orders 0..M at once; entry m is h_m(z).  One pass of the
/// recurrence, for quadrature loops that need the whole column.
inline Vector hermite_values_upto(int M, double z) {
  if (M < 0) {
    throw std::invalid_argument("hermite_values_upto: order M must be >= 0");
  }
  Vector h(M + 1);
  h[0] = 1.0;
  if (M >= 1) h[1] = z;
  for (int j = 1; j < M; ++j) {
    h[j + 1] = (z * h[j] - std::sqrt(double(j)) * h[j - 1]) /
               std::sqrt(double(j + 1));
  }
  return h;
}

}  // namespace mflab

#endif  // MFLAB_HERMITE_BASIS_HPP
