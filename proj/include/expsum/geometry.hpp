#pragma once

// Points of C^n, their distance to the diagonal D = {(w, ..., w)}, and the
// symmetries of the nearest-point problem: translation along D, complex
// conjugation, coordinate permutation, and 2*pi*i shifts of single coordinates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "expsum/errors.hpp"
#include "expsum/numeric.hpp"

namespace expsum {

/// A point of C^n, n >= 2, with finite coordinates.
class Point {
 public:
  Point() = default;

  explicit Point(std::vector<Complex> z) : z_(std::move(z)) { validate(); }

  Point(std::initializer_list<Complex> z) : z_(z) { validate(); }

  std::size_t n() const noexcept { return z_.size(); }
  const std::vector<Complex>& coords() const noexcept { return z_; }
  const Complex& operator[](std::size_t j) const { return z_[j]; }

  auto begin() const noexcept { return z_.begin(); }
  auto end() const noexcept { return z_.end(); }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  void validate() const {
    if (z_.size() < 2) {
      throw Error(ErrorKind::InvalidPoint,
                  "point dimension " + std::to_string(z_.size()) + " is below 2");
    }
    for (std::size_t j = 0; j < z_.size(); ++j) {
      if (!std::isfinite(z_[j].real()) || !std::isfinite(z_[j].imag())) {
        throw Error(ErrorKind::InvalidPoint,
                    "coordinate " + std::to_string(j) + " is not finite");
      }
    }
  }

  std::vector<Complex> z_;
};

struct DiagonalProjection {
  Complex mean;
  double dist2 = 0.0;
};

inline Complex coordinate_mean(const Point& p) {
  ComplexSum sum;
  for (const Complex& z : p) sum.add(z);
  return sum.value() / static_cast<double>(p.n());
}

/// Nearest diagonal point (w, ..., w) with w the coordinate mean, and the
/// squared Euclidean distance to it in C^n = R^{2n}.
inline DiagonalProjection diagonal_projection(const Point& p) {
  const Complex mean = coordinate_mean(p);
  CompensatedSum dist2;
  for (const Complex& z : p) dist2.add(norm2(z - mean));
  return {mean, dist2.value()};
}

inline double dist2(const Point& p) { return diagonal_projection(p).dist2; }

inline Point translate(const Point& p, Complex a) {
  std::vector<Complex> z(p.coords());
  for (Complex& w : z) w -= a;
  return Point(std::move(z));
}

inline Point conjugate(const Point& p) {
  std::vector<Complex> z(p.coords());
  for (Complex& w : z) w = std::conj(w);
  return Point(std::move(z));
}

/// Orders coordinates by (|z|, Im z, Re z).
inline bool modulus_less(const Complex& x, const Complex& y) {
  const double ax = std::abs(x);
  const double ay = std::abs(y);
  if (ax != ay) return ax < ay;
  if (x.imag() != y.imag()) return x.imag() < y.imag();
  return x.real() < y.real();
}

inline Point sort_by_modulus(const Point& p) {
  std::vector<Complex> z(p.coords());
  std::stable_sort(z.begin(), z.end(), modulus_less);
  return Point(std::move(z));
}

namespace detail {

// Change in dist2 when coordinate j (deviation d_j from the mean) moves by delta.
// Uses sum_m d_m = 0:  2 Re(conj(d_j) delta) + |delta|^2 (1 - 1/n).
inline double shift_gain(Complex deviation, Complex delta, std::size_t n) {
  return 2.0 * (std::conj(deviation) * delta).real() +
         norm2(delta) * (1.0 - 1.0 / static_cast<double>(n));
}

}  // namespace detail

/// Applies single-coordinate 2*pi*i shifts while one strictly lowers dist2.
///
/// Each round takes the shift with the largest decrease. Equal decreases are
/// resolved toward the smaller resulting |Im z_j|, then the larger index j.
/// A decrease must exceed a rounding guard of 1e-12 * (1 + dist2) to count,
/// so exact ties (e.g. (0, -pi*i) versus (0, pi*i)) never move.
inline Point reduce_imaginary(const Point& p) {
  const std::size_t n = p.n();
  std::vector<Complex> z(p.coords());
  const Complex shifts[2] = {Complex(0.0, kTwoPi), Complex(0.0, -kTwoPi)};

  // Every accepted shift lowers dist2 by at least the guard, so this bound is
  // never reached for finite input; it only protects against NaN-driven loops.
  const std::size_t max_rounds = 1'000'000;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    const DiagonalProjection proj = diagonal_projection(Point(z));
    const double guard = 1e-12 * (1.0 + proj.dist2);

    std::vector<double> gains(2 * n);
    double best_gain = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t s = 0; s < 2; ++s) {
        gains[2 * j + s] = detail::shift_gain(z[j] - proj.mean, shifts[s], n);
        best_gain = std::min(best_gain, gains[2 * j + s]);
      }
    }
    if (best_gain >= -guard) break;

    double best_abs_im = std::numeric_limits<double>::infinity();
    std::size_t best_j = n;
    Complex best_shift;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t s = 0; s < 2; ++s) {
        if (gains[2 * j + s] > best_gain + guard) continue;
        const double abs_im = std::abs((z[j] + shifts[s]).imag());
        if (abs_im <= best_abs_im) {
          best_abs_im = abs_im;
          best_j = j;
          best_shift = shifts[s];
        }
      }
    }
    if (best_j == n) break;
    z[best_j] += best_shift;
  }
  return Point(std::move(z));
}

/// Maps p to a representative of its symmetry orbit satisfying
///   sum_j z_j = 0, |z_1| <= ... <= |z_n|, Im z_n >= 0,
/// with no single 2*pi*i shift able to lower dist2.
inline Point normalize(const Point& p) {
  Point q = reduce_imaginary(p);
  q = translate(q, coordinate_mean(q));
  q = sort_by_modulus(q);
  if (q[q.n() - 1].imag() < 0.0) {
    // Conjugation flips the Im tie-break among equal moduli; sort again.
    q = sort_by_modulus(conjugate(q));
  }
  return q;
}

}  // namespace expsum
