#pragma once

// The zero set A = {z in C^n : e^{z_1} + ... + e^{z_n} = 0}.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "expsum/errors.hpp"
#include "expsum/geometry.hpp"
#include "expsum/numeric.hpp"

namespace expsum {

struct Residual {
  Complex value;
  std::vector<Complex> grad;  // dF/dz_j = e^{z_j}, never zero
};

/// Largest real part whose exponential is still a finite double.
inline const double kMaxExponent = std::log(std::numeric_limits<double>::max());

/// F(z) = sum_j e^{z_j} and its holomorphic gradient.
/// Throws Overflow when some e^{z_j} is not representable.
inline Residual residual(const Point& p) {
  Residual r;
  r.grad.reserve(p.n());
  ComplexSum sum;
  for (std::size_t j = 0; j < p.n(); ++j) {
    if (p[j].real() > kMaxExponent) {
      throw Error(ErrorKind::Overflow, "exp(z_" + std::to_string(j + 1) +
                                           ") overflows: Re z = " +
                                           std::to_string(p[j].real()));
    }
    const Complex e = std::exp(p[j]);
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) {
      throw Error(ErrorKind::Overflow,
                  "exp(z_" + std::to_string(j + 1) + ") is not finite");
    }
    r.grad.push_back(e);
    sum.add(e);
  }
  r.value = sum.value();
  return r;
}

/// The closed-form candidate Q = (b_1, ..., b_n) on A:
///   k = log(n - 1) + i*pi,  b_j = -k/n (j < n),  b_n = k - k/n,
/// whose squared distance to the diagonal is |k|^2 (1 - 1/n).
struct CandidateFrame {
  std::size_t n = 0;
  Complex k;
  std::vector<Complex> b;
  double dist2_closed_form = 0.0;

  Point point() const { return Point(b); }
};

inline CandidateFrame candidate(std::size_t n) {
  if (n < 2) {
    throw Error(ErrorKind::DimensionTooSmall, "n must be ≥ 2");
  }
  const double nd = static_cast<double>(n);
  CandidateFrame frame;
  frame.n = n;
  frame.k = Complex(std::log(nd - 1.0), kPi);
  const Complex small = -frame.k / nd;
  frame.b.assign(n, small);
  frame.b[n - 1] = frame.k * ((nd - 1.0) / nd);
  frame.dist2_closed_form = std::norm(frame.k) * ((nd - 1.0) / nd);
  return frame;
}

struct RetractOptions {
  double tol = -1.0;  // negative selects 1e-12 * n
  int max_iter = 50;
};

struct RetractOutcome {
  Point point;
  int iterations = 0;  // Newton steps taken
};

/// Minimal-norm Newton projection onto A.
///
/// For the single complex equation F(z) = 0 the least-squares solution of the
/// linearization F(z) + sum_j e^{z_j} dz_j = 0 is
///   dz_j = -F(z) conj(e^{z_j}) / sum_m |e^{z_m}|^2,
/// the smallest correction in C^n = R^{2n}. Iterated until |F| <= tol.
inline RetractOutcome retract_counted(const Point& p, double tol, int max_iter) {
  if (tol <= 0.0) tol = 1e-12 * static_cast<double>(p.n());
  std::vector<Complex> z(p.coords());
  for (int iter = 0; iter <= max_iter; ++iter) {
    const Residual r = residual(Point(z));
    if (std::abs(r.value) <= tol) return {Point(std::move(z)), iter};
    if (iter == max_iter) break;
    CompensatedSum g2;
    for (const Complex& e : r.grad) g2.add(norm2(e));
    const Complex scale = r.value / g2.value();
    for (std::size_t j = 0; j < z.size(); ++j) z[j] -= scale * std::conj(r.grad[j]);
  }
  throw Error(ErrorKind::NoConvergence,
              "retraction did not reach |F| <= " + std::to_string(tol) + " in " +
                  std::to_string(max_iter) + " iterations");
}

inline Point retract(const Point& p, double tol, int max_iter) {
  return retract_counted(p, tol, max_iter).point;
}

inline Point retract(const Point& p, const RetractOptions& opts = {}) {
  return retract(p, opts.tol, opts.max_iter);
}

namespace detail {

// std::mt19937_64 and std::seed_seq are fully specified by the standard; the
// std:: distributions are not, so the [-1, 1) mapping is done by hand.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

inline double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace detail

/// A point of A: z_1..z_{n-1} uniform in the square [-scale, scale]^2, z_n
/// the principal log of -(e^{z_1} + ... + e^{z_{n-1}}), then normalized.
/// A vanishing or subnormal partial sum triggers a redraw from the next
/// stream; after 100 redraws the draw fails with DegenerateDraw.
inline Point random_feasible(std::size_t n, std::uint64_t seed, double scale) {
  if (n < 2) throw Error(ErrorKind::DimensionTooSmall, "n must be ≥ 2");
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorKind::InvalidPoint, "scale must be finite and nonnegative");
  }
  constexpr int kMaxStreams = 100;
  for (int stream = 0; stream < kMaxStreams; ++stream) {
    auto rng = detail::stream_engine(seed, static_cast<std::uint32_t>(stream));
    std::vector<Complex> z(n);
    ComplexSum partial;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double re = scale * detail::symmetric_unit(rng);
      const double im = scale * detail::symmetric_unit(rng);
      z[j] = Complex(re, im);
      partial.add(std::exp(z[j]));
    }
    const Complex s = partial.value();
    if (std::abs(s) < std::numeric_limits<double>::min()) continue;
    // + 0.0 clears a negative zero so the branch cut yields Im in (-pi, pi].
    z[n - 1] = std::log(Complex(-s.real(), -s.imag() + 0.0));
    return normalize(Point(std::move(z)));
  }
  throw Error(ErrorKind::DegenerateDraw,
              "partial exponential sum vanished in 100 consecutive draws");
}

}  // namespace expsum
