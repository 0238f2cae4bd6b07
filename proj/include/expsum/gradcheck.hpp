#pragma once

// Central-difference checks of the analytic derivatives used by the solver,
// and of the first-order projection property of the Newton retraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "expsum/geometry.hpp"
#include "expsum/numeric.hpp"
#include "expsum/variety.hpp"

namespace expsum {

struct GradCheckSummary {
  double max_constraint_error = 0.0;
  double max_distance_error = 0.0;
  double max_retraction_ratio = 0.0;  // |q - p| |grad F| / |F(p)|, should be near 1
  std::size_t points = 0;
  std::string worst;                  // description of the worst entry

  double max_error() const { return std::max(max_constraint_error, max_distance_error); }
};

struct GradCheckOptions {
  double fd_step = 1e-6;
  double retraction_offset = 1e-3;
  std::uint64_t seed = 0;
};

namespace detail {

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

inline Point bump(const Point& p, std::size_t j, Complex delta) {
  std::vector<Complex> z(p.coords());
  z[j] += delta;
  return Point(std::move(z));
}

}  // namespace detail

/// Compares, at every point and for each coordinate direction (real and
/// imaginary), the analytic gradients of Re F, Im F and dist2 with central
/// differences. Also perturbs each point by a random offset and checks the
/// retraction moves it no farther than a first-order projection would.
/// Throws Overflow when a point is outside the representable range of exp.
inline GradCheckSummary gradient_check(const std::vector<Point>& points,
                                       const GradCheckOptions& opts = {}) {
  GradCheckSummary summary;
  const double h = opts.fd_step;
  double worst_total = -1.0;
  auto note = [&](double err, const std::string& what) {
    if (err > worst_total) {
      worst_total = err;
      summary.worst = what + " rel err " + std::to_string(err);
    }
  };

  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const Point& p = points[idx];
    const Residual r = residual(p);
    const DiagonalProjection proj = diagonal_projection(p);
    for (std::size_t j = 0; j < p.n(); ++j) {
      const Complex directions[2] = {Complex(h, 0.0), Complex(0.0, h)};
      for (int dir = 0; dir < 2; ++dir) {
        const Complex step = directions[dir];
        const Complex dF = (residual(detail::bump(p, j, step)).value -
                            residual(detail::bump(p, j, -step)).value) /
                           (2.0 * h);
        // dF along the unit direction u is e^{z_j} u.
        const Complex unit = step / h;
        const Complex analytic = r.grad[j] * unit;
        const double err = std::max(detail::relative_error(analytic.real(), dF.real()),
                                    detail::relative_error(analytic.imag(), dF.imag()));
        summary.max_constraint_error = std::max(summary.max_constraint_error, err);
        note(err, "point " + std::to_string(idx) + " dF/d" + (dir == 0 ? "Re" : "Im") + " z_" +
                      std::to_string(j + 1));

        const double df = (dist2(detail::bump(p, j, step)) - dist2(detail::bump(p, j, -step))) /
                          (2.0 * h);
        const Complex dev = p[j] - proj.mean;
        const double analytic_d = 2.0 * (dir == 0 ? dev.real() : dev.imag());
        const double err_d = detail::relative_error(analytic_d, df);
        summary.max_distance_error = std::max(summary.max_distance_error, err_d);
        note(err_d, "point " + std::to_string(idx) + " d(dist2)/d" + (dir == 0 ? "Re" : "Im") +
                        " z_" + std::to_string(j + 1));
      }
    }

    auto rng = detail::stream_engine(opts.seed, static_cast<std::uint32_t>(idx));
    std::vector<Complex> offset(p.n());
    CompensatedSum norm;
    for (Complex& v : offset) {
      v = Complex(detail::symmetric_unit(rng), detail::symmetric_unit(rng));
      norm.add(norm2(v));
    }
    const double factor = opts.retraction_offset / std::sqrt(norm.value());
    std::vector<Complex> moved(p.coords());
    for (std::size_t j = 0; j < p.n(); ++j) moved[j] += factor * offset[j];
    const Point start(moved);
    const Residual rs = residual(start);
    CompensatedSum g2;
    for (const Complex& e : rs.grad) g2.add(norm2(e));
    const double first_order = std::abs(rs.value) / std::sqrt(g2.value());
    const Point q = retract(start, -1.0, 50);
    CompensatedSum disp;
    for (std::size_t j = 0; j < p.n(); ++j) disp.add(norm2(q[j] - start[j]));
    if (first_order > 0.0) {
      summary.max_retraction_ratio =
          std::max(summary.max_retraction_ratio, std::sqrt(disp.value()) / first_order);
    }
    ++summary.points;
  }
  return summary;
}

/// The default point set: `count` feasible points of dimension n drawn with
/// scale 1 from seeds derived from `seed`.
inline std::vector<Point> gradcheck_points(std::size_t n, std::uint64_t seed, std::size_t count) {
  std::vector<Point> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    points.push_back(random_feasible(n, seed + 0x9E3779B97F4A7C15ULL * (i + 1), 1.0));
  }
  return points;
}

}  // namespace expsum
