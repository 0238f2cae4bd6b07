#pragma once

// Multi-start projected-gradient minimization of the diagonal distance over A.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "expsum/errors.hpp"
#include "expsum/geometry.hpp"
#include "expsum/numeric.hpp"
#include "expsum/variety.hpp"

namespace expsum {

struct SolveConfig {
  std::size_t n = 2;
  std::size_t starts = 64;
  std::uint64_t seed = 0;
  double step0 = 0.1;
  double tol_grad = 1e-10;
  double tol_feas = -1.0;  // negative selects 1e-12 * n
  std::size_t max_iter = 10000;
  double scale = -1.0;       // negative selects 2 + log n
  std::size_t threads = 0;   // 0 selects hardware concurrency

  double feasibility_tol() const {
    return tol_feas > 0.0 ? tol_feas : 1e-12 * static_cast<double>(n);
  }
  double start_scale() const {
    return scale >= 0.0 ? scale : 2.0 + std::log(static_cast<double>(n));
  }
  void validate() const {
    if (n < 2) throw Error(ErrorKind::DimensionTooSmall, "n must be ≥ 2");
    if (starts < 1) throw Error(ErrorKind::InvalidPoint, "starts must be ≥ 1");
    if (!(step0 > 0.0) || !(tol_grad > 0.0) || tol_feas == 0.0 || max_iter < 1) {
      throw Error(ErrorKind::InvalidPoint, "step and tolerances must be positive");
    }
  }
};

struct SolveResult {
  Point point;
  double dist2 = 0.0;
  double feas_residual = 0.0;
  double proj_grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t start_index = 0;
};

/// Half the Euclidean gradient of dist2 (g_j = z_j - mean) with its component
/// along the complex normal conj(e^z) removed. The real tangent space of A is
/// {v : sum_j e^{z_j} v_j = 0}; the real gradients of Re F and Im F are
/// conj(e^z) and i conj(e^z), so the projection is a single complex one.
inline std::vector<Complex> tangent_gradient(const Point& p) {
  const Complex mean = coordinate_mean(p);
  const Residual r = residual(p);
  std::vector<Complex> g(p.n());
  ComplexSum inner;
  CompensatedSum c2;
  for (std::size_t j = 0; j < p.n(); ++j) {
    g[j] = p[j] - mean;
    inner.add(r.grad[j] * g[j]);
    c2.add(norm2(r.grad[j]));
  }
  const Complex coeff = inner.value() / c2.value();
  for (std::size_t j = 0; j < p.n(); ++j) g[j] -= std::conj(r.grad[j]) * coeff;
  return g;
}

/// Norm of the tangent-projected distance gradient.
inline double stationarity(const Point& p) {
  CompensatedSum s;
  for (const Complex& g : tangent_gradient(p)) s.add(norm2(g));
  return std::sqrt(s.value());
}

struct StepOutcome {
  Point point;
  double step = 0.0;     // accepted step length
  double dist2 = 0.0;
  double grad_norm = 0.0;  // at the input point
};

/// One Armijo-backtracked step along the negative tangent gradient followed by
/// a Newton retraction. The trial step is halved until dist2 decreases
/// sufficiently; below 1e-16 the step fails with StepUnderflow.
inline StepOutcome descent_step(const Point& p, double step, double tol_feas) {
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-16;
  const std::vector<Complex> g = tangent_gradient(p);
  CompensatedSum g2;
  for (const Complex& v : g) g2.add(norm2(v));
  const double f0 = dist2(p);
  StepOutcome out{p, 0.0, f0, std::sqrt(g2.value())};
  if (g2.value() == 0.0) return out;

  // dist2 is evaluated to a few ulps; ignore differences below that.
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + f0);
  std::vector<Complex> z(p.n());
  for (double t = step; t >= kMinStep; t *= 0.5) {
    for (std::size_t j = 0; j < p.n(); ++j) z[j] = p[j] - t * g[j];
    Point trial;
    try {
      trial = retract(Point(z), tol_feas, 50);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoConvergence || e.kind() == ErrorKind::Overflow) continue;
      throw;
    }
    const double f = dist2(trial);
    // dist2 has gradient 2g, so the directional derivative along -g is -2|g|^2.
    if (f <= f0 - kArmijo * 2.0 * t * g2.value() + noise) {
      out.point = std::move(trial);
      out.step = t;
      out.dist2 = f;
      return out;
    }
  }
  throw Error(ErrorKind::StepUnderflow, "backtracking reduced the step below 1e-16");
}

inline Point projected_gradient_step(const Point& p, double step, double tol_feas = -1.0) {
  if (tol_feas <= 0.0) tol_feas = 1e-12 * static_cast<double>(p.n());
  return descent_step(p, step, tol_feas).point;
}

namespace detail {

inline Point renormalize(const Point& p, double tol_feas) {
  return retract(normalize(p), tol_feas, 50);
}

inline SolveResult run_start(const SolveConfig& cfg, std::size_t start_index) {
  const double tol_feas = cfg.feasibility_tol();
  SolveResult result;
  result.start_index = start_index;

  Point p = random_feasible(cfg.n, cfg.seed ^ start_index, cfg.start_scale());
  std::size_t iter = 0;
  try {
    p = retract(p, tol_feas, 50);
    for (; iter < cfg.max_iter; ++iter) {
      if (iter > 0 && iter % 100 == 0) p = renormalize(p, tol_feas);
      if (stationarity(p) <= cfg.tol_grad) {
        // A stationary point may still sit on a farther 2*pi*i branch.
        const Point q = renormalize(p, tol_feas);
        const double before = dist2(p);
        p = q;
        if (dist2(q) < before - 1e-12 * (1.0 + before)) continue;
        if (stationarity(p) <= cfg.tol_grad) break;
        continue;
      }
      p = descent_step(p, cfg.step0, tol_feas).point;
    }
  } catch (const Error&) {
    // Reported as a non-converged start with the last accepted point.
  }
  try {
    p = renormalize(p, tol_feas);
  } catch (const Error&) {
  }

  result.point = p;
  result.dist2 = dist2(p);
  result.feas_residual = std::abs(residual(p).value);
  result.proj_grad_norm = stationarity(p);
  result.iterations = iter;
  result.converged = result.feas_residual <= tol_feas && result.proj_grad_norm <= cfg.tol_grad;
  return result;
}

}  // namespace detail

/// Runs every start (in parallel when cfg.threads != 1) and returns the
/// results ordered by (dist2, start_index). Output does not depend on the
/// thread count.
inline std::vector<SolveResult> solve(const SolveConfig& cfg) {
  cfg.validate();
  std::vector<SolveResult> results(cfg.starts);
  std::size_t threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.starts);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.starts; i = next++) {
      results[i] = detail::run_start(cfg, i);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::sort(results.begin(), results.end(), [](const SolveResult& x, const SolveResult& y) {
    if (x.dist2 != y.dist2) return x.dist2 < y.dist2;
    return x.start_index < y.start_index;
  });
  return results;
}

struct SecondOrderReport {
  double min_eigenvalue = 0.0;
  std::vector<double> eigenvalues;  // ascending
  std::size_t tangent_dim = 0;
};

/// Orthonormal basis (columns, in R^{2n} with z_j -> (Re, Im) interleaved) of
/// the real tangent space of A at p.
inline Eigen::MatrixXd tangent_basis(const Point& p) {
  const std::size_t n = p.n();
  const Residual r = residual(p);
  Eigen::MatrixXd normals(2 * n, 2);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex c = std::conj(r.grad[j]);
    normals(2 * j, 0) = c.real();
    normals(2 * j + 1, 0) = c.imag();
    normals(2 * j, 1) = -c.imag();
    normals(2 * j + 1, 1) = c.real();
  }
  if (normals.col(0).norm() < 1e-300) {
    throw Error(ErrorKind::IllConditioned, "constraint gradient vanishes");
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(normals);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * n, 2 * n);
  return q.rightCols(2 * n - 2);
}

namespace detail {

// Newton retraction run to the rounding floor, for finite differences.
inline Point retract_tight(const Point& p) {
  const Residual r = residual(p);
  CompensatedSum scale;
  for (const Complex& e : r.grad) scale.add(std::abs(e));
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * scale.value();
  std::vector<Complex> z(p.coords());
  double last = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 20; ++iter) {
    const Residual rq = residual(Point(z));
    const double size = std::abs(rq.value);
    if (size <= floor || size >= last) break;
    last = size;
    CompensatedSum g2;
    for (const Complex& e : rq.grad) g2.add(norm2(e));
    const Complex coeff = rq.value / g2.value();
    for (std::size_t j = 0; j < z.size(); ++j) z[j] -= coeff * std::conj(rq.grad[j]);
  }
  return Point(std::move(z));
}

inline Point offset(const Point& p, const Eigen::VectorXd& v) {
  std::vector<Complex> z(p.coords());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] += Complex(v(2 * j), v(2 * j + 1));
  return Point(std::move(z));
}

}  // namespace detail

/// Reduced Hessian of dist2 on A by central differences of dist2 after
/// retraction, H_uv = [f(+u+v) - f(+u-v) - f(-u+v) + f(-u-v)] / (4h^2) over an
/// orthonormal tangent basis, symmetrized; returns its spectrum.
inline SecondOrderReport second_order_report(const Point& p, double h = 1e-4) {
  const Eigen::MatrixXd basis = tangent_basis(p);
  const Eigen::Index m = basis.cols();
  auto f = [&](const Eigen::VectorXd& v) {
    return dist2(detail::retract_tight(detail::offset(p, v)));
  };
  Eigen::MatrixXd hess(m, m);
  for (Eigen::Index u = 0; u < m; ++u) {
    for (Eigen::Index v = u; v < m; ++v) {
      const Eigen::VectorXd plus = h * (basis.col(u) + basis.col(v));
      const Eigen::VectorXd minus = h * (basis.col(u) - basis.col(v));
      const double value = (f(plus) - f(minus) - f(-minus) + f(-plus)) / (4.0 * h * h);
      hess(u, v) = value;
      hess(v, u) = value;
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
  SecondOrderReport report;
  report.tangent_dim = static_cast<std::size_t>(m);
  report.eigenvalues.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + m);
  report.min_eigenvalue = report.eigenvalues.front();
  return report;
}

/// Smallest eigenvalue of the reduced Hessian of dist2 at p.
inline double second_order_check(const Point& p, double h = 1e-4) {
  return second_order_report(p, h).min_eigenvalue;
}

}  // namespace expsum
