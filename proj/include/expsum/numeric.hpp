#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace expsum {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Componentwise compensated accumulator for complex values.
class ComplexSum {
 public:
  void add(Complex x) {
    re_.add(x.real());
    im_.add(x.imag());
  }

  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

/// e^z - 1 without cancellation near z = 0.
inline Complex expm1(Complex z) {
  const double x = z.real();
  const double y = z.imag();
  const double half_sin = std::sin(0.5 * y);
  const double cos_m1 = -2.0 * half_sin * half_sin;
  return {std::expm1(x) * std::cos(y) + cos_m1, std::exp(x) * std::sin(y)};
}

inline double norm2(Complex z) { return std::norm(z); }

}  // namespace expsum
