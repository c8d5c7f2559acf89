#pragma once

#include <limits>

namespace kreinlab::quadrature {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Integral of x^(-beta) * t^m over [c, d], t = (x - c)/(d - c), 0 <= c < d,
/// m in {0, 1, 2}. Exact: closed-form antiderivatives of u^(k - beta)
/// (logarithmic when k - beta = -1), switching to the convergent binomial
/// series in (d - c)/c on short elements far from the origin where the
/// antiderivative differences cancel. +inf when the integral diverges at c = 0.
double power_moment(double c, double d, double beta, int m);

/// Moments of a weight against the quadratic Bernstein basis on [c, d]:
/// b0 = int w (1-t)^2, b1 = int w t(1-t), b2 = int w t^2.
struct BernsteinMoments {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

BernsteinMoments power_law_bernstein(double c, double d, double beta);
BernsteinMoments constant_bernstein(double c, double d, double value);

/// Element matrix of int_a^b min(level, coefficient * x^(-beta)) phi_i phi_j
/// for the two P1 hats on [a, b] (left hat = 1 at a), 0 <= a < b. A level of
/// +inf gives the uncut potential; entries that diverge are +inf.
struct ElementBlock {
  double left_left = 0.0;
  double left_right = 0.0;
  double right_right = 0.0;
};

ElementBlock cutoff_power_element(double a, double b, double coefficient, double beta, double level);

/// Radius below which coefficient * x^(-beta) exceeds level (0 for level = inf).
double cutoff_radius(double coefficient, double beta, double level);

}  // namespace kreinlab::quadrature
