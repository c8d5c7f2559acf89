#include "kreinlab/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "kreinlab/errors.hpp"

namespace kreinlab::quadrature {

namespace {

// int_1^{1+r} u^p du
double power_integral(double p, double r) {
  const double q = p + 1.0;
  const double l = std::log1p(r);
  if (q == 0.0) return l;
  return std::expm1(q * l) / q;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * double(n - k + i) / double(i);
  return out;
}

}  // namespace

double power_moment(double c, double d, double beta, int m) {
  if (m < 0 || m > 2) throw ValidationError("m", "moment order must be 0, 1 or 2");
  if (!(c >= 0.0) || !(d > c)) throw ValidationError("interval", "need 0 <= c < d");
  if (c == 0.0) {
    const double e = double(m) + 1.0 - beta;
    return e > 0.0 ? std::pow(d, 1.0 - beta) / e : kInfinity;
  }
  const double h = d - c;
  const double r = h / c;
  const double prefactor = h * std::pow(c, -beta);
  if (r <= 0.5) {
    // sum_j binom(-beta, j) r^j / (m + j + 1)
    double sum = 0.0;
    double coeff = 1.0;
    double rj = 1.0;
    for (int j = 0; j < 400; ++j) {
      const double term = coeff * rj / double(m + j + 1);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum) && j > 2) break;
      coeff *= (-beta - double(j)) / double(j + 1);
      rj *= r;
    }
    return prefactor * sum;
  }
  // r^{-m-1} int_1^{1+r} u^{-beta} (u - 1)^m du
  double sum = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binomial(m, k) * power_integral(double(k) - beta, r);
  }
  return prefactor * sum / std::pow(r, double(m + 1));
}

BernsteinMoments power_law_bernstein(double c, double d, double beta) {
  if (c == 0.0) {
    const double s = std::pow(d, 1.0 - beta);
    BernsteinMoments out;
    out.b2 = s / (3.0 - beta);
    out.b1 = beta < 2.0 ? s / ((2.0 - beta) * (3.0 - beta)) : kInfinity;
    out.b0 = beta < 1.0 ? 2.0 * s / ((1.0 - beta) * (2.0 - beta) * (3.0 - beta)) : kInfinity;
    return out;
  }
  const double mu0 = power_moment(c, d, beta, 0);
  const double mu1 = power_moment(c, d, beta, 1);
  const double mu2 = power_moment(c, d, beta, 2);
  return {mu0 - 2.0 * mu1 + mu2, mu1 - mu2, mu2};
}

BernsteinMoments constant_bernstein(double c, double d, double value) {
  const double l = d - c;
  return {value * l / 3.0, value * l / 6.0, value * l / 3.0};
}

double cutoff_radius(double coefficient, double beta, double level) {
  if (std::isinf(level)) return 0.0;
  if (coefficient <= 0.0) return 0.0;
  return std::pow(coefficient / level, 1.0 / beta);
}

ElementBlock cutoff_power_element(double a, double b, double coefficient, double beta, double level) {
  if (!(a >= 0.0) || !(b > a)) throw ValidationError("element", "need 0 <= a < b");
  if (!(level > 0.0)) throw ValidationError("level", "cut-off level must be > 0");
  ElementBlock out;
  if (coefficient == 0.0) return out;
  const double h = b - a;
  const double xc = cutoff_radius(coefficient, beta, level);

  auto add_piece = [&](double c, double d, const BernsteinMoments& mom) {
    // hats restricted to [c, d]: phi = p (1 - t) + q t
    const double p_left = c == a ? 1.0 : (b - c) / h;
    const double p_right = c == a ? 0.0 : (c - a) / h;
    const double q_left = d == b ? 0.0 : (b - d) / h;
    const double q_right = d == b ? 1.0 : (d - a) / h;
    auto entry = [&](double pi, double qi, double pj, double qj) {
      double v = 0.0;
      if (pi * pj != 0.0) v += pi * pj * mom.b0;
      if (pi * qj + qi * pj != 0.0) v += (pi * qj + qi * pj) * mom.b1;
      if (qi * qj != 0.0) v += qi * qj * mom.b2;
      return v;
    };
    out.left_left += entry(p_left, q_left, p_left, q_left);
    out.left_right += entry(p_left, q_left, p_right, q_right);
    out.right_right += entry(p_right, q_right, p_right, q_right);
  };

  if (xc > a) {
    const double e = std::min(b, xc);
    add_piece(a, e, constant_bernstein(a, e, level));
    if (e < b) {
      BernsteinMoments mom = power_law_bernstein(e, b, beta);
      mom.b0 *= coefficient;
      mom.b1 *= coefficient;
      mom.b2 *= coefficient;
      add_piece(e, b, mom);
    }
  } else {
    BernsteinMoments mom = power_law_bernstein(a, b, beta);
    mom.b0 *= coefficient;
    mom.b1 *= coefficient;
    mom.b2 *= coefficient;
    add_piece(a, b, mom);
  }
  return out;
}

}  // namespace kreinlab::quadrature
