#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hsdma/hybrid_sim.hpp"
#include "hsdma/lti.hpp"

namespace fixtures {

using hsdma::Complex;
using hsdma::ContinuousStateSpace;
using hsdma::DiscreteStateSpace;
using hsdma::Matrix;

// 1 / (s^2 + 10 s + 20)
inline ContinuousStateSpace plant() {
  Matrix a(2, 2), b(2, 1), c(1, 2), d(1, 1);
  a << -10, -5, 4, 0;
  b << 0.5, 0;
  c << 0, 0.5;
  d << 0;
  return {a, b, c, d};
}

inline ContinuousStateSpace controller(double a12 = 7.854) {
  Matrix a(2, 2), b(2, 1), c(1, 2), d(1, 1);
  a << -0.001, a12, 0, -62.83;
  b << 0, 8;
  c << 70, 235.6;
  d << 0;
  return {a, b, c, d};
}

inline ContinuousStateSpace scalar(double a, double b, double c, double d) {
  return {Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, c),
          Matrix::Constant(1, 1, d)};
}

// k / s
inline ContinuousStateSpace integrator(double k) { return scalar(0.0, 1.0, k, 0.0); }

inline double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Random real Hurwitz system of McMillan degree `order` with real poles in
/// [-pole_max, -pole_min] and complex pairs with moduli in the same range.
inline ContinuousStateSpace random_stable(std::mt19937_64& rng, int order, int n_in = 1,
                                          int n_out = 1, bool feedthrough = false,
                                          double pole_min = 0.2, double pole_max = 20.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  auto log_uniform = [&] { return pole_min * std::pow(pole_max / pole_min, unit(rng)); };
  Matrix a = Matrix::Zero(order, order);
  int i = 0;
  while (i < order) {
    if (i + 1 < order && unit(rng) < 0.6) {
      const double mod = log_uniform();
      const double angle = (0.1 + 0.8 * unit(rng)) * std::numbers::pi / 2;
      const double re = -mod * std::cos(angle), im = mod * std::sin(angle);
      a(i, i) = re;
      a(i, i + 1) = im;
      a(i + 1, i) = -im;
      a(i + 1, i + 1) = re;
      i += 2;
    } else {
      a(i, i) = -log_uniform();
      i += 1;
    }
  }
  Matrix b(order, n_in), c(n_out, order), d = Matrix::Zero(n_out, n_in);
  for (int r = 0; r < order; ++r)
    for (int k = 0; k < n_in; ++k) b(r, k) = 0.5 + unit(rng) * (unit(rng) < 0.5 ? -1 : 1);
  for (int r = 0; r < n_out; ++r)
    for (int k = 0; k < order; ++k) c(r, k) = sym(rng);
  if (feedthrough)
    for (int r = 0; r < n_out; ++r)
      for (int k = 0; k < n_in; ++k) d(r, k) = sym(rng);
  return {a, b, c, d};
}

/// Transport delay at which the exactly lifted sampled-data loop loses
/// stability (bisection on the spectral radius), 0 if unstable at 0.
inline double lifted_critical_delay(const ContinuousStateSpace& plant,
                                    const DiscreteStateSpace& ctrl, double hi = 1.0) {
  if (!hsdma::sim::sampled_data_stable(plant, ctrl, 0.0)) return 0.0;
  double lo = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hsdma::sim::sampled_data_stable(plant, ctrl, mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace fixtures
