#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "hsdma/error.hpp"
#include "hsdma/margin.hpp"
#include "support.hpp"

using namespace hsdma;
using namespace hsdma::margin;

TEST_CASE("integrator crossovers") {
  SweepOptions o;
  o.omega_min = 0.01;
  o.omega_max = 100;
  auto w = gain_crossovers(fixtures::integrator(1.0), o);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-9));
  w = gain_crossovers(fixtures::integrator(10.0), o);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("delay margin of k/s") {
  for (double k : {0.1, 1.0, 10.0}) {
    const auto r = delay_margin(fixtures::integrator(k));
    CHECK(r.stable_nominal);
    CHECK(std::abs(r.delay_margin - std::numbers::pi / (2 * k)) <= 1e-9 * std::numbers::pi / (2 * k));
  }
}

TEST_CASE("worked example continuous loop") {
  const auto loop = loop_transfer(fixtures::plant(), fixtures::controller());
  CHECK(loop.order() == 4);
  const auto r = delay_margin(loop);
  CHECK(r.stable_nominal);
  REQUIRE(r.crossovers.size() == 1);
  // frozen from an independent prototype
  CHECK(r.crossovers[0].omega == doctest::Approx(3.51360).epsilon(1e-5));
  CHECK(r.crossovers[0].phase_margin == doctest::Approx(1.14327).epsilon(1e-5));
  CHECK(std::abs(r.delay_margin - 0.325384) < 1e-5);
  for (const auto& c : r.crossovers)
    CHECK(std::abs(std::abs(response(loop, Complex(0, c.omega))) - 1.0) <= 1e-9);
  CHECK_FALSE(r.crossovers[0].above_nyquist);
}

TEST_CASE("identity controller leaves the plant loop") {
  const auto one = ContinuousStateSpace::gain(Matrix::Identity(1, 1));
  const auto l = loop_transfer(fixtures::plant(), one);
  CHECK(response(l, Complex(0.2, 1.0)) == response(fixtures::plant(), Complex(0.2, 1.0)));
}

TEST_CASE("pure delay below the margin keeps every phase margin positive") {
  const auto loop = loop_transfer(fixtures::plant(), fixtures::controller());
  const auto r = delay_margin(loop);
  for (double frac : {0.0, 0.5, 0.99}) {
    const double tau = frac * r.delay_margin;
    for (const auto& c : r.crossovers) {
      const Complex l = response(loop, Complex(0, c.omega)) * std::exp(Complex(0, -c.omega * tau));
      CHECK(phase_margin_of(l) > 0.0);
    }
  }
  const auto& c = r.crossovers[0];
  const Complex at =
      response(loop, Complex(0, c.omega)) * std::exp(Complex(0, -c.omega * r.delay_margin));
  CHECK(std::abs(phase_margin_of(at)) < 1e-9);
}

TEST_CASE("margin is continuous in loop gain") {
  const auto loop = loop_transfer(fixtures::plant(), fixtures::controller());
  const double base = delay_margin(loop).delay_margin;
  for (double alpha : {0.99, 1.01}) {
    const auto scaled = series(loop, ContinuousStateSpace::gain(Matrix::Constant(1, 1, alpha)));
    CHECK(std::abs(delay_margin(scaled).delay_margin - base) < 5e-3);
  }
}

TEST_CASE("gain margin of k/(s+1)^3") {
  // phase crossover at sqrt(3), |L| = k/8 there
  Matrix a(3, 3);
  a << -1, 0, 0, 1, -1, 0, 0, 1, -1;
  Matrix b = Matrix::Zero(3, 1);
  b(0) = 1;
  Matrix c = Matrix::Zero(1, 3);
  c(2) = 2.0;
  const auto r = delay_margin(ContinuousStateSpace(a, b, c, Matrix::Zero(1, 1)));
  REQUIRE(r.gain_margins.size() == 1);
  CHECK(r.gain_margins[0].omega == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(r.gain_margins[0].margin == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(std::isfinite(r.delay_margin));
}

TEST_CASE("unstable nominal loop reports zero") {
  // L = 0.5/(s-1): closed-loop pole at +0.5
  const auto r = delay_margin(fixtures::scalar(1, 1, 0.5, 0));
  CHECK_FALSE(r.stable_nominal);
  CHECK(r.delay_margin == 0.0);
  MarginOptions forced;
  forced.nominal_stable = true;
  CHECK(delay_margin(fixtures::scalar(-1, 1, 2, 0), forced).stable_nominal);
}

TEST_CASE("no crossover is +inf") {
  const auto r = delay_margin(fixtures::scalar(-1, 1, 0.1, 0));
  CHECK(r.crossovers.empty());
  CHECK(std::isinf(r.delay_margin));
}

TEST_CASE("sweep that lands on a pole names the frequency") {
  Matrix a(2, 2);
  a << 0, 1, -4, 0;
  ContinuousStateSpace osc(a, Matrix::Identity(2, 1), Matrix::Ones(1, 2), Matrix::Zero(1, 1));
  SweepOptions o;
  o.omega_min = 2.0;
  try {
    gain_crossovers(osc, o);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("omega = 2") != std::string::npos);
  }
}

TEST_CASE("crossovers above nyquist are flagged") {
  MarginOptions o;
  o.sweep.nyquist = 0.5;
  const auto r = delay_margin(fixtures::integrator(1.0), o);
  REQUIRE(r.crossovers.size() == 1);
  CHECK(r.crossovers[0].above_nyquist);
}

TEST_CASE("phase margin wrapping") {
  CHECK(phase_margin_of(Complex(-1, 0)) == doctest::Approx(0.0));
  CHECK(phase_margin_of(Complex(0, -1)) == doctest::Approx(std::numbers::pi / 2));
  CHECK(phase_margin_of(Complex(1, 0)) == doctest::Approx(std::numbers::pi));
  CHECK(phase_margin_of(Complex(-1, -1e-9)) > 0.0);
  CHECK(phase_margin_of(Complex(-1, 1e-9)) < 0.0);
}

TEST_CASE("mimo loops are rejected") {
  CHECK_THROWS_AS(delay_margin(ContinuousStateSpace::gain(Matrix::Identity(2, 2))), DimensionError);
}
