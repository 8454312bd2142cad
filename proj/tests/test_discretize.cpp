#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hsdma/discretize.hpp"
#include "hsdma/error.hpp"
#include "support.hpp"

using namespace hsdma;
using namespace hsdma::discretize;
using fixtures::controller;

namespace {

Complex d11(const DiscreteStateSpace& s, Complex z) { return eval_discrete(s, z)(0, 0); }

}  // namespace

TEST_CASE("forward euler") {
  const auto integ = forward_euler(fixtures::integrator(1.0), 0.1);
  CHECK(integ.a()(0, 0) == doctest::Approx(1.0));
  CHECK(integ.b()(0, 0) == doctest::Approx(0.1));
  CHECK(integ.c()(0, 0) == 1.0);
  CHECK(integ.d()(0, 0) == 0.0);

  const auto edge = forward_euler(fixtures::scalar(-1, 1, 1, 0), 2.0);
  CHECK(edge.a()(0, 0) == doctest::Approx(-1.0));
  CHECK_FALSE(is_stable(edge));

  CHECK((forward_euler(controller(), 1e-9).a() - Matrix::Identity(2, 2)).norm() < 1e-7);
}

TEST_CASE("backward euler") {
  CHECK(backward_euler(fixtures::scalar(-1, 1, 1, 0), 1.0).a()(0, 0) == doctest::Approx(0.5));
  for (double h : {0.02, 0.15}) CHECK(is_stable(backward_euler(controller(), h)));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 0.05;
  const auto cd = backward_euler(controller(), h);
  for (int i = 0; i < 30; ++i) {
    const Complex z(u(rng), u(rng));
    const Complex s = (z - 1.0) / (h * z);
    CHECK(fixtures::rel_err(d11(cd, z), response(controller(), s)) < 1e-10);
  }

  const double w = 2.0, small = 1e-6;
  const auto fine = backward_euler(controller(), small);
  CHECK(fixtures::rel_err(d11(fine, std::exp(Complex(0, w * small))),
                          response(controller(), Complex(0, w))) < 1e-4);
}

TEST_CASE("bilinear") {
  const double h = 0.1;
  const auto integ = bilinear(fixtures::integrator(1.0), h);
  CHECK(std::abs(d11(integ, Complex(-1.0, 0.0))) < 1e-15);
  const Complex z(0.3, 0.4);
  CHECK(fixtures::rel_err(d11(integ, z), (h / 2) * (z + 1.0) / (z - 1.0)) < 1e-14);

  // warping identity on the worked example
  const auto cd = bilinear(controller(), 0.02);
  const double w = 1.0;
  const Complex lhs = d11(cd, std::exp(Complex(0, w * 0.02)));
  const Complex rhs = response(controller(), Complex(0, (2 / 0.02) * std::tan(w * 0.02 / 2)));
  CHECK(fixtures::rel_err(lhs, rhs) < 1e-12);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto sys = fixtures::random_stable(rng, 1 + i % 6);
    CHECK(is_stable(bilinear(sys, 0.01 + 0.5 * i)));
  }
}

TEST_CASE("zero-order hold") {
  const auto integ = zoh(fixtures::integrator(1.0), 0.3);
  CHECK(integ.a()(0, 0) == doctest::Approx(1.0));
  CHECK(integ.b()(0, 0) == doctest::Approx(0.3));
  CHECK(zoh(fixtures::scalar(-1, 1, 1, 0), 1.0).a()(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto sys = fixtures::random_stable(rng, 2 + i % 4);
    const double h = 0.05;
    const auto zp = poles(zoh(sys, h)).values;
    for (auto p : poles(sys).values) {
      const Complex want = std::exp(h * p);
      double best = 1e300;
      for (auto q : zp) best = std::min(best, std::abs(q - want));
      CHECK(best < 1e-10);
    }
  }
}

TEST_CASE("exact discretization evaluator") {
  const double h = 0.02;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int i = 0; i < 20; ++i) {
    const double w = u(rng) * std::numbers::pi / h * (i % 2 ? 1 : -1);
    const Complex got = eval_exact_discretization(controller(), h, w)(0, 0);
    CHECK(fixtures::rel_err(got, response(controller(), Complex(0, w))) < 1e-12);
  }
  // principal branch at Nyquist: ln(-1) = +j pi
  const double nyq = std::numbers::pi / h;
  CHECK(fixtures::rel_err(eval_exact_discretization(controller(), h, nyq)(0, 0),
                          response(controller(), Complex(0, nyq))) < 1e-12);
  CHECK_THROWS_AS(eval_exact_discretization(controller(), h, 1.01 * nyq), DomainError);
  CHECK_THROWS_AS(eval_exact_discretization(controller(), h, 0.0), DomainError);
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(bilinear(controller(), 0.0), DomainError);
  CHECK_THROWS_AS(forward_euler(controller(), -1.0), DomainError);
  CHECK_THROWS_AS(backward_euler(fixtures::scalar(1, 1, 1, 0), 1.0), SingularError);
  Matrix e = Matrix::Identity(1, 1) * 2.0;
  ContinuousStateSpace desc(e, Matrix::Constant(1, 1, -1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                            Matrix::Zero(1, 1));
  CHECK_THROWS_AS(zoh(desc, 0.1), DomainError);
  CHECK(parse_method("bilinear") == Method::bilinear);
  CHECK_FALSE(parse_method("tustin").has_value());
}
