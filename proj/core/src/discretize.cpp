#include "hsdma/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "hsdma/error.hpp"
#include "numeric.hpp"

namespace hsdma::discretize {
namespace {

void require_standard(const ContinuousStateSpace& sys, double h, const char* who) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError(std::string(who) + ": h must be positive, got " + std::to_string(h));
  if (!sys.is_standard())
    throw DomainError(std::string(who) + ": descriptor realizations (E != I) are not supported");
}

// LU of I - alpha * A; throws when singular.
Eigen::PartialPivLU<Matrix> shifted_lu(const Matrix& a, double alpha, const char* who) {
  const auto n = a.rows();
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - alpha * a);
  if (n > 0 && !(detail::conditioning(lu) > 1e-14))
    throw SingularError(std::string(who) + ": I - " + std::to_string(alpha) +
                        " A is singular");
  return lu;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::forward: return "forward";
    case Method::backward: return "backward";
    case Method::bilinear: return "bilinear";
    case Method::zoh: return "zoh";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "forward") return Method::forward;
  if (name == "backward") return Method::backward;
  if (name == "bilinear") return Method::bilinear;
  if (name == "zoh") return Method::zoh;
  return std::nullopt;
}

DiscreteStateSpace forward_euler(const ContinuousStateSpace& sys, double h) {
  require_standard(sys, h, "forward_euler");
  const auto n = static_cast<Eigen::Index>(sys.order());
  return DiscreteStateSpace(Matrix::Identity(n, n) + h * sys.a(), h * sys.b(), sys.c(),
                            sys.d(), h);
}

DiscreteStateSpace backward_euler(const ContinuousStateSpace& sys, double h) {
  require_standard(sys, h, "backward_euler");
  const auto n = static_cast<Eigen::Index>(sys.order());
  if (n == 0) return DiscreteStateSpace::gain(sys.d(), h);
  const auto lu = shifted_lu(sys.a(), h, "backward_euler");
  Matrix ad = lu.inverse();
  Matrix bd = h * lu.solve(sys.b());
  Matrix cd = sys.c() * ad;
  Matrix dd = sys.d() + sys.c() * bd;
  return DiscreteStateSpace(std::move(ad), std::move(bd), std::move(cd), std::move(dd), h);
}

DiscreteStateSpace bilinear(const ContinuousStateSpace& sys, double h) {
  require_standard(sys, h, "bilinear");
  const auto n = static_cast<Eigen::Index>(sys.order());
  if (n == 0) return DiscreteStateSpace::gain(sys.d(), h);
  const auto lu = shifted_lu(sys.a(), 0.5 * h, "bilinear");
  // M = (I - h/2 A)^{-1}: Ad = M (I + h/2 A), Bd = h M B, Cd = C M, Dd = D + h/2 C M B.
  const Matrix m = lu.inverse();
  Matrix ad = m * (Matrix::Identity(n, n) + 0.5 * h * sys.a());
  Matrix mb = m * sys.b();
  Matrix bd = h * mb;
  Matrix cd = sys.c() * m;
  Matrix dd = sys.d() + 0.5 * h * sys.c() * mb;
  return DiscreteStateSpace(std::move(ad), std::move(bd), std::move(cd), std::move(dd), h);
}

DiscreteStateSpace zoh(const ContinuousStateSpace& sys, double h) {
  require_standard(sys, h, "zoh");
  const auto n = static_cast<Eigen::Index>(sys.order());
  const auto m = static_cast<Eigen::Index>(sys.n_inputs());
  if (n == 0) return DiscreteStateSpace::gain(sys.d(), h);
  // exp([[A, B], [0, 0]] h) = [[Ad, Bd], [0, I]]
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = sys.a() * h;
  aug.topRightCorner(n, m) = sys.b() * h;
  const Matrix ex = aug.exp();
  return DiscreteStateSpace(ex.topLeftCorner(n, n), ex.topRightCorner(n, m), sys.c(),
                            sys.d(), h);
}

DiscreteStateSpace apply(Method m, const ContinuousStateSpace& sys, double h) {
  switch (m) {
    case Method::forward: return forward_euler(sys, h);
    case Method::backward: return backward_euler(sys, h);
    case Method::bilinear: return bilinear(sys, h);
    case Method::zoh: return zoh(sys, h);
  }
  throw DomainError("unknown discretization method");
}

CMatrix eval_exact_discretization(const ContinuousStateSpace& sys, double h, double omega) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const double nyquist = std::numbers::pi / h;
  if (omega == 0.0 || !std::isfinite(omega) || std::abs(omega) > nyquist * (1.0 + 1e-12))
    throw DomainError("omega = " + std::to_string(omega) +
                      " is outside the principal band 0 < |omega| <= pi/h = " +
                      std::to_string(nyquist));
  const double theta = std::clamp(omega * h, -std::numbers::pi, std::numbers::pi);
  const Complex z = std::exp(Complex(0.0, theta));
  Complex log_z = std::log(z);
  // Principal branch: Arg lies in (-pi, pi], so z = -1 maps to +j pi.
  if (log_z.imag() <= -std::numbers::pi + 1e-14) log_z.imag(std::numbers::pi);
  return eval_continuous(sys, log_z / h);
}

}  // namespace hsdma::discretize
