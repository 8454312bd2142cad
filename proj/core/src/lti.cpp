#include "hsdma/lti.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "hsdma/error.hpp"
#include "numeric.hpp"

namespace hsdma {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_dims(const Matrix& e, const Matrix& a, const Matrix& b, const Matrix& c,
                const Matrix& d) {
  const auto n = a.rows();
  if (a.cols() != n) throw DimensionError("A must be square, got " + shape(a));
  if (e.rows() != n || e.cols() != n)
    throw DimensionError("E must be " + shape(a) + ", got " + shape(e));
  if (b.rows() != n)
    throw DimensionError("B must have " + std::to_string(n) + " rows, got " + shape(b));
  if (c.cols() != n)
    throw DimensionError("C must have " + std::to_string(n) + " columns, got " + shape(c));
  if (d.rows() != c.rows() || d.cols() != b.cols())
    throw DimensionError("D must be " + std::to_string(c.rows()) + "x" +
                         std::to_string(b.cols()) + ", got " + shape(d));
  if (!e.allFinite() || !a.allFinite() || !b.allFinite() || !c.allFinite() ||
      !d.allFinite())
    throw DomainError("realization contains non-finite entries");
}

// det(sE - A) must not vanish identically; probe a few shifts scaled to the
// spectrum size.
void check_regular(const Matrix& e, const Matrix& a) {
  if (a.rows() == 0) return;
  const double scale = std::max(1.0, a.norm() / std::max(e.norm(), 1e-300));
  const Complex probes[] = {{0.37, 1.13}, {-0.81, 0.29}, {1.71, -2.03}};
  for (const Complex& p : probes) {
    const CMatrix pencil = (p * scale) * e.cast<Complex>() - a.cast<Complex>();
    Eigen::PartialPivLU<CMatrix> lu(pencil);
    if (detail::conditioning(lu) > 1e-14) return;
  }
  throw NumericalError("pencil (A, E) is singular: det(sE - A) vanishes at every probe");
}

CMatrix solve_response(const CMatrix& pencil, const Matrix& b, const Matrix& c,
                       const Matrix& d, const EvalOptions& opts, const char* what,
                       const char* var, Complex at) {
  CMatrix out = d.cast<Complex>();
  if (pencil.rows() == 0) return out;
  Eigen::PartialPivLU<CMatrix> lu(pencil);
  const double rc = detail::conditioning(lu);
  if (!(rc >= opts.min_rcond)) {
    throw SingularError(std::string(what) + " is singular at " + var + " = (" +
                        std::to_string(at.real()) + ", " + std::to_string(at.imag()) +
                        "), rcond = " + std::to_string(rc));
  }
  out.noalias() += c.cast<Complex>() * lu.solve(b.cast<Complex>());
  return out;
}

}  // namespace

ContinuousStateSpace::ContinuousStateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : e_(Matrix::Identity(a.rows(), a.rows())), a_(std::move(a)), b_(std::move(b)),
      c_(std::move(c)), d_(std::move(d)) {
  check_dims(e_, a_, b_, c_, d_);
  standard_ = true;
}

ContinuousStateSpace::ContinuousStateSpace(Matrix e, Matrix a, Matrix b, Matrix c,
                                           Matrix d)
    : e_(std::move(e)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)),
      d_(std::move(d)) {
  check_dims(e_, a_, b_, c_, d_);
  standard_ = e_.isIdentity(0.0);
  if (!standard_) check_regular(e_, a_);
}

ContinuousStateSpace ContinuousStateSpace::gain(const Matrix& d) {
  return ContinuousStateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

DiscreteStateSpace::DiscreteStateSpace(Matrix a, Matrix b, Matrix c, Matrix d, double h)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), h_(h) {
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw DomainError("sampling period h must be positive, got " + std::to_string(h_));
  check_dims(Matrix::Identity(a_.rows(), a_.rows()), a_, b_, c_, d_);
}

DiscreteStateSpace DiscreteStateSpace::gain(const Matrix& d, double h) {
  return DiscreteStateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d, h);
}

CMatrix eval_continuous(const ContinuousStateSpace& sys, Complex s,
                        const EvalOptions& opts) {
  const CMatrix pencil = s * sys.e().cast<Complex>() - sys.a().cast<Complex>();
  return solve_response(pencil, sys.b(), sys.c(), sys.d(), opts, "sE - A", "s", s);
}

CMatrix eval_discrete(const DiscreteStateSpace& sys, Complex z, const EvalOptions& opts) {
  CMatrix pencil = -sys.a().cast<Complex>();
  pencil.diagonal().array() += z;
  return solve_response(pencil, sys.b(), sys.c(), sys.d(), opts, "zI - Ad", "z", z);
}

Complex response(const ContinuousStateSpace& sys, Complex s) {
  return eval_continuous(sys, s)(0, 0);
}

PoleSet poles(const ContinuousStateSpace& sys) {
  PoleSet out;
  if (sys.order() == 0) return out;
  if (sys.is_standard()) {
    Eigen::EigenSolver<Matrix> es(sys.a(), false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      out.values.push_back(es.eigenvalues()[i]);
    return out;
  }
  Eigen::GeneralizedEigenSolver<Matrix> ges(sys.a(), sys.e(), false);
  if (ges.info() != Eigen::Success)
    throw NumericalError("generalized eigenvalue solver (QZ) failed");
  // QZ backward error is of order eps * ||E||; a beta below that is zero.
  const double beta_floor =
      100.0 * std::numeric_limits<double>::epsilon() * std::max(sys.e().norm(), 1e-300);
  for (Eigen::Index i = 0; i < ges.betas().size(); ++i) {
    const double beta = ges.betas()[i];
    if (std::abs(beta) <= beta_floor) {
      ++out.infinite;
    } else {
      out.values.push_back(ges.alphas()[i] / beta);
    }
  }
  return out;
}

PoleSet poles(const DiscreteStateSpace& sys) {
  PoleSet out;
  if (sys.order() == 0) return out;
  Eigen::EigenSolver<Matrix> es(sys.a(), false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out.values.push_back(es.eigenvalues()[i]);
  return out;
}

bool is_stable(const ContinuousStateSpace& sys, double margin) {
  for (const Complex& p : poles(sys).values)
    if (!(p.real() < -margin)) return false;
  return true;
}

bool is_stable(const DiscreteStateSpace& sys, double margin) {
  for (const Complex& p : poles(sys).values)
    if (!(std::abs(p) < 1.0 - margin)) return false;
  return true;
}

ContinuousStateSpace series(const ContinuousStateSpace& g, const ContinuousStateSpace& k) {
  if (g.n_outputs() != k.n_inputs())
    throw DimensionError("series: g has " + std::to_string(g.n_outputs()) +
                         " outputs but k has " + std::to_string(k.n_inputs()) + " inputs");
  const auto ng = static_cast<Eigen::Index>(g.order());
  const auto nk = static_cast<Eigen::Index>(k.order());
  const auto n = ng + nk;

  Matrix e = Matrix::Zero(n, n);
  e.topLeftCorner(ng, ng) = g.e();
  e.bottomRightCorner(nk, nk) = k.e();

  Matrix a = Matrix::Zero(n, n);
  a.topLeftCorner(ng, ng) = g.a();
  a.bottomLeftCorner(nk, ng) = k.b() * g.c();
  a.bottomRightCorner(nk, nk) = k.a();

  Matrix b(n, g.n_inputs());
  b.topRows(ng) = g.b();
  b.bottomRows(nk) = k.b() * g.d();

  Matrix c(k.n_outputs(), n);
  c.leftCols(ng) = k.d() * g.c();
  c.rightCols(nk) = k.c();

  Matrix d = k.d() * g.d();
  if (g.is_standard() && k.is_standard())
    return ContinuousStateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
  return ContinuousStateSpace(std::move(e), std::move(a), std::move(b), std::move(c),
                              std::move(d));
}

ContinuousStateSpace feedback(const ContinuousStateSpace& open_loop) {
  if (open_loop.n_inputs() != open_loop.n_outputs())
    throw DimensionError("feedback: loop must be square");
  const auto m = static_cast<Eigen::Index>(open_loop.n_outputs());
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(m, m) + open_loop.d());
  if (m > 0 && !(detail::conditioning(lu) > 1e-14))
    throw SingularError("feedback: I + D is singular (algebraic loop)");
  const Matrix f = lu.inverse();
  Matrix a = open_loop.a() - open_loop.b() * f * open_loop.c();
  Matrix b = open_loop.b() * f;
  Matrix c = f * open_loop.c();
  Matrix d = f * open_loop.d();
  if (open_loop.is_standard())
    return ContinuousStateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
  return ContinuousStateSpace(open_loop.e(), std::move(a), std::move(b), std::move(c),
                              std::move(d));
}

}  // namespace hsdma
