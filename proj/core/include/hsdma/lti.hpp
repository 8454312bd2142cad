#pragma once

// Continuous (descriptor) and discrete state-space realizations, their
// frequency responses, poles, stability tests and series interconnection.

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hsdma {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Descriptor realization  E x' = A x + B u,  y = C x + D u.
///
/// E defaults to the identity. Order 0 is allowed and describes a pure
/// feedthrough D. Instances are immutable; all members are validated once in
/// the constructor.
class ContinuousStateSpace {
 public:
  ContinuousStateSpace(Matrix a, Matrix b, Matrix c, Matrix d);
  ContinuousStateSpace(Matrix e, Matrix a, Matrix b, Matrix c, Matrix d);

  /// Static gain with no states.
  static ContinuousStateSpace gain(const Matrix& d);

  const Matrix& e() const noexcept { return e_; }
  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  const Matrix& c() const noexcept { return c_; }
  const Matrix& d() const noexcept { return d_; }

  std::size_t order() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t n_inputs() const noexcept { return static_cast<std::size_t>(d_.cols()); }
  std::size_t n_outputs() const noexcept { return static_cast<std::size_t>(d_.rows()); }

  /// True when E is exactly the identity (classical state space).
  bool is_standard() const noexcept { return standard_; }

 private:
  Matrix e_, a_, b_, c_, d_;
  bool standard_;
};

/// x[k+1] = Ad x[k] + Bd u[k],  y[k] = Cd x[k] + Dd u[k], sampled every h seconds.
class DiscreteStateSpace {
 public:
  DiscreteStateSpace(Matrix a, Matrix b, Matrix c, Matrix d, double h);

  static DiscreteStateSpace gain(const Matrix& d, double h);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  const Matrix& c() const noexcept { return c_; }
  const Matrix& d() const noexcept { return d_; }
  double h() const noexcept { return h_; }

  std::size_t order() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t n_inputs() const noexcept { return static_cast<std::size_t>(d_.cols()); }
  std::size_t n_outputs() const noexcept { return static_cast<std::size_t>(d_.rows()); }

 private:
  Matrix a_, b_, c_, d_;
  double h_;
};

/// Finite poles plus the number of infinite generalized eigenvalues (singular E).
struct PoleSet {
  std::vector<Complex> values;
  std::size_t infinite = 0;
};

struct EvalOptions {
  /// sE - A is declared singular when the LU reciprocal condition estimate
  /// falls below this.
  double min_rcond = 1e-15;
};

CMatrix eval_continuous(const ContinuousStateSpace& sys, Complex s,
                        const EvalOptions& opts = {});
CMatrix eval_discrete(const DiscreteStateSpace& sys, Complex z,
                      const EvalOptions& opts = {});

/// SISO shortcut: the (0, 0) entry of eval_continuous.
Complex response(const ContinuousStateSpace& sys, Complex s);

PoleSet poles(const ContinuousStateSpace& sys);
PoleSet poles(const DiscreteStateSpace& sys);

/// Strict test. Continuous: every finite pole has Re < -margin. Discrete:
/// every eigenvalue has |z| < 1 - margin.
bool is_stable(const ContinuousStateSpace& sys, double margin = 0.0);
bool is_stable(const DiscreteStateSpace& sys, double margin = 0.0);

/// Realization of k * g (g first, then k). Order is g.order() + k.order().
ContinuousStateSpace series(const ContinuousStateSpace& g,
                            const ContinuousStateSpace& k);

/// Unity negative feedback around `open_loop`: y = L (r - y).
/// Requires I + D invertible.
ContinuousStateSpace feedback(const ContinuousStateSpace& open_loop);

}  // namespace hsdma
