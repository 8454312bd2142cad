#pragma once

// Data-driven rational interpolation in the Loewner framework.
//
// Frequency samples of a (discrete) response are attached to points j*omega on
// the continuous imaginary axis, split into left and right tangential data,
// closed under conjugation, assembled into the Loewner pencil (L, sL) and
// reduced to a real descriptor realization
//
//   H(s) = W (sL - s L)^{-1} V,   E = -Y1' L X1,  A = -Y1' sL X1,  B = Y1' V,  C = W X1.

#include <cstddef>
#include <vector>

#include "hsdma/lti.hpp"

namespace hsdma::loewner {

/// Samples {omega_i, Phi_i}. Phi_i is n_outputs x n_inputs. `h` bounds the
/// grid: 0 < omega_i <= pi / h, strictly increasing.
class FrequencyDataSet {
 public:
  FrequencyDataSet(std::vector<double> omega, std::vector<CMatrix> response, double h);

  const std::vector<double>& omega() const noexcept { return omega_; }
  const std::vector<CMatrix>& response() const noexcept { return response_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return omega_.size(); }
  std::size_t n_outputs() const noexcept { return n_out_; }
  std::size_t n_inputs() const noexcept { return n_in_; }

 private:
  std::vector<double> omega_;
  std::vector<CMatrix> response_;
  double h_;
  std::size_t n_out_ = 0;
  std::size_t n_in_ = 0;
};

/// Left row data (mu_j, l_j, v_j) with v_j^* = l_j^* H(mu_j).
struct LeftPoint {
  Complex mu;
  CVector l;  // n_outputs
  CVector v;  // n_inputs
};

/// Right column data (lambda_i, r_i, w_i) with w_i = H(lambda_i) r_i.
struct RightPoint {
  Complex lambda;
  CVector r;  // n_inputs
  CVector w;  // n_outputs
};

/// Conjugate pairs are stored adjacently: (p, conj(p)) with conjugated
/// directions and responses; real points stand alone.
struct TangentialDataSet {
  std::vector<LeftPoint> left;
  std::vector<RightPoint> right;
  std::size_t n_outputs = 0;
  std::size_t n_inputs = 0;
};

struct LoewnerPencil {
  CMatrix loewner;          // q x k
  CMatrix shifted;          // q x k
  CVector mu;               // diagonal of M
  CVector lambda;           // diagonal of Lambda
  CMatrix left_dirs;        // L: q x n_outputs, rows l_j^*
  CMatrix right_dirs;       // R: n_inputs x k, columns r_i
  CMatrix left_responses;   // V: q x n_inputs, rows v_j^*
  CMatrix right_responses;  // W: n_outputs x k, columns w_i

  std::size_t rows() const noexcept { return static_cast<std::size_t>(loewner.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(loewner.cols()); }
};

struct SylvesterResiduals {
  double loewner = 0.0;
  double shifted = 0.0;
};

enum class RankTest {
  /// SVD of L alone: Y1, X1 and r all come from L.
  loewner,
  /// r from [L sL]; Y1 from [L sL], X1 from [L; sL]. Keeps feedthrough.
  stacked,
};

struct ReduceOptions {
  /// Keep singular values sigma_i > tol * sigma_1.
  double tol = 1e-8;
  RankTest rank_test = RankTest::stacked;
  /// Diagonal (Ruiz-style) scaling of the real pencil before the SVD. The
  /// interpolant is invariant under it; only the rank decision changes.
  bool equilibrate = true;
};

/// Alternating split of the samples (1st, 3rd, ... left; 2nd, 4th, ... right),
/// each side closed under conjugation. Requires an even sample count.
TangentialDataSet build_tangential(const FrequencyDataSet& data);

LoewnerPencil build_pencil(const TangentialDataSet& t);

/// Relative Frobenius residuals of  L Lambda - M L = L W - V R  and
/// sL Lambda - M sL = L W Lambda - M V R.
SylvesterResiduals verify_sylvester(const LoewnerPencil& p);

/// Singular values that drive the rank decision, after realification and the
/// optional equilibration.
Vector rank_profile(const LoewnerPencil& p, const ReduceOptions& opts = {});

/// Real descriptor realization of order r. Throws RankCollapseError when
/// r = 0 and no feedthrough is present, UnderSampledError when r equals the
/// number of interpolation points per side.
ContinuousStateSpace reduce(const LoewnerPencil& p, const ReduceOptions& opts = {});

/// build_tangential -> build_pencil -> reduce.
ContinuousStateSpace fit_rational(const FrequencyDataSet& data,
                                  const ReduceOptions& opts = {});

/// max_i |H(j omega_i) - Phi_i| / max(1, |Phi_i|), entrywise max norm.
double interpolation_error(const ContinuousStateSpace& model, const FrequencyDataSet& data);

struct StabilityOptions {
  double epsilon = 1e-6;
};

/// Mirrors every finite pole with Re >= 0 into the left half-plane and pushes
/// poles with Re in (-epsilon, 0) to -epsilon. Requires a diagonalizable
/// spectrum and an invertible E. Returns `sys` unchanged when it already
/// satisfies Re <= -epsilon.
ContinuousStateSpace enforce_stability(const ContinuousStateSpace& sys,
                                       const StabilityOptions& opts = {});

}  // namespace hsdma::loewner
