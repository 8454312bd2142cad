#include "hsdma/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hsdma/error.hpp"
#include "numeric.hpp"

namespace hsdma::loewner {
namespace {

constexpr Complex kJ{0.0, 1.0};

// Blocks of a conjugate-closed point list: 1 for a real point, 2 for (p, conj p).
std::vector<int> conjugate_blocks(const CVector& pts, const char* side) {
  std::vector<int> blocks;
  const auto n = pts.size();
  for (Eigen::Index i = 0; i < n;) {
    const Complex p = pts[i];
    const double tol = 1e-13 * std::max(1.0, std::abs(p));
    if (std::abs(p.imag()) <= tol) {
      blocks.push_back(1);
      i += 1;
      continue;
    }
    if (i + 1 >= n || std::abs(pts[i + 1] - std::conj(p)) > tol)
      throw DomainError(std::string(side) +
                        " points are not conjugate-closed in adjacent pairs at index " +
                        std::to_string(i));
    blocks.push_back(2);
    i += 2;
  }
  return blocks;
}

// Unitary J with J^* X J real for conjugate-structured X.
CMatrix realifier(const std::vector<int>& blocks, Eigen::Index n) {
  CMatrix j = CMatrix::Zero(n, n);
  const double s = 1.0 / std::numbers::sqrt2;
  Eigen::Index at = 0;
  for (int b : blocks) {
    if (b == 1) {
      j(at, at) = 1.0;
    } else {
      j(at, at) = s;
      j(at, at + 1) = -kJ * s;
      j(at + 1, at) = s;
      j(at + 1, at + 1) = kJ * s;
    }
    at += b;
  }
  return j;
}

Matrix take_real(const CMatrix& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw DomainError(std::string("realification left an imaginary part in ") + what +
                      "; data are not conjugate-symmetric");
  return m.real();
}

struct RealPencil {
  Matrix loewner, shifted, v, w;
};

RealPencil realify(const LoewnerPencil& p) {
  const CMatrix jl = realifier(conjugate_blocks(p.mu, "left"), p.mu.size());
  const CMatrix jr = realifier(conjugate_blocks(p.lambda, "right"), p.lambda.size());
  RealPencil out;
  out.loewner = take_real(jl.adjoint() * p.loewner * jr, "L");
  out.shifted = take_real(jl.adjoint() * p.shifted * jr, "sL");
  out.v = take_real(jl.adjoint() * p.left_responses, "V");
  out.w = take_real(p.right_responses * jr, "W");
  return out;
}

void equilibrate(RealPencil& rp) {
  const auto q = rp.loewner.rows();
  const auto k = rp.loewner.cols();
  for (int sweep = 0; sweep < 5; ++sweep) {
    Vector dr(q), dc(k);
    for (Eigen::Index i = 0; i < q; ++i) {
      const double n = std::hypot(rp.loewner.row(i).norm(), rp.shifted.row(i).norm());
      dr[i] = n > 0.0 ? 1.0 / std::sqrt(n) : 1.0;
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      const double n = std::hypot(rp.loewner.col(i).norm(), rp.shifted.col(i).norm());
      dc[i] = n > 0.0 ? 1.0 / std::sqrt(n) : 1.0;
    }
    rp.loewner = dr.asDiagonal() * rp.loewner * dc.asDiagonal();
    rp.shifted = dr.asDiagonal() * rp.shifted * dc.asDiagonal();
    rp.v = dr.asDiagonal() * rp.v;
    rp.w = rp.w * dc.asDiagonal();
  }
}

RealPencil prepared(const LoewnerPencil& p, const ReduceOptions& opts) {
  RealPencil rp = realify(p);
  if (opts.equilibrate && rp.loewner.size() > 0) equilibrate(rp);
  return rp;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows(), a.cols() + b.cols());
  m << a, b;
  return m;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows() + b.rows(), a.cols());
  m << a, b;
  return m;
}

CMatrix pinv(const CMatrix& m) {
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

FrequencyDataSet::FrequencyDataSet(std::vector<double> omega, std::vector<CMatrix> response,
                                   double h)
    : omega_(std::move(omega)), response_(std::move(response)), h_(h) {
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("h must be positive");
  if (omega_.size() != response_.size())
    throw DimensionError("omega and response counts differ: " +
                         std::to_string(omega_.size()) + " vs " +
                         std::to_string(response_.size()));
  const double nyquist = std::numbers::pi / h_;
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    const double w = omega_[i];
    if (!(w > 0.0) || w > nyquist * (1.0 + 1e-12))
      throw DomainError("omega[" + std::to_string(i) + "] = " + std::to_string(w) +
                        " is outside (0, pi/h = " + std::to_string(nyquist) + "]");
    if (i > 0 && !(w > omega_[i - 1]))
      throw DomainError("omega must be strictly increasing (duplicate or unsorted at index " +
                        std::to_string(i) + ")");
  }
  if (!response_.empty()) {
    n_out_ = static_cast<std::size_t>(response_.front().rows());
    n_in_ = static_cast<std::size_t>(response_.front().cols());
    for (std::size_t i = 0; i < response_.size(); ++i) {
      if (static_cast<std::size_t>(response_[i].rows()) != n_out_ ||
          static_cast<std::size_t>(response_[i].cols()) != n_in_)
        throw DimensionError("response[" + std::to_string(i) + "] has inconsistent shape");
      if (!response_[i].allFinite())
        throw DomainError("response[" + std::to_string(i) + "] is not finite");
    }
  }
}

TangentialDataSet build_tangential(const FrequencyDataSet& data) {
  if (data.size() % 2 != 0)
    throw DomainError("build_tangential needs an even number of samples, got " +
                      std::to_string(data.size()));
  TangentialDataSet t;
  t.n_outputs = data.n_outputs();
  t.n_inputs = data.n_inputs();
  const auto n_out = static_cast<Eigen::Index>(t.n_outputs);
  const auto n_in = static_cast<Eigen::Index>(t.n_inputs);
  t.left.reserve(data.size());
  t.right.reserve(data.size());

  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = data.omega()[i];
    const CMatrix& phi = data.response()[i];
    const std::size_t slot = i / 2;
    if (i % 2 == 0) {
      CVector l = CVector::Unit(n_out, static_cast<Eigen::Index>(slot % t.n_outputs));
      CVector v = phi.adjoint() * l;
      t.left.push_back({Complex(0.0, w), l, v});
      t.left.push_back({Complex(0.0, -w), l.conjugate(), v.conjugate()});
    } else {
      CVector r = CVector::Unit(n_in, static_cast<Eigen::Index>(slot % t.n_inputs));
      CVector wv = phi * r;
      t.right.push_back({Complex(0.0, w), r, wv});
      t.right.push_back({Complex(0.0, -w), r.conjugate(), wv.conjugate()});
    }
  }
  return t;
}

LoewnerPencil build_pencil(const TangentialDataSet& t) {
  const auto q = static_cast<Eigen::Index>(t.left.size());
  const auto k = static_cast<Eigen::Index>(t.right.size());
  if (q != k)
    throw DimensionError("square pencil required: " + std::to_string(q) + " left vs " +
                         std::to_string(k) + " right points");
  const auto n_out = static_cast<Eigen::Index>(t.n_outputs);
  const auto n_in = static_cast<Eigen::Index>(t.n_inputs);

  LoewnerPencil p;
  p.mu.resize(q);
  p.lambda.resize(k);
  p.left_dirs.resize(q, n_out);
  p.left_responses.resize(q, n_in);
  p.right_dirs.resize(n_in, k);
  p.right_responses.resize(n_out, k);
  for (Eigen::Index j = 0; j < q; ++j) {
    const LeftPoint& lp = t.left[static_cast<std::size_t>(j)];
    if (lp.l.size() != n_out || lp.v.size() != n_in)
      throw DimensionError("left point " + std::to_string(j) + " has wrong direction sizes");
    p.mu[j] = lp.mu;
    p.left_dirs.row(j) = lp.l.adjoint();
    p.left_responses.row(j) = lp.v.adjoint();
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const RightPoint& rp = t.right[static_cast<std::size_t>(i)];
    if (rp.r.size() != n_in || rp.w.size() != n_out)
      throw DimensionError("right point " + std::to_string(i) + " has wrong direction sizes");
    p.lambda[i] = rp.lambda;
    p.right_dirs.col(i) = rp.r;
    p.right_responses.col(i) = rp.w;
  }

  const CMatrix vr = p.left_responses * p.right_dirs;   // v_j^* r_i
  const CMatrix lw = p.left_dirs * p.right_responses;   // l_j^* w_i
  p.loewner.resize(q, k);
  p.shifted.resize(q, k);
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const Complex gap = p.mu[j] - p.lambda[i];
      if (std::abs(gap) <= 1e-14 * std::max(1.0, std::abs(p.mu[j])))
        throw DomainError("left point " + std::to_string(j) + " coincides with right point " +
                          std::to_string(i));
      p.loewner(j, i) = (vr(j, i) - lw(j, i)) / gap;
      p.shifted(j, i) = (p.mu[j] * vr(j, i) - p.lambda[i] * lw(j, i)) / gap;
    }
  }
  return p;
}

SylvesterResiduals verify_sylvester(const LoewnerPencil& p) {
  SylvesterResiduals res;
  if (p.loewner.size() == 0) return res;
  const auto m = p.mu.asDiagonal();
  const auto lam = p.lambda.asDiagonal();
  const CMatrix lw = p.left_dirs * p.right_responses;
  const CMatrix vr = p.left_responses * p.right_dirs;

  const CMatrix r1 = p.loewner * lam - m * p.loewner - (lw - vr);
  const CMatrix r2 = p.shifted * lam - m * p.shifted - (lw * lam - m * vr);
  res.loewner = r1.norm() / std::max(1.0, p.loewner.norm());
  res.shifted = r2.norm() / std::max(1.0, p.shifted.norm());
  return res;
}

Vector rank_profile(const LoewnerPencil& p, const ReduceOptions& opts) {
  const RealPencil rp = prepared(p, opts);
  if (rp.loewner.size() == 0) return Vector();
  if (opts.rank_test == RankTest::loewner)
    return Eigen::BDCSVD<Matrix>(rp.loewner).singularValues();
  return Eigen::BDCSVD<Matrix>(hstack(rp.loewner, rp.shifted)).singularValues();
}

ContinuousStateSpace reduce(const LoewnerPencil& p, const ReduceOptions& opts) {
  if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw DomainError("tol must lie in (0, 1)");
  const auto n_out = p.right_responses.rows();
  const auto n_in = p.left_responses.cols();
  const RealPencil rp = prepared(p, opts);
  const auto q = rp.loewner.rows();
  if (q == 0) throw RankCollapseError("empty pencil");

  const Matrix both = hstack(rp.loewner, rp.shifted);
  Eigen::BDCSVD<Matrix> svd_rows(both, Eigen::ComputeThinU);
  const Vector& sig_both = svd_rows.singularValues();
  if (!(sig_both[0] > 0.0)) throw RankCollapseError("Loewner pencil is identically zero");

  // L carries no dynamics: the data are a constant D with L D R = sL.
  const double sig_l = Eigen::BDCSVD<Matrix>(rp.loewner).singularValues()[0];
  if (!(sig_l > opts.tol * sig_both[0])) {
    const CMatrix d = pinv(p.left_dirs) * p.shifted * pinv(p.right_dirs);
    return ContinuousStateSpace::gain(take_real(d, "D"));
  }

  Matrix y1, x1;
  Eigen::Index r = 0;
  if (opts.rank_test == RankTest::loewner) {
    Eigen::BDCSVD<Matrix> svd(rp.loewner, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sig = svd.singularValues();
    while (r < sig.size() && sig[r] > opts.tol * sig[0]) ++r;
    y1 = svd.matrixU().leftCols(r);
    x1 = svd.matrixV().leftCols(r);
  } else {
    while (r < sig_both.size() && sig_both[r] > opts.tol * sig_both[0]) ++r;
    Eigen::BDCSVD<Matrix> svd_cols(vstack(rp.loewner, rp.shifted), Eigen::ComputeThinV);
    r = std::min(r, svd_cols.matrixV().cols());
    y1 = svd_rows.matrixU().leftCols(r);
    x1 = svd_cols.matrixV().leftCols(r);
  }
  if (r == 0) throw RankCollapseError("no singular value above tol");
  if (r >= q) throw UnderSampledError(static_cast<std::size_t>(r), static_cast<std::size_t>(q));

  Matrix e = -y1.transpose() * rp.loewner * x1;
  Matrix a = -y1.transpose() * rp.shifted * x1;
  Matrix b = y1.transpose() * rp.v;
  Matrix c = rp.w * x1;
  return ContinuousStateSpace(std::move(e), std::move(a), std::move(b), std::move(c),
                              Matrix::Zero(n_out, n_in));
}

ContinuousStateSpace fit_rational(const FrequencyDataSet& data, const ReduceOptions& opts) {
  return reduce(build_pencil(build_tangential(data)), opts);
}

double interpolation_error(const ContinuousStateSpace& model, const FrequencyDataSet& data) {
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CMatrix& phi = data.response()[i];
    const CMatrix fit = eval_continuous(model, Complex(0.0, data.omega()[i]));
    const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    worst = std::max(worst, (fit - phi).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

ContinuousStateSpace enforce_stability(const ContinuousStateSpace& sys,
                                       const StabilityOptions& opts) {
  const double eps = opts.epsilon;
  if (!(eps >= 0.0)) throw DomainError("epsilon must be non-negative");
  const PoleSet ps = poles(sys);
  const bool settled = ps.infinite == 0 && std::all_of(ps.values.begin(), ps.values.end(),
                                                       [eps](Complex p) { return p.real() <= -eps; });
  if (settled) return sys;

  const auto n = static_cast<Eigen::Index>(sys.order());
  Eigen::PartialPivLU<Matrix> elu(sys.e());
  if (!(detail::conditioning(elu) > 1e-14))
    throw NumericalError("enforce_stability: E is singular; infinite modes cannot be reflected");
  const Matrix a = elu.solve(sys.a());
  const Matrix b = elu.solve(sys.b());

  Eigen::EigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  const CMatrix vecs = es.eigenvectors();
  Eigen::PartialPivLU<CMatrix> vlu(vecs);
  if (!(detail::conditioning(vlu) > 1e-12))
    throw NumericalError("enforce_stability: defective eigenstructure (eigenvector rcond " +
                         std::to_string(detail::conditioning(vlu)) + ")");
  const CMatrix bm = vlu.solve(b.cast<Complex>());
  const CMatrix cm = sys.c().cast<Complex>() * vecs;

  Matrix ar = Matrix::Zero(n, n);
  Matrix br(n, b.cols());
  Matrix cr(sys.c().rows(), n);
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lam = es.eigenvalues()[i];
    if (lam.imag() < 0.0) continue;  // represented by its conjugate partner
    double re = lam.real();
    if (re > -eps) re = re >= eps ? -re : -eps;
    if (lam.imag() == 0.0) {
      ar(at, at) = re;
      br.row(at) = bm.row(i).real();
      cr.col(at) = cm.col(i).real();
      at += 1;
    } else {
      const double im = lam.imag();
      ar(at, at) = re;
      ar(at, at + 1) = -im;
      ar(at + 1, at) = im;
      ar(at + 1, at + 1) = re;
      br.row(at) = bm.row(i).real();
      br.row(at + 1) = bm.row(i).imag();
      cr.col(at) = 2.0 * cm.col(i).real();
      cr.col(at + 1) = -2.0 * cm.col(i).imag();
      at += 2;
    }
  }
  if (at != n) throw NumericalError("enforce_stability: unpaired complex eigenvalues");
  return ContinuousStateSpace(std::move(ar), std::move(br), std::move(cr), sys.d());
}

}  // namespace hsdma::loewner
