#include "hsdma/hybrid_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <utility>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "hsdma/error.hpp"
#include "numeric.hpp"

namespace hsdma::sim {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

void require_loop(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl) {
  if (!plant.is_standard())
    throw DomainError("hybrid simulation needs a plant with E = I");
  if (plant.n_inputs() != 1 || plant.n_outputs() != 1)
    throw DimensionError("hybrid simulation is SISO");
  if (ctrl.n_inputs() != 1 || ctrl.n_outputs() != 1)
    throw DimensionError("controller must be SISO");
}

// Closed-loop DC output for a unit reference, used to centre the step
// response before taking its envelope.
double steady_output(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl) {
  const auto n = static_cast<Eigen::Index>(plant.order());
  const auto nc = static_cast<Eigen::Index>(ctrl.order());
  double pdc = plant.d()(0, 0);
  if (n > 0) {
    Eigen::PartialPivLU<Matrix> lu(plant.a());
    if (!(detail::conditioning(lu) > 1e-13)) return 1.0;
    pdc -= (plant.c() * lu.solve(plant.b()))(0, 0);
  }
  double kdc = ctrl.d()(0, 0);
  if (nc > 0) {
    Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(nc, nc) - ctrl.a());
    if (!(detail::conditioning(lu) > 1e-13)) return 1.0;
    kdc += (ctrl.c() * lu.solve(ctrl.b()))(0, 0);
  }
  const double den = 1.0 + kdc * pdc;
  if (std::abs(den) < 1e-14) return 1.0;
  return pdc * kdc / den;
}

std::vector<double> window_peaks(const std::vector<double>& t, const std::vector<double>& s,
                                 double window) {
  std::vector<double> peaks;
  if (t.empty() || !(window > 0.0)) return peaks;
  const auto count = static_cast<std::size_t>(std::floor((t.back() - t.front()) / window + 1e-9));
  peaks.assign(count, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto w = static_cast<std::size_t>(std::floor((t[i] - t.front()) / window));
    if (w < count) peaks[w] = std::max(peaks[w], std::abs(s[i]));
  }
  return peaks;
}

// Integral of exp(A s) B over [0, t] and exp(A t).
std::pair<Matrix, Matrix> zoh_pair(const Matrix& a, const Matrix& b, double t) {
  const auto n = a.rows();
  const auto m = b.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * t;
  aug.topRightCorner(n, m) = b * t;
  const Matrix ex = aug.exp();
  return {ex.topLeftCorner(n, n), ex.topRightCorner(n, m)};
}

}  // namespace

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

std::string_view to_string(HoldConvention c) {
  return c == HoldConvention::output_zoh ? "output_zoh" : "two_rate_transitions";
}

double convention_lag(HoldConvention c, double h) {
  return c == HoldConvention::two_rate_transitions ? 0.5 * h : 0.0;
}

double hold_delay(HoldConvention c, double h) { return 0.5 * h + convention_lag(c, h); }

SimTrace simulate_hybrid(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                         double tau, const SimOptions& opts) {
  require_loop(plant, ctrl);
  Vector x0 = Vector::Zero(static_cast<Eigen::Index>(plant.order()));
  if (opts.excitation == Excitation::initial_state && x0.size() > 0) x0(0) = 1.0;
  return simulate_hybrid(plant, ctrl, tau, x0, opts);
}

SimTrace simulate_hybrid(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                         double tau, const Vector& x0, const SimOptions& opts) {
  require_loop(plant, ctrl);
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw DomainError("transport delay must be >= 0, got " + std::to_string(tau));
  if (!(opts.t_final > 0.0)) throw DomainError("t_final must be positive");
  if (x0.size() != static_cast<Eigen::Index>(plant.order()))
    throw DimensionError("initial state has the wrong length");

  const double h = ctrl.h();
  const double lag = tau + convention_lag(opts.hold, h);
  // Delays that are whole periods land exactly on sampling instants.
  const double lag_periods = std::round(lag / h);
  const bool lag_on_grid = std::abs(lag - lag_periods * h) <= 1e-9 * h;
  const double reference = opts.excitation == Excitation::step_reference ? 1.0 : 0.0;
  const double centre =
      opts.excitation == Excitation::step_reference ? steady_output(plant, ctrl) : 0.0;

  const Matrix& a = plant.a();
  const Matrix& b = plant.b();
  const Eigen::RowVectorXd c = plant.c().row(0);
  const double dp = plant.d()(0, 0);
  const auto n = static_cast<Eigen::Index>(plant.order());

  State x(x0.data(), x0.data() + x0.size());
  Vector xc = Vector::Zero(static_cast<Eigen::Index>(ctrl.order()));
  double u = 0.0;
  std::deque<std::pair<double, double>> pending;  // (release time, value)

  auto output = [&](const State& s) {
    return (n > 0 ? c.dot(Eigen::Map<const Vector>(s.data(), n)) : 0.0) + dp * u;
  };

  SimTrace trace;
  auto record = [&](double t) {
    trace.times.push_back(t);
    trace.y.push_back(output(x));
    trace.u.push_back(u);
  };

  std::size_t k = 0;
  auto process = [&](double t) {
    if (t == static_cast<double>(k) * h) {
      const double e = reference - output(x);
      const double uk = (ctrl.c() * xc)(0) + ctrl.d()(0, 0) * e;
      xc = ctrl.a() * xc + ctrl.b() * e;
      const double release = lag_on_grid ? static_cast<double>(k + static_cast<std::size_t>(lag_periods)) * h
                                         : static_cast<double>(k) * h + lag;
      pending.emplace_back(release, uk);
      ++k;
    }
    while (!pending.empty() && pending.front().first <= t) {
      u = pending.front().second;
      pending.pop_front();
    }
  };

  auto rhs = [&](const State& s, State& ds, double /*t*/) {
    Eigen::Map<const Vector> xs(s.data(), n);
    Eigen::Map<Vector> dxs(ds.data(), n);
    dxs.noalias() = a * xs;
    dxs += b.col(0) * u;
  };

  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opts.atol, opts.rtol);
  double t = 0.0;
  double dt = std::min(h, opts.t_final) / 4.0;
  const double t_end = opts.t_final;

  process(t);
  record(t);
  while (t < t_end && !trace.truncated) {
    double next = std::min(static_cast<double>(k) * h, t_end);
    if (!pending.empty()) next = std::min(next, pending.front().first);

    if (n > 0) {
      stepper.reset();
      double dt_seg = std::min(dt, next - t);
      while (t < next) {
        const bool last = t + dt_seg >= next;
        double trial = last ? next - t : dt_seg;
        const double t_before = t;
        if (stepper.try_step(rhs, x, t, trial) == odeint::success) {
          if (last) t = next;
          dt = trial;
          dt_seg = trial;
          if (t < next && opts.record_steps) record(t);
          if (std::any_of(x.begin(), x.end(),
                          [&](double v) { return !(std::abs(v) <= opts.overflow); })) {
            trace.truncated = true;
            break;
          }
        } else {
          t = t_before;
          dt_seg = trial;
          if (dt_seg < 1e-14 * std::max(1.0, t)) {
            trace.truncated = true;
            break;
          }
        }
      }
      if (trace.truncated) break;
    }
    t = next;
    process(t);
    record(t);
  }

  trace.window = opts.window > 0.0 ? opts.window : std::max(10.0 * h, opts.t_final / 40.0);
  std::vector<double> signal(trace.y.size());
  for (std::size_t i = 0; i < signal.size(); ++i) signal[i] = trace.y[i] - centre;
  trace.envelope = window_peaks(trace.times, signal, trace.window);
  return trace;
}

SimTrace make_trace(std::vector<double> times, std::vector<double> y, double window) {
  if (times.size() != y.size()) throw DimensionError("times and y differ in length");
  if (!(window > 0.0)) throw DomainError("window must be positive");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("times must be strictly increasing");
  SimTrace trace;
  trace.times = std::move(times);
  trace.y = std::move(y);
  trace.u.assign(trace.times.size(), 0.0);
  trace.window = window;
  trace.envelope = window_peaks(trace.times, trace.y, window);
  return trace;
}

double envelope_slope(const SimTrace& trace, const ClassifyOptions& opts) {
  const std::size_t count = trace.envelope.size();
  if (count < opts.min_windows)
    throw DomainError("trace too short: " + std::to_string(count) + " envelope windows, need " +
                      std::to_string(opts.min_windows));
  const double t0 = trace.times.empty() ? 0.0 : trace.times.front();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t i = count / 2; i < count; ++i) {
    const double xi = t0 + (static_cast<double>(i) + 0.5) * trace.window;
    const double yi = std::log(std::max(trace.envelope[i], std::numeric_limits<double>::min()));
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    m += 1.0;
  }
  const double den = m * sxx - sx * sx;
  return den > 0.0 ? (m * sxy - sx * sy) / den : 0.0;
}

Stability classify(const SimTrace& trace, const ClassifyOptions& opts) {
  if (trace.truncated) return Stability::unstable;
  const double slope = envelope_slope(trace, opts);
  const auto& env = trace.envelope;
  const double peak = *std::max_element(env.begin(), env.end());
  const double tail = *std::max_element(env.begin() + static_cast<std::ptrdiff_t>(env.size() / 2), env.end());
  if (peak > 0.0 && tail <= opts.decay_floor * peak) return Stability::stable;
  if (slope < -opts.slope_tol) return Stability::stable;
  if (slope > opts.slope_tol) return Stability::unstable;
  return Stability::marginal;
}

DelayBracket bisect_delay_margin(const ContinuousStateSpace& plant,
                                 const DiscreteStateSpace& ctrl, double tau_lo, double tau_hi,
                                 double tol, const BisectOptions& opts) {
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  if (!(tau_lo >= 0.0) || !(tau_hi > tau_lo))
    throw DomainError("bracket must satisfy 0 <= tau_lo < tau_hi");

  DelayBracket out;
  out.tolerance = tol;
  out.hold_delay = hold_delay(opts.sim.hold, ctrl.h());
  auto stable_at = [&](double tau) {
    const Stability v = classify(simulate_hybrid(plant, ctrl, tau, opts.sim), opts.classify);
    out.classified_at.push_back({tau, v});
    return v == Stability::stable;
  };

  const bool lo_ok = stable_at(tau_lo);
  const bool hi_ok = !stable_at(tau_hi);
  if (!lo_ok || !hi_ok)
    throw BracketError("bracket invalid: tau_lo = " + std::to_string(tau_lo) + " is " +
                       std::string(to_string(out.classified_at[0].verdict)) + ", tau_hi = " +
                       std::to_string(tau_hi) + " is " +
                       std::string(to_string(out.classified_at[1].verdict)));

  // Interior scan: once unstable, the predicate must stay unstable.
  double lo = tau_lo, hi = tau_hi;
  std::vector<std::pair<double, bool>> scan;
  for (int i = 1; i <= 3; ++i) {
    const double tau = tau_lo + (tau_hi - tau_lo) * i / 4.0;
    scan.emplace_back(tau, stable_at(tau));
  }
  for (std::size_t i = 0; i < scan.size(); ++i) {
    for (std::size_t j = i + 1; j < scan.size(); ++j) {
      if (!scan[i].second && scan[j].second)
        throw BracketError("non-monotone stability predicate: unstable at tau = " +
                           std::to_string(scan[i].first) + " but stable at tau = " +
                           std::to_string(scan[j].first));
    }
  }
  for (const auto& [tau, ok] : scan) {
    if (ok) lo = std::max(lo, tau);
    else hi = std::min(hi, tau);
  }

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (stable_at(mid)) lo = mid;
    else hi = mid;
  }
  out.tau_stable = lo;
  out.tau_unstable = hi;
  return out;
}

OracleResult oracle_delay_margin(const ContinuousStateSpace& plant,
                                 const DiscreteStateSpace& ctrl, double tol,
                                 const BisectOptions& opts, double tau_hint) {
  OracleResult res;
  const Stability at_zero = classify(simulate_hybrid(plant, ctrl, 0.0, opts.sim), opts.classify);
  if (at_zero != Stability::stable) {
    res.stable_nominal = false;
    res.delay_margin = 0.0;
    res.bracket.tolerance = tol;
    res.bracket.hold_delay = hold_delay(opts.sim.hold, ctrl.h());
    res.bracket.classified_at.push_back({0.0, at_zero});
    return res;
  }
  double lo = 0.0;
  double hi = tau_hint > 0.0 ? tau_hint : 0.5;
  while (classify(simulate_hybrid(plant, ctrl, hi, opts.sim), opts.classify) == Stability::stable) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) throw BracketError("no destabilizing delay found below 1000 s");
  }
  res.bracket = bisect_delay_margin(plant, ctrl, lo, hi, tol, opts);
  res.delay_margin = res.bracket.total_midpoint();
  return res;
}

double lifted_spectral_radius(const ContinuousStateSpace& plant,
                              const DiscreteStateSpace& ctrl, double delay) {
  require_loop(plant, ctrl);
  if (!(delay >= 0.0)) throw DomainError("delay must be >= 0");
  if (plant.d()(0, 0) != 0.0) throw DomainError("lifting needs a strictly proper plant");
  const double h = ctrl.h();
  const auto n = static_cast<Eigen::Index>(plant.order());
  const auto nc = static_cast<Eigen::Index>(ctrl.order());
  auto m = static_cast<Eigen::Index>(std::floor(delay / h + 1e-12));
  double theta = delay - static_cast<double>(m) * h;
  if (theta < 0.0 || theta < 1e-12 * h) theta = 0.0;

  const Matrix phi = zoh_pair(plant.a(), plant.b(), h).first;
  const auto [e_rest, g0] = zoh_pair(plant.a(), plant.b(), h - theta);
  const Matrix g1 = e_rest * zoh_pair(plant.a(), plant.b(), theta).second;

  // State: x, xc, u[k-1], ..., u[k-m-1].
  const Eigen::Index nb = m + 1;
  const Eigen::Index dim = n + nc + nb;
  Eigen::RowVectorXd urow = Eigen::RowVectorXd::Zero(dim);
  urow.segment(0, n) = -ctrl.d()(0, 0) * plant.c().row(0);
  urow.segment(n, nc) = ctrl.c().row(0);
  auto lagged = [&](Eigen::Index j) -> Eigen::RowVectorXd {
    if (j == 0) return urow;
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
    r(n + nc + j - 1) = 1.0;
    return r;
  };

  Matrix t = Matrix::Zero(dim, dim);
  t.topLeftCorner(n, n) = phi;
  t.topRows(n) += g0.col(0) * lagged(m) + g1.col(0) * lagged(m + 1);
  t.block(n, n, nc, nc) = ctrl.a();
  t.block(n, 0, nc, n) = -ctrl.b() * plant.c();
  t.row(n + nc) = urow;
  for (Eigen::Index j = 1; j < nb; ++j) t(n + nc + j, n + nc + j - 1) = 1.0;

  Eigen::EigenSolver<Matrix> es(t, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalues of the lifted loop failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool sampled_data_stable(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                         double delay) {
  return lifted_spectral_radius(plant, ctrl, delay) < 1.0;
}

}  // namespace hsdma::sim
