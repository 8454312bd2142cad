#include "hsdma/margin.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "hsdma/error.hpp"

namespace hsdma::margin {
namespace {

void require_siso(const ContinuousStateSpace& loop) {
  if (loop.n_inputs() != 1 || loop.n_outputs() != 1)
    throw DimensionError("margin analysis needs a SISO loop, got " +
                         std::to_string(loop.n_outputs()) + "x" +
                         std::to_string(loop.n_inputs()));
}

Complex eval_at(const ContinuousStateSpace& loop, double omega) {
  Complex v;
  try {
    v = response(loop, Complex(0.0, omega));
  } catch (const SingularError&) {
    throw NumericalError("frequency sweep hit a pole of the loop at omega = " +
                         std::to_string(omega) + " rad/s");
  }
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw NumericalError("loop magnitude overflows at omega = " + std::to_string(omega) +
                         " rad/s (pole on the imaginary axis?)");
  return v;
}

std::vector<double> log_grid(const SweepOptions& o) {
  if (!(o.omega_min > 0.0) || !(o.omega_max > o.omega_min))
    throw DomainError("sweep band must satisfy 0 < omega_min < omega_max");
  if (!(o.points_per_decade > 0.0)) throw DomainError("points_per_decade must be positive");
  const double decades = std::log10(o.omega_max / o.omega_min);
  const auto n = static_cast<std::size_t>(std::ceil(decades * o.points_per_decade)) + 1;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = o.omega_min * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n - 1));
  w.front() = o.omega_min;
  w.back() = o.omega_max;
  return w;
}

// Roots of f on the grid: sign changes refined by log-bisection.
// `accept` filters candidate roots (e.g. Re L < 0 for phase crossings).
std::vector<double> sweep_roots(const ContinuousStateSpace& loop, const SweepOptions& opts,
                                const std::function<double(Complex)>& f,
                                const std::function<double(Complex)>& scale,
                                const std::function<bool(Complex)>& accept) {
  const std::vector<double> grid = log_grid(opts);
  std::vector<double> values(grid.size());
  std::vector<Complex> resp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    resp[i] = eval_at(loop, grid[i]);
    values[i] = f(resp[i]);
  }

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double fa = values[i];
    const double fb = values[i + 1];
    if (fa == 0.0) {
      if (accept(resp[i])) roots.push_back(grid[i]);
      continue;
    }
    if (!(fa * fb < 0.0)) continue;
    double lo = grid[i], hi = grid[i + 1];
    double flo = fa;
    double root = std::sqrt(lo * hi);
    Complex at = eval_at(loop, root);
    for (int it = 0; it < 200; ++it) {
      root = std::sqrt(lo * hi);
      at = eval_at(loop, root);
      const double fm = f(at);
      if (std::abs(fm) <= opts.tolerance * scale(at) || hi / lo - 1.0 < 1e-15) break;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = root;
        flo = fm;
      } else {
        hi = root;
      }
    }
    if (accept(at)) roots.push_back(root);
  }
  if (values.back() == 0.0 && accept(resp.back())) roots.push_back(grid.back());
  return roots;
}

}  // namespace

ContinuousStateSpace loop_transfer(const ContinuousStateSpace& plant,
                                   const ContinuousStateSpace& controller) {
  return series(plant, controller);
}

double phase_margin_of(Complex value) {
  double pm = std::numbers::pi + std::arg(value);
  if (pm > std::numbers::pi) pm -= 2.0 * std::numbers::pi;
  return pm;
}

std::vector<double> gain_crossovers(const ContinuousStateSpace& loop, const SweepOptions& opts) {
  require_siso(loop);
  return sweep_roots(
      loop, opts, [](Complex v) { return std::abs(v) - 1.0; }, [](Complex) { return 1.0; },
      [](Complex) { return true; });
}

std::vector<double> phase_crossovers(const ContinuousStateSpace& loop, const SweepOptions& opts) {
  require_siso(loop);
  return sweep_roots(
      loop, opts, [](Complex v) { return v.imag(); }, [](Complex v) { return std::abs(v); },
      [](Complex v) { return v.real() < 0.0; });
}

MarginReport delay_margin(const ContinuousStateSpace& loop, const MarginOptions& opts) {
  require_siso(loop);
  MarginReport report;

  for (double w : gain_crossovers(loop, opts.sweep)) {
    const Complex l = eval_at(loop, w);
    Crossover c;
    c.omega = w;
    c.phase_margin = phase_margin_of(l);
    c.delay_margin = c.phase_margin / w;
    c.above_nyquist = opts.sweep.nyquist.has_value() && w > *opts.sweep.nyquist;
    report.crossovers.push_back(c);
    if (c.phase_margin > 0.0)
      report.delay_margin = std::min(report.delay_margin, c.delay_margin);
  }
  for (double w : phase_crossovers(loop, opts.sweep)) {
    report.gain_margins.push_back({w, 1.0 / std::abs(eval_at(loop, w))});
  }

  report.stable_nominal = opts.nominal_stable.has_value()
                              ? *opts.nominal_stable
                              : is_stable(feedback(loop), opts.stability_margin);
  if (!report.stable_nominal) report.delay_margin = 0.0;
  return report;
}

}  // namespace hsdma::margin
