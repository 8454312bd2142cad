#include "hsdma/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "hsdma/error.hpp"

namespace hsdma::pipeline {

std::vector<double> make_grid(std::size_t n, Grid grid, double omega_min, double h) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  if (n == 0) throw DomainError("grid needs at least one point");
  const double top = std::numbers::pi / h;
  if (!(omega_min > 0.0) || !(omega_min < top))
    throw DomainError("omega_min must lie in (0, pi/h) = (0, " + std::to_string(top) + ")");
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = top;
    return w;
  }
  const double span = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / span;
    w[i] = grid == Grid::log ? omega_min * std::pow(top / omega_min, f)
                             : omega_min + (top - omega_min) * f;
  }
  w.front() = omega_min;
  w.back() = top;
  return w;
}

loewner::FrequencyDataSet sample(const DiscreteStateSpace& ctrl, const std::vector<double>& omega) {
  std::vector<CMatrix> phi;
  phi.reserve(omega.size());
  for (double w : omega) phi.push_back(eval_discrete(ctrl, std::exp(Complex(0.0, w * ctrl.h()))));
  return loewner::FrequencyDataSet(omega, std::move(phi), ctrl.h());
}

namespace {

HsdmaResult analyze(const ContinuousStateSpace& plant, const loewner::FrequencyDataSet& data,
                    const HsdmaConfig& cfg, std::optional<bool> nominal_stable,
                    std::vector<std::string> warnings) {
  loewner::ReduceOptions ro;
  ro.tol = cfg.svd_tol;
  ro.rank_test = cfg.rank_test;
  ro.equilibrate = cfg.equilibrate;
  ContinuousStateSpace model = loewner::fit_rational(data, ro);
  const double err = loewner::interpolation_error(model, data);
  if (cfg.enforce_stability && model.order() > 0)
    model = loewner::enforce_stability(model, cfg.stability);

  const double nyquist = std::numbers::pi / data.h();
  margin::MarginOptions mo;
  mo.sweep.omega_min = cfg.omega_min;
  mo.sweep.omega_max = cfg.sweep_band_max.value_or(nyquist);
  mo.sweep.points_per_decade = cfg.points_per_decade;
  mo.sweep.nyquist = nyquist;
  mo.nominal_stable = nominal_stable;

  const ContinuousStateSpace loop = margin::loop_transfer(plant, model);
  margin::MarginReport report = margin::delay_margin(loop, mo);
  return HsdmaResult{std::move(report), std::move(model), err, std::move(warnings)};
}

}  // namespace

HsdmaResult hsdma(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                  const HsdmaConfig& cfg) {
  std::vector<std::string> warnings;
  if (cfg.n < 10 * std::max<std::size_t>(ctrl.order(), 1))
    warnings.push_back("N = " + std::to_string(cfg.n) + " is below 10 x controller order " +
                       std::to_string(ctrl.order()));
  const auto data = sample(ctrl, make_grid(cfg.n, cfg.grid, cfg.omega_min, ctrl.h()));

  std::optional<bool> nominal;
  if (cfg.nominal == NominalCheck::sampled_data) {
    if (plant.is_standard() && plant.d().isZero(0.0) && plant.n_inputs() == 1 &&
        plant.n_outputs() == 1) {
      nominal = sim::sampled_data_stable(plant, ctrl, 0.0);
    } else {
      warnings.push_back("sampled-data nominal check needs a strictly proper SISO plant with "
                         "E = I; using the fitted closed loop");
    }
  }
  return analyze(plant, data, cfg, nominal, std::move(warnings));
}

HsdmaResult hsdma_from_samples(const ContinuousStateSpace& plant,
                               const loewner::FrequencyDataSet& data, const HsdmaConfig& cfg,
                               std::optional<bool> nominal_stable) {
  return analyze(plant, data, cfg, nominal_stable, {});
}

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("HSDMA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> sweep(const ContinuousStateSpace& plant, const ContinuousStateSpace& ctrl,
                            const SweepConfig& cfg) {
  struct Task {
    discretize::Method method;
    double h;
  };
  std::vector<Task> tasks;
  for (auto m : cfg.methods)
    for (double h : cfg.h_values) tasks.push_back({m, h});
  std::vector<SweepRow> rows(tasks.size());

  auto run = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.method = tasks[i].method;
    row.h = tasks[i].h;
    try {
      const DiscreteStateSpace cd = discretize::apply(row.method, ctrl, row.h);
      const HsdmaResult res = hsdma(plant, cd, cfg.hsdma);
      row.dm_hsdma = res.report.delay_margin;
      row.order = res.model.order();
      row.stable_nominal = res.report.stable_nominal;
      row.interpolation_error = res.interpolation_error;
      if (row.h > 0.15) row.status = "ok (h beyond 0.15)";
      if (cfg.with_oracle) {
        try {
          row.dm_sim = sim::oracle_delay_margin(plant, cd, cfg.oracle_tol, cfg.oracle).delay_margin;
        } catch (const std::exception& e) {
          row.status = std::string("oracle failed: ") + e.what();
        }
      }
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
  };

  const std::size_t workers = std::min(resolve_threads(cfg.threads), std::max<std::size_t>(tasks.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) run(i);
    });
  }
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace hsdma::pipeline
