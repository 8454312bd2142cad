#pragma once

// End-to-end delay margin of a hybrid loop: sample the discrete controller on
// the unit circle, fit a continuous rational model to the samples, and run the
// continuous margin analysis on plant x model. Plus the (method, h) sweep.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hsdma/discretize.hpp"
#include "hsdma/hybrid_sim.hpp"
#include "hsdma/loewner.hpp"
#include "hsdma/lti.hpp"
#include "hsdma/margin.hpp"

namespace hsdma::pipeline {

enum class Grid { log, linear };

enum class NominalCheck {
  /// Exact lifted sampled-data loop (ZOH plant, discrete controller).
  sampled_data,
  /// Closed-loop poles of plant x fitted model.
  fitted_model,
};

struct HsdmaConfig {
  std::size_t n = 200;
  Grid grid = Grid::log;
  double omega_min = 1e-3;
  double svd_tol = 1e-8;
  bool enforce_stability = false;
  /// Upper end of the crossover search; unset means pi / h.
  std::optional<double> sweep_band_max;
  loewner::RankTest rank_test = loewner::RankTest::stacked;
  bool equilibrate = true;
  double points_per_decade = 2000.0;
  NominalCheck nominal = NominalCheck::sampled_data;
  loewner::StabilityOptions stability;
};

/// n frequencies in [omega_min, pi / h]; the last one is pi / h exactly.
std::vector<double> make_grid(std::size_t n, Grid grid, double omega_min, double h);

/// Phi_i = Hd(exp(j omega_i h)).
loewner::FrequencyDataSet sample(const DiscreteStateSpace& ctrl, const std::vector<double>& omega);

struct HsdmaResult {
  margin::MarginReport report;
  ContinuousStateSpace model;
  double interpolation_error = 0.0;
  std::vector<std::string> warnings;
};

HsdmaResult hsdma(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                  const HsdmaConfig& cfg = {});

/// Steps 4-7 on given samples. Nominal stability comes from `nominal_stable`
/// when set, else from the closed-loop poles of plant x model.
HsdmaResult hsdma_from_samples(const ContinuousStateSpace& plant,
                               const loewner::FrequencyDataSet& data, const HsdmaConfig& cfg = {},
                               std::optional<bool> nominal_stable = std::nullopt);

struct SweepRow {
  discretize::Method method = discretize::Method::bilinear;
  double h = 0.0;
  double dm_hsdma = 0.0;
  std::optional<double> dm_sim;
  std::size_t order = 0;
  bool stable_nominal = true;
  double interpolation_error = 0.0;
  /// "ok" or the failure message of this row.
  std::string status = "ok";
};

struct SweepConfig {
  std::vector<discretize::Method> methods{discretize::Method::forward,
                                          discretize::Method::backward,
                                          discretize::Method::bilinear};
  std::vector<double> h_values{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08,
                               0.09, 0.10, 0.11, 0.12, 0.13, 0.14, 0.15};
  HsdmaConfig hsdma;
  bool with_oracle = false;
  double oracle_tol = 1e-3;
  sim::BisectOptions oracle;
  /// Worker count; unset defers to HSDMA_THREADS, then the hardware.
  std::optional<std::size_t> threads;
};

/// Flag > HSDMA_THREADS > hardware concurrency; at least 1.
std::size_t resolve_threads(std::optional<std::size_t> flag);

/// Rows in (method, h) order of the config regardless of thread count.
std::vector<SweepRow> sweep(const ContinuousStateSpace& plant, const ContinuousStateSpace& ctrl,
                            const SweepConfig& cfg);

}  // namespace hsdma::pipeline
