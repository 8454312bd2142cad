#pragma once

// Gain/phase/delay margins of a SISO loop transfer L(s) under unity negative
// feedback, by dense logarithmic sweep and bisection refinement.

#include <limits>
#include <optional>
#include <vector>

#include "hsdma/lti.hpp"

namespace hsdma::margin {

struct Crossover {
  double omega = 0.0;         // rad/s, |L(j omega)| = 1
  double phase_margin = 0.0;  // rad, pi + arg L wrapped to (-pi, pi]
  double delay_margin = 0.0;  // s, phase_margin / omega (meaningful when phase_margin > 0)
  bool above_nyquist = false;
};

struct GainMargin {
  double omega = 0.0;   // rad/s, arg L = -pi
  double margin = 0.0;  // 1 / |L|
};

struct MarginReport {
  std::vector<Crossover> crossovers;
  std::vector<GainMargin> gain_margins;
  /// Minimum positive-phase-margin candidate; +inf when there is none; 0 when
  /// the nominal loop is unstable.
  double delay_margin = std::numeric_limits<double>::infinity();
  bool stable_nominal = true;
};

struct SweepOptions {
  double omega_min = 1e-3;
  double omega_max = 1e4;
  double points_per_decade = 2000.0;
  /// Refinement stops once ||L| - 1| (or |Im L| relative to |L|) is below this.
  double tolerance = 1e-10;
  /// Crossovers above this frequency are flagged (e.g. pi / h for a fitted
  /// discrete controller). Unset means nothing is flagged.
  std::optional<double> nyquist;
};

struct MarginOptions {
  SweepOptions sweep;
  /// Overrides the closed-loop pole test (used when nominal stability is
  /// decided elsewhere, e.g. on the exact sampled-data loop).
  std::optional<bool> nominal_stable;
  /// Real-part margin for the closed-loop pole test.
  double stability_margin = 0.0;
};

/// series(plant, controller): L = controller * plant.
ContinuousStateSpace loop_transfer(const ContinuousStateSpace& plant,
                                   const ContinuousStateSpace& controller);

/// All frequencies in [omega_min, omega_max] with |L(j omega)| = 1, increasing.
std::vector<double> gain_crossovers(const ContinuousStateSpace& loop,
                                    const SweepOptions& opts = {});

/// All frequencies with arg L(j omega) = -pi, increasing.
std::vector<double> phase_crossovers(const ContinuousStateSpace& loop,
                                     const SweepOptions& opts = {});

/// pi + arg(value) wrapped to (-pi, pi].
double phase_margin_of(Complex value);

MarginReport delay_margin(const ContinuousStateSpace& loop, const MarginOptions& opts = {});

}  // namespace hsdma::margin
