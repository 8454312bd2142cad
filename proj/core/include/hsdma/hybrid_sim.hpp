#pragma once

// Sampled-data closed loop: continuous plant, discrete controller, held and
// transport-delayed actuation. Integrated with an adaptive Dormand-Prince
// pair that restarts at every sampling and release instant.

#include <cstddef>
#include <string_view>
#include <vector>

#include "hsdma/lti.hpp"

namespace hsdma::sim {

enum class HoldConvention {
  /// One zero-order hold on the controller output: hold delay h/2.
  output_zoh,
  /// Rate transitions on both sides of the controller: the controller output
  /// reaches the hold half a period later. Hold delay h.
  two_rate_transitions,
};

enum class Excitation {
  /// Plant state [1, 0, ...], reference 0.
  initial_state,
  /// Plant state 0, unit step reference.
  step_reference,
};

enum class Stability { stable, unstable, marginal };

std::string_view to_string(Stability s);
std::string_view to_string(HoldConvention c);

struct SimTrace {
  std::vector<double> times;
  std::vector<double> y;
  std::vector<double> u;
  /// Peak of the classified signal per window of length `window`.
  std::vector<double> envelope;
  double window = 0.0;
  /// Integration stopped early (overflow or step-size underflow).
  bool truncated = false;
};

struct SimOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double t_final = 120.0;
  /// Envelope window; <= 0 selects max(10 h, t_final / 40).
  double window = 0.0;
  HoldConvention hold = HoldConvention::two_rate_transitions;
  Excitation excitation = Excitation::initial_state;
  /// |x| beyond this truncates the run.
  double overflow = 1e100;
  /// Record intermediate integrator steps, not only segment ends.
  bool record_steps = true;
};

struct ClassifyOptions {
  /// 1/s. Log-envelope slope threshold.
  double slope_tol = 1e-3;
  std::size_t min_windows = 20;
  /// Trailing peaks below this fraction of the largest peak count as decayed
  /// (the log slope is meaningless at the round-off floor).
  double decay_floor = 1e-12;
};

/// Extra actuation lag of the convention on top of the transport delay.
double convention_lag(HoldConvention c, double h);
/// Total hold-induced delay (h/2 for one ZOH, h for two rate transitions).
double hold_delay(HoldConvention c, double h);

/// Closed loop e = r - y, controller sampled at k h, output released at
/// k h + tau (+ convention lag) and held. Plant must have E = I. SISO.
SimTrace simulate_hybrid(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                         double tau, const SimOptions& opts = {});

/// Same as simulate_hybrid with an explicit initial plant state.
SimTrace simulate_hybrid(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                         double tau, const Vector& x0, const SimOptions& opts = {});

/// Builds a trace from raw samples and fills in the envelope.
SimTrace make_trace(std::vector<double> times, std::vector<double> y, double window);

/// Least-squares slope of log peaks over the trailing half of the windows.
double envelope_slope(const SimTrace& trace, const ClassifyOptions& opts = {});

Stability classify(const SimTrace& trace, const ClassifyOptions& opts = {});

struct Classified {
  double tau = 0.0;
  Stability verdict = Stability::stable;
};

struct DelayBracket {
  double tau_stable = 0.0;
  double tau_unstable = 0.0;
  double tolerance = 0.0;
  /// Hold-induced delay of the convention; total margin = tau + hold_delay.
  double hold_delay = 0.0;
  std::vector<Classified> classified_at;

  double midpoint() const noexcept { return 0.5 * (tau_stable + tau_unstable); }
  double total_midpoint() const noexcept { return midpoint() + hold_delay; }
};

struct BisectOptions {
  SimOptions sim;
  ClassifyOptions classify;
};

/// Predicate: simulate + classify, marginal counted as unstable. Requires a
/// stable tau_lo and a non-stable tau_hi; three interior points are scanned
/// first and a flip-flopping predicate raises BracketError.
DelayBracket bisect_delay_margin(const ContinuousStateSpace& plant,
                                 const DiscreteStateSpace& ctrl, double tau_lo, double tau_hi,
                                 double tol, const BisectOptions& opts = {});

struct OracleResult {
  /// Total delay margin (transport + hold); 0 when unstable without delay.
  double delay_margin = 0.0;
  bool stable_nominal = true;
  DelayBracket bracket;
};

/// Bracket search from tau = 0 (growing tau_hi from `tau_hint`) followed by
/// bisect_delay_margin.
OracleResult oracle_delay_margin(const ContinuousStateSpace& plant,
                                 const DiscreteStateSpace& ctrl, double tol,
                                 const BisectOptions& opts = {}, double tau_hint = 0.5);

/// Spectral radius of the exactly lifted sampled-data loop (ZOH plant step,
/// controller, actuation delayed by `delay` seconds). Plant D must be 0.
double lifted_spectral_radius(const ContinuousStateSpace& plant,
                              const DiscreteStateSpace& ctrl, double delay);

/// lifted_spectral_radius(plant, ctrl, delay) < 1.
bool sampled_data_stable(const ContinuousStateSpace& plant, const DiscreteStateSpace& ctrl,
                         double delay = 0.0);

}  // namespace hsdma::sim
