#pragma once

// JSON and CSV formats of the command-line tool.
//
// System JSON: {"kind": "continuous" | "discrete", "E"?, "A", "B", "C", "D", "h"?}
// with row-major nested arrays. A missing "E" means identity; a bare number is
// read as a 1x1 matrix. A document of the form {"system": {...}} is accepted.

#include <string>
#include <variant>
#include <vector>

#include "hsdma/hybrid_sim.hpp"
#include "hsdma/loewner.hpp"
#include "hsdma/lti.hpp"
#include "hsdma/margin.hpp"
#include "hsdma/pipeline.hpp"

namespace hsdma::io {

using AnySystem = std::variant<ContinuousStateSpace, DiscreteStateSpace>;

/// Throws ParseError naming `source` and the offending field.
AnySystem parse_system(const std::string& text, const std::string& source = "<json>");
ContinuousStateSpace parse_continuous(const std::string& text, const std::string& source = "<json>");
DiscreteStateSpace parse_discrete(const std::string& text, const std::string& source = "<json>");

std::string to_json(const ContinuousStateSpace& sys);
std::string to_json(const DiscreteStateSpace& sys);

/// {"dm_seconds", "stable_nominal", "crossovers":[{"omega","pm_rad","dm_s",
/// "above_nyquist"}], "gain_margins":[{"omega","gm"}]}; +inf DM is null.
std::string to_json(const margin::MarginReport& report);

/// Margin report plus "order", "interpolation_error", "warnings" and the
/// fitted "model".
std::string to_json(const pipeline::HsdmaResult& result);

/// {"order", "interpolation_error", "points", "model"}.
std::string fit_report(const ContinuousStateSpace& model, double interpolation_error,
                       std::size_t points);

std::string to_json(const sim::DelayBracket& bracket, sim::HoldConvention hold);

/// "omega_rad_s,re,im" for SISO data, "omega_rad_s,out,in,re,im" otherwise.
std::string to_csv(const loewner::FrequencyDataSet& data);

/// Inverse of to_csv. `h` bounds the grid; h <= 0 takes pi / max(omega).
loewner::FrequencyDataSet parse_frequency_csv(const std::string& text, double h,
                                              const std::string& source = "<csv>");

/// "t,y,u".
std::string to_csv(const sim::SimTrace& trace);

/// "method,h,dm_hsdma,dm_sim,order,stable_nominal,interpolation_error,status".
std::string sweep_csv(const std::vector<pipeline::SweepRow>& rows);

/// Wide table for plotting: "h,<method>,<method>_sim,..." with one column pair
/// per method in first-seen order.
std::string plot_csv(const std::vector<pipeline::SweepRow>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace hsdma::io
