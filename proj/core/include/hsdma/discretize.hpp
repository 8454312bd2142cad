#pragma once

// Continuous-to-discrete transforms for standard (E = I) realizations and the
// exact, irrational discretization evaluated pointwise on the unit circle.

#include <optional>
#include <string>
#include <string_view>

#include "hsdma/lti.hpp"

namespace hsdma::discretize {

enum class Method { forward, backward, bilinear, zoh };

/// "forward", "backward", "bilinear", "zoh".
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

/// s <- (z - 1) / h.
DiscreteStateSpace forward_euler(const ContinuousStateSpace& sys, double h);

/// s <- (z - 1) / (h z).
DiscreteStateSpace backward_euler(const ContinuousStateSpace& sys, double h);

/// Tustin, s <- (2 / h) (z - 1) / (z + 1). No pre-warping.
DiscreteStateSpace bilinear(const ContinuousStateSpace& sys, double h);

/// Zero-order hold: Ad = exp(A h), Bd = int_0^h exp(A t) dt B.
DiscreteStateSpace zoh(const ContinuousStateSpace& sys, double h);

DiscreteStateSpace apply(Method m, const ContinuousStateSpace& sys, double h);

/// C ((1/h) Log(e^{j w h}) I - A)^{-1} B + D on the principal branch, for
/// 0 < |w| <= pi / h. Below Nyquist this is the continuous response at j w.
CMatrix eval_exact_discretization(const ContinuousStateSpace& sys, double h, double omega);

}  // namespace hsdma::discretize
