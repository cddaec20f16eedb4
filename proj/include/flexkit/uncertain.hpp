#pragma once

#include <vector>

#include "flexkit/model.hpp"

namespace flexkit {

/// Default visualization/optimization threshold: energy values certainly available.
inline constexpr double kDefaultProbabilityThreshold = 1.0;

/// Horner evaluation of ascending-degree coefficients.
double eval_poly(const std::vector<double>& coeffs, double e);

/// clamp(min_i p_i(e), 0, 1). Throws DomainError when e lies outside f.domain.
double evaluate(const UncertainFunction& f, double e);

/// {e in domain : f(e) >= p0} as sorted, disjoint closed intervals.
/// Roots are analytic up to degree 2 and bisected (to ~1e-13 kWh) for degree 3.
/// Throws DomainError when p0 is outside [0, 1].
std::vector<EnergyBounds> threshold_intervals(const UncertainFunction& f, double p0);

}  // namespace flexkit
