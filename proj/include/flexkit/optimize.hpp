#pragma once

// Cost-minimizing schedules for every FlexOffer family.
//
// Price bands (minPrice/maxPrice on a slice) act as participation gates for
// box-bounded families: when the market price of a slice lies outside its
// band, the slice is pinned to its lower bound. Dependency constraints are
// solved as one stacked LP and ignore price bands.

#include <vector>

#include "flexkit/model.hpp"

namespace flexkit {

/// EUR/kWh, one entry per time unit.
using PriceCurve = std::vector<double>;

enum class OptStatus { optimal, infeasible };

struct OptimizationResult {
  Schedule schedule;  // kind == flexoffer_schedule; empty when infeasible
  double objective = 0.0;
  OptStatus status = OptStatus::infeasible;
};

/// Σ price_t * e_t over unit slices. Throws ShapeError on length mismatch.
double schedule_cost(const Schedule& s, const PriceCurve& prices);

OptimizationResult optimize_sfo(const FlexOffer& fo, const PriceCurve& prices);
/// Greedy fill from the lower bounds; ties go to the lowest slice index.
OptimizationResult optimize_tecfo(const FlexOffer& fo, const PriceCurve& prices);
/// Dense simplex over the stacked dependency rows (plus slice bounds and TEC).
OptimizationResult optimize_dfo(const FlexOffer& fo, const PriceCurve& prices);
/// Thresholds every f_t at p0, then optimizes the resulting boxes. Unions of
/// intervals are enumerated while slices * max-intervals-per-slice <= 20,
/// beyond that UnsupportedInstance is thrown.
OptimizationResult optimize_ufo(const FlexOffer& fo, const PriceCurve& prices, double p0);

/// Dispatches on fo.kind(); p0 is only used for UFOs.
OptimizationResult optimize(const FlexOffer& fo, const PriceCurve& prices, double p0 = 1.0);

/// The same problem as the family-specific optimizers, always through the
/// simplex (slice bounds with price gates, TEC, dependency rows). Not for UFOs.
OptimizationResult optimize_lp(const FlexOffer& fo, const PriceCurve& prices);

}  // namespace flexkit
