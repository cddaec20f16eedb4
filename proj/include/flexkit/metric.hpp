#pragma once

// Economic metric: the profit a flexibility model earns by cost optimization,
// and the share of the exact device profit it keeps.

#include <string_view>
#include <vector>

#include "flexkit/heatpump.hpp"
#include "flexkit/model.hpp"
#include "flexkit/optimize.hpp"

namespace flexkit {

struct MetricReport {
  FoKind model_kind = FoKind::sfo;
  double baseline_cost = 0.0;
  double optimized_cost = 0.0;
  double profit = 0.0;
  double retained = 0.0;
};

/// cost(baseline) - optimal cost. Throws ValidationError when the baseline is
/// infeasible for fo.
double profit(const FlexOffer& fo, const Schedule& baseline, const PriceCurve& prices, double p0 = 1.0);

struct OracleGrid {
  double temperature_step = 0.01;  // K
  double energy_step = 0.005;      // kWh
};

/// Dynamic program over (time unit, room temperature) for the heat-pump
/// model. Temperatures live on a grid inside the comfort band, next
/// temperatures are exact and the value function is interpolated linearly.
class ExactOracle {
 public:
  explicit ExactOracle(HeatPumpModel m, OracleGrid grid = {});

  /// Cheapest device-feasible cost. Throws ShapeError when prices do not
  /// cover the horizon, ValidationError when no grid schedule is feasible.
  double min_cost(const PriceCurve& prices) const;
  double profit(const Schedule& baseline, const PriceCurve& prices) const;

  const HeatPumpModel& model() const { return model_; }
  const OracleGrid& grid() const { return grid_; }

 private:
  HeatPumpModel model_;
  OracleGrid grid_;
};

/// The same optimum as a linear program over the exact affine dynamics.
double exact_lp_min_cost(const HeatPumpModel& m, const PriceCurve& prices);

/// profit(model_fo) / oracle profit. Throws DomainError when the oracle
/// profit is zero.
double retention(const FlexOffer& model_fo, const ExactOracle& oracle, const Schedule& baseline,
                 const PriceCurve& prices);

MetricReport metric_report(const FlexOffer& model_fo, const ExactOracle& oracle, const Schedule& baseline,
                           const PriceCurve& prices);

/// Generates SFO, TECFO and DFO for the model and reports each against the
/// oracle, using the generated default schedule as baseline.
std::vector<MetricReport> heatpump_metric(const HeatPumpModel& m, const PriceCurve& prices, OracleGrid grid = {});

struct ReferenceRetention {
  std::string_view device;
  std::string_view model;
  double percent;
};

/// Published retention figures from other experiments; shown for context,
/// never recomputed.
const std::vector<ReferenceRetention>& reference_retention();

}  // namespace flexkit
