#include "flexkit/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flexkit/errors.hpp"
#include "flexkit/lp.hpp"

namespace flexkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_horizon(const HeatPumpModel& m, const PriceCurve& prices) {
  if (prices.size() != static_cast<std::size_t>(m.horizon)) {
    throw ShapeError("price curve has " + std::to_string(prices.size()) + " entries, horizon is " +
                     std::to_string(m.horizon));
  }
}

}  // namespace

double profit(const FlexOffer& fo, const Schedule& baseline, const PriceCurve& prices, double p0) {
  const FeasibilityReport r = check_schedule(fo, baseline);
  if (!r.feasible) throw ValidationError("baseline schedule is infeasible: " + r.violations.front().describe());
  const OptimizationResult opt = optimize(fo, prices, p0);
  if (opt.status != OptStatus::optimal) throw ValidationError("no feasible schedule at this threshold");
  return schedule_cost(baseline, prices) - opt.objective;
}

ExactOracle::ExactOracle(HeatPumpModel m, OracleGrid grid) : model_(m), grid_(grid) {
  validate(model_);
  if (!(grid_.temperature_step > 0.0) || !(grid_.energy_step > 0.0)) throw ValidationError("grid steps must be positive");
}

double ExactOracle::min_cost(const PriceCurve& prices) const {
  check_horizon(model_, prices);
  const HeatPumpModel& m = model_;
  const double a = m.alpha();
  const double b = m.beta();
  const double g = m.gamma();
  const double dT = grid_.temperature_step;
  const double dE = grid_.energy_step;
  const std::size_t cells = static_cast<std::size_t>(std::floor((m.t_max - m.t_min) / dT + 1e-9)) + 1;
  const std::size_t actions = static_cast<std::size_t>(std::floor(m.max_energy() / dE + 1e-9));
  const double top = m.t_min + dT * static_cast<double>(cells - 1);

  std::vector<double> next(cells, 0.0);
  std::vector<double> cur(cells);

  auto value_at = [&](const std::vector<double>& v, double t) {
    if (t < m.t_min - 1e-9 || t > top + 1e-9) return kInf;
    if (cells == 1) return v[0];
    const double pos = std::clamp((t - m.t_min) / dT, 0.0, static_cast<double>(cells - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(pos), cells - 2);
    const double w = pos - static_cast<double>(i);
    if (v[i] == kInf || v[i + 1] == kInf) {
      if (w <= 1e-9) return v[i];
      if (w >= 1.0 - 1e-9) return v[i + 1];
      return kInf;
    }
    return (1.0 - w) * v[i] + w * v[i + 1];
  };

  auto best_from = [&](double temp, std::size_t t, const std::vector<double>& v) {
    const double base = a * temp + g;
    const double e_lo = std::max(0.0, (m.t_min - base) / b);
    const double e_hi = std::min(m.max_energy(), (top - base) / b);
    if (e_lo > e_hi + 1e-12) return kInf;
    const auto k_lo = static_cast<std::size_t>(std::ceil(e_lo / dE - 1e-9));
    const auto k_hi = std::min(actions, static_cast<std::size_t>(std::floor(e_hi / dE + 1e-9)));
    double best = kInf;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      const double e = dE * static_cast<double>(k);
      const double rest = value_at(v, base + b * e);
      if (rest == kInf) continue;
      best = std::min(best, prices[t] * e + rest);
    }
    return best;
  };

  for (std::size_t t = prices.size(); t-- > 1;) {
    for (std::size_t i = 0; i < cells; ++i) cur[i] = best_from(m.t_min + dT * static_cast<double>(i), t, next);
    std::swap(cur, next);
  }
  const double cost = best_from(m.t_init, 0, next);
  if (cost == kInf) throw ValidationError("no schedule on the oracle grid keeps the room in its comfort band");
  return cost;
}

double ExactOracle::profit(const Schedule& baseline, const PriceCurve& prices) const {
  return schedule_cost(baseline, prices) - min_cost(prices);
}

double exact_lp_min_cost(const HeatPumpModel& m, const PriceCurve& prices) {
  check_horizon(m, prices);
  validate(m);
  const std::size_t n = prices.size();
  const double a = m.alpha();
  const double b = m.beta();
  LinearProgram lp(n);
  lp.cost = prices;
  double free = m.t_init;
  for (std::size_t t = 0; t < n; ++t) {
    lp.add_bounds(t, 0.0, m.max_energy());
    free = a * free + m.gamma();
    // T_t = free_t + b * sum_{s<=t} a^{t-s} e_s
    std::vector<double> row(n, 0.0);
    for (std::size_t s = 0; s <= t; ++s) row[s] = b * std::pow(a, static_cast<double>(t - s));
    std::vector<double> neg(row);
    for (double& c : neg) c = -c;
    lp.add_row(row, m.t_max - free);
    lp.add_row(neg, free - m.t_min);
  }
  const LpSolution s = solve_lp(lp);
  if (s.status != LpStatus::optimal) throw ValidationError("no schedule keeps the room in its comfort band");
  return s.objective;
}

double retention(const FlexOffer& model_fo, const ExactOracle& oracle, const Schedule& baseline,
                 const PriceCurve& prices) {
  return metric_report(model_fo, oracle, baseline, prices).retained;
}

MetricReport metric_report(const FlexOffer& model_fo, const ExactOracle& oracle, const Schedule& baseline,
                           const PriceCurve& prices) {
  MetricReport r;
  r.model_kind = model_fo.kind();
  r.baseline_cost = schedule_cost(baseline, prices);
  r.profit = profit(model_fo, baseline, prices);
  r.optimized_cost = r.baseline_cost - r.profit;
  const double exact = oracle.profit(baseline, prices);
  if (std::abs(exact) <= 1e-12) throw DomainError("exact profit is zero, retention is undefined");
  r.retained = r.profit / exact;
  return r;
}

std::vector<MetricReport> heatpump_metric(const HeatPumpModel& m, const PriceCurve& prices, OracleGrid grid) {
  const ExactOracle oracle(m, grid);
  std::vector<MetricReport> out;
  for (FoKind k : {FoKind::sfo, FoKind::tecfo, FoKind::dfo}) {
    const FlexOffer fo = generate_fo(m, k);
    out.push_back(metric_report(fo, oracle, *fo.default_schedule, prices));
  }
  return out;
}

const std::vector<ReferenceRetention>& reference_retention() {
  static const std::vector<ReferenceRetention> table = {
      {"battery", "SFO", 10.0},  {"battery", "TECFO", 38.0}, {"battery", "DFO", 61.0}, {"battery", "UFO", 66.4},
      {"EV", "DFO", 77.3},       {"EV", "UFO", 92.0},        {"heat pump", "DFO", 98.9},
  };
  return table;
}

}  // namespace flexkit
