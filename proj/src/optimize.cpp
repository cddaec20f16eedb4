#include "flexkit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "flexkit/errors.hpp"
#include "flexkit/lp.hpp"
#include "flexkit/uncertain.hpp"

namespace flexkit {

namespace {

constexpr std::size_t kMaxUnionEnumeration = 20;

void check_prices(const FlexOffer& fo, const PriceCurve& prices) {
  if (prices.size() != fo.profile.size()) {
    throw ShapeError("price curve has " + std::to_string(prices.size()) + " entries, FlexOffer has " +
                     std::to_string(fo.profile.size()) + " slices");
  }
  for (double p : prices) {
    if (!std::isfinite(p)) throw ValidationError("prices must be finite");
  }
}

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Slice bounds with price gates applied.
Box gated_box(const FlexOffer& fo, const PriceCurve& prices, std::vector<EnergyBounds> const* override = nullptr) {
  Box box;
  for (std::size_t t = 0; t < fo.profile.size(); ++t) {
    const EnergyBounds b = override != nullptr ? (*override)[t] : fo.profile[t].energy;
    const auto& band = fo.profile[t].price;
    box.lower.push_back(b.lower);
    box.upper.push_back(band && !band->admits(prices[t]) ? b.lower : b.upper);
  }
  return box;
}

OptimizationResult finish(const FlexOffer& fo, std::vector<double> e, const PriceCurve& prices) {
  OptimizationResult r;
  r.status = OptStatus::optimal;
  r.objective = std::inner_product(e.begin(), e.end(), prices.begin(), 0.0);
  r.schedule = make_schedule(e, ScheduleKind::flexoffer_schedule, fo.start_after_time, &prices);
  return r;
}

OptimizationResult infeasible() { return {}; }

// min Σ p e over lower <= e <= upper and an optional total-energy interval.
std::optional<std::vector<double>> box_fill(const Box& box, const PriceCurve& prices,
                                            const std::optional<EnergyBounds>& total) {
  const std::size_t n = box.lower.size();
  std::vector<double> e = box.lower;
  if (!total) {
    for (std::size_t t = 0; t < n; ++t) {
      if (prices[t] < 0) e[t] = box.upper[t];
    }
    return e;
  }
  double sum = std::accumulate(e.begin(), e.end(), 0.0);
  const double cap = std::accumulate(box.upper.begin(), box.upper.end(), 0.0);
  if (sum > total->upper + kFeasibilityTolerance || cap < total->lower - kFeasibilityTolerance) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prices[a] < prices[b]; });

  // negative prices: raise as far as the TEC upper bound allows
  for (std::size_t t : order) {
    if (prices[t] >= 0) break;
    const double room = std::max(0.0, total->upper - sum);
    const double add = std::min(box.upper[t] - e[t], room);
    e[t] += add;
    sum += add;
  }
  // reach the TEC lower bound through the cheapest slices
  for (std::size_t t : order) {
    if (sum >= total->lower) break;
    const double add = std::min(box.upper[t] - e[t], total->lower - sum);
    e[t] += add;
    sum += add;
  }
  return e;
}

LinearProgram build_lp(const FlexOffer& fo, const PriceCurve& prices, const Box& box) {
  const std::size_t n = fo.profile.size();
  LinearProgram lp(n);
  lp.cost = prices;
  for (std::size_t t = 0; t < n; ++t) lp.add_bounds(t, box.lower[t], box.upper[t]);
  if (fo.total_energy) {
    lp.add_row(std::vector<double>(n, 1.0), fo.total_energy->upper);
    lp.add_row(std::vector<double>(n, -1.0), -fo.total_energy->lower);
  }
  for (std::size_t t = 0; t < fo.dependency.size(); ++t) {
    for (const auto& r : fo.dependency[t].rows) {
      std::vector<double> row(n, 0.0);
      for (std::size_t u = 0; u < t; ++u) row[u] = r.a;
      row[t] = r.b;
      lp.add_row(std::move(row), r.c);
    }
  }
  return lp;
}

OptimizationResult solve_through_lp(const FlexOffer& fo, const PriceCurve& prices, const Box& box) {
  const LpSolution sol = solve_lp(build_lp(fo, prices, box));
  if (sol.status != LpStatus::optimal) return infeasible();
  return finish(fo, sol.x, prices);
}

}  // namespace

double schedule_cost(const Schedule& s, const PriceCurve& prices) {
  const std::vector<double> e = energies(s);
  if (e.size() != prices.size()) {
    throw ShapeError("schedule has " + std::to_string(e.size()) + " unit slices, price curve has " +
                     std::to_string(prices.size()));
  }
  return std::inner_product(e.begin(), e.end(), prices.begin(), 0.0);
}

OptimizationResult optimize_sfo(const FlexOffer& fo, const PriceCurve& prices) {
  check_prices(fo, prices);
  if (fo.kind() != FoKind::sfo) throw UnsupportedInstance("optimize_sfo needs a FlexOffer with slice constraints only");
  auto e = box_fill(gated_box(fo, prices), prices, std::nullopt);
  return finish(fo, std::move(*e), prices);
}

OptimizationResult optimize_tecfo(const FlexOffer& fo, const PriceCurve& prices) {
  check_prices(fo, prices);
  if (fo.kind() != FoKind::tecfo) throw UnsupportedInstance("optimize_tecfo needs a total energy constraint");
  auto e = box_fill(gated_box(fo, prices), prices, fo.total_energy);
  if (!e) return infeasible();
  return finish(fo, std::move(*e), prices);
}

OptimizationResult optimize_dfo(const FlexOffer& fo, const PriceCurve& prices) {
  check_prices(fo, prices);
  if (fo.kind() != FoKind::dfo) throw UnsupportedInstance("optimize_dfo needs dependency constraints");
  Box box;
  for (const auto& sc : fo.profile) {
    box.lower.push_back(sc.energy.lower);
    box.upper.push_back(sc.energy.upper);
  }
  return solve_through_lp(fo, prices, box);
}

OptimizationResult optimize_ufo(const FlexOffer& fo, const PriceCurve& prices, double p0) {
  check_prices(fo, prices);
  if (fo.kind() != FoKind::ufo) throw UnsupportedInstance("optimize_ufo needs uncertain constraints");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("probability threshold must lie in [0, 1]");

  const std::size_t n = fo.profile.size();
  std::vector<std::vector<EnergyBounds>> choices(n);
  std::size_t widest = 0;
  for (std::size_t t = 0; t < n; ++t) {
    choices[t] = threshold_intervals(fo.uncertain[t], p0);
    if (choices[t].empty()) return infeasible();
    widest = std::max(widest, choices[t].size());
  }
  if (widest > 1 && n * widest > kMaxUnionEnumeration) {
    throw UnsupportedInstance("threshold sets are unions too large to enumerate (" + std::to_string(n) + " slices x " +
                              std::to_string(widest) + " intervals)");
  }

  std::vector<std::size_t> pick(n, 0);
  std::optional<OptimizationResult> best;
  while (true) {
    std::vector<EnergyBounds> bounds(n);
    for (std::size_t t = 0; t < n; ++t) bounds[t] = choices[t][pick[t]];
    if (auto e = box_fill(gated_box(fo, prices, &bounds), prices, fo.total_energy)) {
      OptimizationResult r = finish(fo, std::move(*e), prices);
      if (!best || r.objective < best->objective - 1e-12) best = std::move(r);
    }
    std::size_t t = 0;
    for (; t < n; ++t) {
      if (++pick[t] < choices[t].size()) break;
      pick[t] = 0;
    }
    if (t == n) break;
  }
  return best ? std::move(*best) : infeasible();
}

OptimizationResult optimize(const FlexOffer& fo, const PriceCurve& prices, double p0) {
  switch (fo.kind()) {
    case FoKind::sfo: return optimize_sfo(fo, prices);
    case FoKind::tecfo: return optimize_tecfo(fo, prices);
    case FoKind::dfo: return optimize_dfo(fo, prices);
    case FoKind::ufo: return optimize_ufo(fo, prices, p0);
  }
  return infeasible();
}

OptimizationResult optimize_lp(const FlexOffer& fo, const PriceCurve& prices) {
  check_prices(fo, prices);
  if (fo.kind() == FoKind::ufo) throw UnsupportedInstance("optimize_lp does not handle uncertain constraints");
  Box box = fo.kind() == FoKind::dfo ? Box{} : gated_box(fo, prices);
  if (fo.kind() == FoKind::dfo) {
    for (const auto& sc : fo.profile) {
      box.lower.push_back(sc.energy.lower);
      box.upper.push_back(sc.energy.upper);
    }
  }
  return solve_through_lp(fo, prices, box);
}

}  // namespace flexkit
