#include "flexkit/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "flexkit/codec.hpp"
#include "flexkit/errors.hpp"

namespace flexkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pool {
  std::size_t length = 0;
  std::vector<double> lower;  // Σ member lower bounds per aggregate unit
  std::vector<double> span;   // Σ member spans per aggregate unit
};

Pool sum_pool(const std::vector<AggregateMember>& members) {
  Pool p;
  for (const auto& m : members) p.length = std::max(p.length, static_cast<std::size_t>(m.offset) + m.bounds.size());
  p.lower.assign(p.length, 0.0);
  p.span.assign(p.length, 0.0);
  for (const auto& m : members) {
    for (std::size_t t = 0; t < m.bounds.size(); ++t) {
      p.lower[m.offset + t] += m.bounds[t].lower;
      p.span[m.offset + t] += m.bounds[t].width();
    }
  }
  return p;
}

// Member excess over its lower bounds as the aggregate excess R grows, when
// units are filled in a given order of member share span_m/span_pool.
struct UnitShare {
  double pool_span;
  double member_span;
  double ratio() const { return member_span / pool_span; }
};

std::vector<UnitShare> shares(const AggregateMember& m, const Pool& pool) {
  std::vector<UnitShare> out;
  for (std::size_t t = 0; t < pool.length; ++t) {
    if (pool.span[t] <= 0.0) continue;
    const bool covers = t >= static_cast<std::size_t>(m.offset) && t < m.offset + m.bounds.size();
    out.push_back({pool.span[t], covers ? m.bounds[t - m.offset].width() : 0.0});
  }
  return out;
}

// Smallest R at which the least-favourable fill already gives the member >= need.
double min_excess_inverse(std::vector<UnitShare> units, double need) {
  if (need <= 0.0) return 0.0;
  std::stable_sort(units.begin(), units.end(), [](const UnitShare& a, const UnitShare& b) { return a.ratio() < b.ratio(); });
  double r_acc = 0.0;
  double got = 0.0;
  for (const auto& u : units) {
    if (u.member_span > 0.0 && got + u.member_span >= need) return r_acc + (need - got) / u.ratio();
    r_acc += u.pool_span;
    got += u.member_span;
  }
  return kInf;
}

// Largest R at which the most-favourable fill still gives the member <= cap.
double max_excess_inverse(std::vector<UnitShare> units, double cap) {
  if (cap < 0.0) return -kInf;
  std::stable_sort(units.begin(), units.end(), [](const UnitShare& a, const UnitShare& b) { return a.ratio() > b.ratio(); });
  double r_acc = 0.0;
  double got = 0.0;
  for (const auto& u : units) {
    if (u.member_span > 0.0 && got + u.member_span > cap) return r_acc + (cap - got) / u.ratio();
    r_acc += u.pool_span;
    got += u.member_span;
  }
  return r_acc;
}

double sum_lower(const std::vector<EnergyBounds>& b) {
  return std::accumulate(b.begin(), b.end(), 0.0, [](double a, const EnergyBounds& e) { return a + e.lower; });
}
double sum_upper(const std::vector<EnergyBounds>& b) {
  return std::accumulate(b.begin(), b.end(), 0.0, [](double a, const EnergyBounds& e) { return a + e.upper; });
}

// Tighten single-slice bounds implied by the member's TEC.
std::vector<EnergyBounds> presolve(const FlexOffer& fo) {
  std::vector<EnergyBounds> b;
  for (const auto& sc : fo.profile) b.push_back(sc.energy);
  if (!fo.total_energy) return b;
  const double lo_sum = sum_lower(b);
  const double hi_sum = sum_upper(b);
  if (fo.total_energy->lower > hi_sum + kFeasibilityTolerance || fo.total_energy->upper < lo_sum - kFeasibilityTolerance) {
    throw ValidationError("member " + fo.id + " has an unsatisfiable total energy constraint");
  }
  for (auto& e : b) {
    const double lo = std::max(e.lower, fo.total_energy->lower - (hi_sum - e.upper));
    const double hi = std::min(e.upper, fo.total_energy->upper - (lo_sum - e.lower));
    e = {lo, std::max(lo, hi)};
  }
  return b;
}

// Shrink the member box until its TEC cannot bind.
void make_tec_redundant(AggregateMember& m) {
  if (!m.fo.total_energy) return;
  const double lo_sum = sum_lower(m.bounds);
  const double hi_sum = sum_upper(m.bounds);
  const double span = hi_sum - lo_sum;
  if (span <= 0.0) return;
  const double raise = std::max(0.0, (m.fo.total_energy->lower - lo_sum) / span);
  const double cut = std::max(0.0, (hi_sum - m.fo.total_energy->upper) / span);
  for (auto& e : m.bounds) {
    const double w = e.width();
    e = {e.lower + raise * w, std::max(e.lower + raise * w, e.upper - cut * w)};
  }
}

// Aggregate-excess interval keeping every TEC member feasible under the split.
std::optional<std::pair<double, double>> excess_window(const std::vector<AggregateMember>& members, const Pool& pool) {
  double lo = 0.0;
  double hi = std::accumulate(pool.span.begin(), pool.span.end(), 0.0);
  for (const auto& m : members) {
    if (!m.fo.total_energy) continue;
    const double base = sum_lower(m.bounds);
    const auto units = shares(m, pool);
    lo = std::max(lo, min_excess_inverse(units, m.fo.total_energy->lower - base));
    hi = std::min(hi, max_excess_inverse(units, m.fo.total_energy->upper - base));
  }
  if (lo > hi + kFeasibilityTolerance) return std::nullopt;
  return std::make_pair(lo, std::max(lo, hi));
}

std::string pool_id(const std::vector<FlexOffer>& fos) {
  std::string seed;
  for (const auto& fo : fos) seed += fo.id + '\n';
  return stable_id("aggregate", seed);
}

}  // namespace

AggregateBinding aggregate(const std::vector<FlexOffer>& fos) {
  if (fos.empty()) throw ValidationError("cannot aggregate an empty pool");
  const std::int64_t nsec = fos.front().num_seconds_per_interval;
  std::int64_t earliest = std::numeric_limits<std::int64_t>::max();
  for (const auto& fo : fos) {
    if (fo.kind() == FoKind::dfo || fo.kind() == FoKind::ufo) {
      throw UnsupportedInstance("aggregation of " + std::string(to_string(fo.kind())) + " members is not supported (" +
                                fo.id + ")");
    }
    if (fo.num_seconds_per_interval != nsec) throw ValidationError("members use different NumSecondsPerInterval");
    earliest = std::min(earliest, fo.effective_start_after_interval());
  }

  AggregateBinding binding;
  binding.members.reserve(fos.size());
  for (const auto& fo : fos) {
    binding.members.push_back({fo.id, fo.effective_start_after_interval() - earliest, fo, presolve(fo)});
  }

  Pool pool = sum_pool(binding.members);
  auto window = excess_window(binding.members, pool);
  if (!window) {
    for (auto& m : binding.members) make_tec_redundant(m);
    pool = sum_pool(binding.members);
    window = excess_window(binding.members, pool);
    if (!window) throw ValidationError("pool total energy constraints cannot be met jointly");
  }

  FlexOffer agg;
  const FlexOffer* first = &fos.front();
  for (const auto& fo : fos) {
    if (fo.effective_start_after_interval() == earliest) {
      first = &fo;
      break;
    }
  }
  agg.id = pool_id(fos);
  agg.state = LifecycleState::initial;
  agg.num_seconds_per_interval = nsec;
  agg.creation_time = std::max_element(fos.begin(), fos.end(), [](const FlexOffer& a, const FlexOffer& b) {
                        return a.creation_time < b.creation_time;
                      })->creation_time;
  agg.creation_interval = epoch_seconds(agg.creation_time) / nsec;
  agg.offered_by_id = "aggregator";
  agg.start_after_time = first->start_after_time;
  agg.start_before_time = first->start_after_time;
  agg.start_after_interval = earliest;
  agg.start_before_interval = earliest;
  for (std::size_t t = 0; t < pool.length; ++t) {
    const double lo = ceil6(pool.lower[t]);
    const double hi = std::max(lo, floor6(pool.lower[t] + pool.span[t]));
    agg.profile.push_back({{lo, hi}, std::nullopt, 1, 1});
  }
  const bool any_tec = std::any_of(fos.begin(), fos.end(), [](const FlexOffer& f) { return f.total_energy.has_value(); });
  if (any_tec) {
    const double base = std::accumulate(pool.lower.begin(), pool.lower.end(), 0.0);
    const double lo = ceil6(base + window->first);
    agg.total_energy = EnergyBounds{lo, std::max(lo, floor6(base + window->second))};
  }
  Json members = Json::array();
  for (const auto& m : binding.members) {
    Json j = Json::object();
    j["id"] = m.id;
    j["offset"] = m.offset;
    members.push_back(std::move(j));
  }
  agg.passthrough.push_back({kAggregateMembersKey, members.dump()});
  binding.aggregate_fo = std::move(agg);
  return binding;
}

std::vector<MemberSchedule> disaggregate(const AggregateBinding& binding, const Schedule& s) {
  const FeasibilityReport report = check_schedule(binding.aggregate_fo, s);
  if (!report.feasible) {
    throw ValidationError("aggregate schedule is infeasible: " + report.violations.front().describe());
  }
  const std::vector<double> total = energies(s);
  const Schedule unit = unit_expand(s);
  const Pool pool = sum_pool(binding.members);

  std::vector<std::vector<double>> alloc(binding.members.size());
  for (std::size_t i = 0; i < binding.members.size(); ++i) alloc[i].resize(binding.members[i].bounds.size());

  // members active at each unit
  std::vector<std::vector<std::size_t>> active(pool.length);
  for (std::size_t i = 0; i < binding.members.size(); ++i) {
    const auto& m = binding.members[i];
    for (std::size_t t = 0; t < m.bounds.size(); ++t) active[m.offset + t].push_back(i);
  }

  for (std::size_t t = 0; t < pool.length; ++t) {
    const double theta = pool.span[t] > 0.0 ? std::clamp((total[t] - pool.lower[t]) / pool.span[t], 0.0, 1.0) : 0.0;
    double assigned = 0.0;
    for (std::size_t i : active[t]) {
      const auto& b = binding.members[i].bounds[t - binding.members[i].offset];
      const double e = b.lower + theta * b.width();
      alloc[i][t - binding.members[i].offset] = e;
      assigned += e;
    }
    // residual (clamping and rounding) goes to the largest remaining headroom first
    double residual = total[t] - assigned;
    if (residual != 0.0 && !active[t].empty()) {
      std::vector<std::size_t> order = active[t];
      auto headroom = [&](std::size_t i) {
        const auto& b = binding.members[i].bounds[t - binding.members[i].offset];
        const double e = alloc[i][t - binding.members[i].offset];
        return residual > 0 ? b.upper - e : e - b.lower;
      };
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return headroom(a) > headroom(b); });
      for (std::size_t i : order) {
        const double move = residual > 0 ? std::min(residual, headroom(i)) : std::max(residual, -headroom(i));
        alloc[i][t - binding.members[i].offset] += move;
        residual -= move;
        if (residual == 0.0) break;
      }
      // anything left is float noise within tolerance; keep the unit sum exact
      alloc[order.front()][t - binding.members[order.front()].offset] += residual;
    }
  }

  std::vector<MemberSchedule> out;
  out.reserve(binding.members.size());
  for (std::size_t i = 0; i < binding.members.size(); ++i) {
    const auto& m = binding.members[i];
    std::vector<double> prices;
    bool priced = true;
    for (std::size_t t = 0; t < m.bounds.size(); ++t) {
      const auto& p = unit.slices[m.offset + t].price;
      if (!p) {
        priced = false;
        break;
      }
      prices.push_back(*p);
    }
    Schedule ms = make_schedule(alloc[i], ScheduleKind::flexoffer_schedule, m.fo.start_after_time, priced ? &prices : nullptr);
    const FeasibilityReport r = check_schedule(m.fo, ms);
    if (!r.feasible) throw Error("disaggregation produced an infeasible schedule for " + m.id + ": " + r.violations.front().describe());
    out.push_back({m.id, std::move(ms)});
  }
  return out;
}

}  // namespace flexkit
