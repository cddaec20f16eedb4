// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "flexkit/aggregate.hpp"
#include "flexkit/errors.hpp"
#include "flexkit/heatpump.hpp"
#include "flexkit/lifecycle.hpp"
#include "flexkit/metric.hpp"
#include "flexkit/rdf.hpp"
#include "flexkit/uncertain.hpp"
#include "support.hpp"
#include "turtle.hpp"

using namespace flexkit;
using testkit::kExamplePrices;
using testkit::load_fixture;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c, double d) {
  char buf[240];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome codec_fidelity() {
  const auto t0 = Clock::now();
  for (const char* name : {"sfo.json", "tecfo.json", "dfo.json", "ufo.json"}) {
    const std::string text = testkit::read_text(testkit::fixture_path(name));
    const FlexOffer a = parse_message(text);
    const std::string again = serialize_message(a);
    const FlexOffer b = parse_message(again);
    if (!(a == b)) return {false, std::string(name) + " re-parses to a different value"};
    if (again != text) return {false, std::string(name) + " canonical bytes differ"};
    if (serialize_message(b) != again) return {false, std::string(name) + " second round trip differs"};
  }
  const double s = seconds_since(t0);
  return {s < 1.0, fmt("4 fixtures byte-exact, %.3f s", s)};
}

Outcome running_example_physics() {
  const double e = steady_state_energy(HeatPumpModel{});
  const bool ok = std::abs(e - 1.44 / 3.65) < 1e-12 && std::abs(e - 0.395) <= 0.001;
  return {ok, fmt("steady state %.6f kWh, |E - 0.395| = %.6f", e, std::abs(e - 0.395))};
}

Outcome feasibility() {
  const FlexOffer fo = load_fixture("tecfo.json");
  const Schedule& s = *fo.default_schedule;
  double sum = 0.0;
  for (double e : energies(s)) sum += e;
  if (!check_schedule(fo, s).feasible) return {false, "default schedule reported infeasible"};
  for (std::size_t t = 0; t < s.slices.size(); ++t) {
    Schedule p = s;
    p.slices[t].energy_amount = 0.478 + 0.06;
    const FeasibilityReport r = check_schedule(fo, p);
    if (r.feasible) return {false, "perturbed slice " + std::to_string(t + 1) + " still feasible"};
    bool named = false;
    for (const auto& v : r.violations) named = named || (v.family == ConstraintFamily::slice_bound && v.slice == t + 1);
    if (!named) return {false, "perturbed slice " + std::to_string(t + 1) + " not named"};
  }
  return {std::abs(sum - 3.239) < 1e-9, fmt("default schedule sum %.3f feasible; 8/8 perturbations flagged", sum)};
}

Outcome dfo_membership() {
  const FlexOffer fo = load_fixture("dfo.json");
  const HalfspaceMatrix& m = fo.dependency.at(3);
  if (m.rows.size() != 6) return {false, "slice 4 has " + std::to_string(m.rows.size()) + " rows"};
  if (!m.violated_rows(1.1, 0.4).empty()) return {false, "(1.1, 0.4) violates a row"};
  const auto bad = m.violated_rows(1.3, 0.4);
  const bool ok = bad.size() == 1 && m.rows[bad[0]] == HalfspaceRow{1, 0, 1.246};
  std::string named;
  for (auto i : bad) named += " row " + std::to_string(i + 1);
  return {ok, "(1.1, 0.4) holds all 6 rows; (1.3, 0.4) fails" + named + " [1, 0, 1.246]"};
}

Outcome ufo_thresholding() {
  const FlexOffer fo = load_fixture("ufo.json");
  const UncertainFunction& f = fo.uncertain.at(1);
  const auto one = threshold_intervals(f, 1.0);
  const auto zero = threshold_intervals(f, 0.0);
  if (one.size() != 1 || zero.size() != 1) return {false, "expected single intervals"};
  // roots of the two linear pieces
  const double lo1 = (20.6 + 1.0) / 66.67, hi1 = (29.467 - 1.0) / 66.67;
  const double lo0 = 20.6 / 66.67, hi0 = 29.467 / 66.67;
  const double err = std::max({std::abs(one[0].lower - lo1), std::abs(one[0].upper - hi1), std::abs(one[0].lower - 0.324),
                               std::abs(one[0].upper - 0.427), std::abs(zero[0].lower - 0.309),
                               std::abs(zero[0].upper - 0.442), std::abs(zero[0].lower - std::max(lo0, 0.309)),
                               std::abs(zero[0].upper - std::min(hi0, 0.442))});
  return {err <= 1e-3, fmt("p0=1 [%.6f, %.6f], p0=0 [%.6f, %.6f]", one[0].lower, one[0].upper, zero[0].lower,
                           zero[0].upper)};
}

Outcome optimizer_vs_oracle() {
  std::mt19937_64 rng(20190402);
  double worst_grid = 0.0, worst_greedy = 0.0;
  int tecfo = 0, dfo = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t T = 1 + static_cast<std::size_t>(i % 4);
    const bool is_dfo = i % 2 == 1;
    const FlexOffer fo =
        is_dfo ? testkit::random_dfo(rng, "dfo", T) : testkit::random_box_fo(rng, "tecfo", T, true);
    const PriceCurve p = testkit::random_prices(rng, T, -0.05, 0.15);
    const OptimizationResult lp = optimize_lp(fo, p);
    const double brute = testkit::grid_brute_force(fo, p);
    if (lp.status != OptStatus::optimal || !std::isfinite(brute)) return {false, "instance " + std::to_string(i) + " infeasible"};
    if (!check_schedule(fo, lp.schedule).feasible) return {false, "simplex schedule infeasible on " + std::to_string(i)};
    worst_grid = std::max(worst_grid, std::abs(lp.objective - brute));
    if (is_dfo) {
      ++dfo;
    } else {
      ++tecfo;
      worst_greedy = std::max(worst_greedy, std::abs(optimize_tecfo(fo, p).objective - lp.objective));
    }
  }
  const bool ok = worst_grid <= 1e-3 && worst_greedy <= 1e-9;
  return {ok, std::to_string(tecfo) + " TECFO + " + std::to_string(dfo) + " DFO; " +
                  fmt("max |simplex - grid| %.2e EUR, max |greedy - simplex| %.2e EUR", worst_grid, worst_greedy)};
}

Outcome aggregation_conservation() {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size_d(1, 10), len_d(1, 8), start_d(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int pools = 0, schedules = 0, regenerated = 0;
  while (pools < 100) {
    std::vector<FlexOffer> pool;
    const int n = size_d(rng);
    for (int i = 0; i < n; ++i) {
      pool.push_back(testkit::random_box_fo(rng, "p" + std::to_string(pools) + "m" + std::to_string(i), len_d(rng),
                                            u(rng) < 0.5, 0.3, start_d(rng)));
    }
    AggregateBinding bind;
    try {
      bind = aggregate(pool);
    } catch (const ValidationError&) {
      ++regenerated;  // member TECs that no joint schedule satisfies
      continue;
    }
    ++pools;
    const std::size_t T = bind.aggregate_fo.slice_count();
    std::vector<std::vector<double>> vertices;
    for (int k = 0; k < 3; ++k) {
      const OptimizationResult r = optimize(bind.aggregate_fo, testkit::random_prices(rng, T, -0.2, 0.2));
      if (r.status != OptStatus::optimal) return {false, "aggregate without a feasible schedule"};
      vertices.push_back(energies(r.schedule));
    }
    // the vertices and a random convex combination of them
    std::vector<double> w{u(rng), u(rng), u(rng)};
    const double ws = w[0] + w[1] + w[2];
    std::vector<double> mix(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (int k = 0; k < 3; ++k) mix[t] += w[k] / ws * vertices[k][t];
    }
    vertices.push_back(mix);
    for (const auto& e : vertices) {
      const Schedule s = make_schedule(e, ScheduleKind::flexoffer_schedule);
      const auto parts = disaggregate(bind, s);
      std::vector<double> sum(T, 0.0);
      for (std::size_t m = 0; m < parts.size(); ++m) {
        if (!check_schedule(pool[m], parts[m].schedule).feasible) return {false, "member " + parts[m].id + " infeasible"};
        const auto me = energies(parts[m].schedule);
        for (std::size_t t = 0; t < me.size(); ++t) sum[bind.members[m].offset + t] += me[t];
      }
      for (std::size_t t = 0; t < T; ++t) worst = std::max(worst, std::abs(sum[t] - e[t]));
      ++schedules;
    }
  }
  return {worst <= 1e-9, std::to_string(pools) + " pools, " + std::to_string(schedules) + " aggregate schedules (" +
                             std::to_string(regenerated) + " jointly infeasible pools redrawn); " +
                             fmt("max unit imbalance %.2e kWh", worst)};
}

Outcome retention_ordering() {
  const HeatPumpModel m;
  const ExactOracle oracle(m);
  const PriceCurve negative{0.05, -0.02, 0.1, 0.03, -0.01, 0.05, 0.07, 0.07};
  std::string detail;
  bool ok = true;
  for (const PriceCurve* p : {&kExamplePrices, &negative}) {
    const auto rows = heatpump_metric(m, *p);
    const double oracle_profit = rows[0].baseline_cost - oracle.min_cost(*p);
    const double sfo = rows[0].profit, tec = rows[1].profit, dfo = rows[2].profit;
    ok = ok && sfo <= tec + 1e-12 && tec <= dfo + 1e-12 && dfo <= oracle_profit * 1.02;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%sSFO %.6f <= TECFO %.6f <= DFO %.6f <= oracle %.6f x 1.02", detail.empty() ? "" : "; ",
                  sfo, tec, dfo, oracle_profit);
    detail += buf;
  }
  return {ok, detail};
}

Outcome lifecycle() {
  FlexOffer base = load_fixture("sfo.json");
  int checked = 0;
  for (LifecycleState from : kAllStates) {
    for (EventKind ev : kAllEvents) {
      FlexOffer fo = base;
      fo.state = from;
      Event e{ev, {}, {}};
      if (ev == EventKind::reject || ev == EventKind::invalidate || ev == EventKind::cancel) e.reason = "r";
      if (ev == EventKind::assign) e.schedule = *fo.default_schedule;
      const auto target = transition_target(from, ev);
      // expected table
      using S = LifecycleState;
      using E = EventKind;
      const bool live = from == S::initial || from == S::offered || from == S::accepted || from == S::assigned;
      std::optional<S> want;
      if (from == S::initial && ev == E::offer) want = S::offered;
      if (from == S::offered && ev == E::accept) want = S::accepted;
      if (from == S::offered && ev == E::reject) want = S::rejected;
      if ((from == S::accepted || from == S::assigned) && ev == E::assign) want = S::assigned;
      if (from == S::assigned && ev == E::execute) want = S::executed;
      if (live && ev == E::cancel) want = S::canceled;
      if (live && ev == E::invalidate) want = S::invalid;
      if (target != want) return {false, std::string("table mismatch at ") + std::string(to_string(from))};
      try {
        const FlexOffer next = apply(fo, e);
        if (!want || next.state != *want) return {false, "apply mismatch"};
      } catch (const InvalidTransition&) {
        if (want) return {false, "apply rejected an allowed event"};
      }
      ++checked;
    }
  }
  int replays = 0;
  const PriceCurve negative{0.05, -0.02, 0.1, 0.03, -0.01, 0.05, 0.07, 0.07};
  for (const PriceCurve* p : {&kExamplePrices, &negative}) {
    for (const char* policy : {"accept-all", "min-flex:2", "min-flex:1000"}) {
      for (FoKind kind : {FoKind::sfo, FoKind::tecfo}) {
        const ExchangeLog log = run_exchange(std::vector<HeatPumpModel>(3), *p, parse_policy(policy), kind);
        const auto re = replay(log.lines);
        for (const auto& fo : log.final_fos) {
          const auto it = re.find(fo.id);
          if (it == re.end() || !(it->second == fo)) return {false, "replay differs for " + fo.id};
        }
        ++replays;
      }
    }
  }
  const ExchangeLog log = run_exchange(std::vector<HeatPumpModel>(3), kExamplePrices, Policy::accept_all());
  std::vector<double> sum(8, 0.0);
  int executed = 0;
  for (const auto& fo : log.final_fos) {
    executed += fo.state == LifecycleState::executed;
    const auto e = energies(*fo.flexoffer_schedule);
    for (std::size_t t = 0; t < e.size(); ++t) sum[t] += e[t];
  }
  std::vector<FlexOffer> fos;
  for (int i = 1; i <= 3; ++i) {
    GenerationOptions o;
    o.id = "prosumer-" + std::to_string(i) + "-fo";
    fos.push_back(generate_fo(HeatPumpModel{}, FoKind::sfo, o));
  }
  const OptimizationResult opt = optimize(aggregate(fos).aggregate_fo, kExamplePrices);
  double worst = 0.0;
  const auto agg = energies(opt.schedule);
  for (std::size_t t = 0; t < 8; ++t) worst = std::max(worst, std::abs(sum[t] - agg[t]));
  const bool ok = executed == 3 && worst <= 1e-9;
  return {ok, std::to_string(checked) + " state x event pairs, " + std::to_string(replays) + " replayed logs, " +
                  std::to_string(executed) + "/3 executed, " + fmt("max |sum - optimum| %.2e kWh", worst)};
}

Outcome rdf() {
  int triples = 0;
  for (const char* name : {"sfo.json", "tecfo.json", "dfo.json", "ufo.json"}) {
    try {
      triples += static_cast<int>(turtle::parse(fo_to_turtle(load_fixture(name))).size());
    } catch (const turtle::SyntaxError& e) {
      return {false, std::string(name) + ": " + e.what()};
    }
  }
  auto dco_only = [](const std::vector<CoverageRow>& rows) {
    int n = 0;
    for (const auto& r : rows) n += r.constraint && r.status == Coverage::dco_only;
    return n;
  };
  const int d = dco_only(saref_coverage(load_fixture("dfo.json")));
  const int u = dco_only(saref_coverage(load_fixture("ufo.json")));
  bool state = false;
  for (const auto& r : saref_coverage(load_fixture("sfo.json"))) {
    if (r.attribute == "State") state = r.status == Coverage::mapped && r.target == "s4ener:PowerSequenceState";
  }
  return {d >= 1 && u >= 1 && state, std::to_string(triples) + " triples re-parsed; dco-only constraint rows DFO " +
                                         std::to_string(d) + ", UFO " + std::to_string(u) +
                                         (state ? "; SFO State -> s4ener:PowerSequenceState" : "; SFO State not mapped")};
}

Outcome throughput() {
  std::mt19937_64 rng(10000);
  std::vector<FlexOffer> fos;
  fos.reserve(10000);
  for (int i = 0; i < 10000; ++i) fos.push_back(testkit::random_box_fo(rng, "sfo-" + std::to_string(i), 8, false));
  const auto t0 = Clock::now();
  const AggregateBinding bind = aggregate(fos);
  const OptimizationResult r = optimize(bind.aggregate_fo, kExamplePrices);
  const auto parts = disaggregate(bind, r.schedule);
  const double s = seconds_since(t0);
  return {parts.size() == 10000 && s < 5.0, fmt("10000 x 8-slice SFOs in %.3f s", s)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"codec fidelity", codec_fidelity},
      {"running-example physics", running_example_physics},
      {"feasibility", feasibility},
      {"DFO membership", dfo_membership},
      {"UFO thresholding", ufo_thresholding},
      {"optimizer vs oracle", optimizer_vs_oracle},
      {"aggregation conservation", aggregation_conservation},
      {"retention ordering", retention_ordering},
      {"lifecycle", lifecycle},
      {"RDF", rdf},
      {"desk-scale throughput", throughput},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
