#pragma once

// Shared helpers for the unit tests and the acceptance runner: fixture
// loading, small FlexOffer builders, random instance generators and an
// independent grid brute force over cumulative energy.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flexkit/codec.hpp"
#include "flexkit/model.hpp"
#include "flexkit/optimize.hpp"

namespace testkit {

using namespace flexkit;

inline std::string fixture_path(const std::string& name) { return std::string(FLEXKIT_FIXTURE_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline FlexOffer load_fixture(const std::string& name) { return parse_message(read_text(fixture_path(name))); }

inline const PriceCurve kExamplePrices{0.05, 0.1, 0.1, 0.03, 0.03, 0.05, 0.07, 0.07};
inline const std::vector<double> kExampleSchedule{0.423, 0.403, 0.388, 0.433, 0.353, 0.393, 0.433, 0.413};

/// Minimal valid FO with one constraint per unit, starting at interval `start`.
inline FlexOffer box_fo(const std::string& id, const std::vector<EnergyBounds>& bounds,
                        std::optional<EnergyBounds> tec = std::nullopt, std::int64_t start = 0) {
  FlexOffer fo;
  fo.id = id;
  fo.offered_by_id = "owner-" + id;
  fo.num_seconds_per_interval = 900;
  fo.creation_time = Timestamp{std::chrono::seconds(900 * std::max<std::int64_t>(start - 1, 0))};
  fo.creation_interval = std::max<std::int64_t>(start - 1, 0);
  fo.start_after_time = Timestamp{std::chrono::seconds(900 * start)};
  fo.start_before_time = fo.start_after_time;
  fo.start_after_interval = start;
  fo.start_before_interval = start;
  for (const auto& b : bounds) fo.profile.push_back({b, std::nullopt, 1, 1});
  fo.total_energy = tec;
  return fo;
}

inline double grid(double v) { return std::round(v * 1000.0) / 1000.0; }

/// Random SFO or TECFO: T slices, spans <= max_span, values on a 0.001 grid.
/// The TEC, when present, is a random sub-interval of the box totals.
inline FlexOffer random_box_fo(std::mt19937_64& rng, const std::string& id, std::size_t T, bool with_tec,
                               double max_span = 0.2, std::int64_t start = 0) {
  std::uniform_real_distribution<double> lo_d(0.0, 0.6), span_d(0.0, max_span), u(0.0, 1.0);
  std::vector<EnergyBounds> b;
  double lo_sum = 0.0, hi_sum = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double lo = grid(lo_d(rng));
    const double hi = grid(lo + span_d(rng));
    b.push_back({lo, hi});
    lo_sum += lo;
    hi_sum += hi;
  }
  std::optional<EnergyBounds> tec;
  if (with_tec) {
    double a = grid(lo_sum + u(rng) * (hi_sum - lo_sum));
    double c = grid(lo_sum + u(rng) * (hi_sum - lo_sum));
    if (a > c) std::swap(a, c);
    tec = EnergyBounds{a, c};
  }
  return box_fo(id, b, tec, start);
}

/// Random DFO built around a grid point `center`: every coupling row keeps
/// a random margin at the center, so the polygons are never thin.
inline FlexOffer random_dfo(std::mt19937_64& rng, const std::string& id, std::size_t T, double max_span = 0.2) {
  std::uniform_real_distribution<double> lo_d(0.0, 0.6), span_d(0.02, max_span), coef(-0.3, 0.3), margin(0.005, 0.08),
      u(0.0, 1.0);
  std::vector<EnergyBounds> b;
  std::vector<double> center;
  for (std::size_t t = 0; t < T; ++t) {
    const double lo = grid(lo_d(rng));
    const double hi = grid(lo + span_d(rng));
    b.push_back({lo, hi});
    center.push_back(grid(lo + u(rng) * (hi - lo)));
  }
  FlexOffer fo = box_fo(id, b);
  double x = 0.0;
  double xlo = 0.0, xhi = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    HalfspaceMatrix m;
    m.rows.push_back({0, -1, -b[t].lower});
    m.rows.push_back({0, 1, b[t].upper});
    if (t > 0) {
      m.rows.push_back({-1, 0, -xlo});
      m.rows.push_back({1, 0, xhi});
      const int couplings = 1 + static_cast<int>(u(rng) * 2.0);
      for (int k = 0; k < couplings; ++k) {
        const double a = grid(coef(rng));
        const double sign = u(rng) < 0.5 ? 1.0 : -1.0;
        HalfspaceRow r{sign * a, sign * 1.0, 0.0};
        r.c = grid(r.lhs(x, center[t]) + margin(rng));
        m.rows.push_back(r);
      }
    }
    fo.dependency.push_back(m);
    x += center[t];
    xlo += b[t].lower;
    xhi += b[t].upper;
  }
  return fo;
}

inline std::vector<double> random_prices(std::mt19937_64& rng, std::size_t T, double lo = 0.01, double hi = 0.15) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> p(T);
  for (auto& v : p) v = grid(d(rng));
  return p;
}

/// Cheapest schedule over energies on a 0.001-kWh grid, as a DP over the
/// cumulative energy (integer milli-kWh). Checks slice bounds, the TEC and
/// dependency rows directly from the FO fields; +inf when nothing fits.
inline double grid_brute_force(const FlexOffer& fo, const PriceCurve& prices) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t T = fo.profile.size();
  auto milli = [](double v) { return static_cast<long>(std::llround(v * 1000.0)); };
  std::vector<long> lo(T), hi(T);
  long xmax = 0;
  for (std::size_t t = 0; t < T; ++t) {
    lo[t] = milli(std::ceil(fo.profile[t].energy.lower * 1000.0 - 1e-9) / 1000.0);
    hi[t] = milli(std::floor(fo.profile[t].energy.upper * 1000.0 + 1e-9) / 1000.0);
    xmax += std::max(hi[t], 0L);
  }
  std::vector<double> best(static_cast<std::size_t>(xmax) + 1, kInf), next;
  best[0] = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    next.assign(best.size(), kInf);
    for (long x = 0; x <= xmax; ++x) {
      if (best[x] == kInf) continue;
      for (long y = lo[t]; y <= hi[t]; ++y) {
        if (x + y > xmax) break;
        bool ok = true;
        if (!fo.dependency.empty()) {
          for (const auto& r : fo.dependency[t].rows) {
            if (r.a * (x / 1000.0) + r.b * (y / 1000.0) > r.c + 1e-9) {
              ok = false;
              break;
            }
          }
        }
        if (!ok) continue;
        const double c = best[x] + prices[t] * (y / 1000.0);
        if (c < next[x + y]) next[x + y] = c;
      }
    }
    best.swap(next);
  }
  double out = kInf;
  for (long x = 0; x <= xmax; ++x) {
    if (best[x] == kInf) continue;
    if (fo.total_energy && !fo.total_energy->contains(x / 1000.0, 1e-9)) continue;
    out = std::min(out, best[x]);
  }
  return out;
}

}  // namespace testkit
