#include "flexkit/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "flexkit/errors.hpp"

namespace flexkit {

namespace {

constexpr std::array<std::string_view, 8> kStateNames = {"initial",  "offered",  "accepted", "rejected",
                                                         "assigned", "executed", "invalid",  "canceled"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char l, char r) {
           return std::tolower(static_cast<unsigned char>(l)) == std::tolower(static_cast<unsigned char>(r));
         });
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ParseError("malformed datetime: '" + std::string(s) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw ParseError("malformed datetime: '" + std::string(s) + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect_char(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) throw ParseError("malformed datetime: '" + std::string(s) + "'");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  const int y = digits(s, 0, 4);
  expect_char(s, 4, '-');
  const int mo = digits(s, 5, 2);
  expect_char(s, 7, '-');
  const int d = digits(s, 8, 2);
  if (s.size() <= 10 || (s[10] != 'T' && s[10] != ' ')) throw ParseError("malformed datetime: '" + std::string(s) + "'");
  const int hh = digits(s, 11, 2);
  expect_char(s, 13, ':');
  const int mm = digits(s, 14, 2);
  expect_char(s, 16, ':');
  const int ss = digits(s, 17, 2);
  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    int scale = 100;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) throw ParseError("malformed datetime: '" + std::string(s) + "'");
  }
  int offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    ++pos;
    const int oh = digits(s, pos, 2);
    pos += 2;
    if (pos < s.size() && s[pos] == ':') ++pos;
    const int om = digits(s, pos, 2);
    pos += 2;
    offset_minutes = sign * (oh * 60 + om);
  } else {
    throw ParseError("datetime lacks a UTC offset: '" + std::string(s) + "'");
  }
  if (pos != s.size()) throw ParseError("trailing characters in datetime: '" + std::string(s) + "'");

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) throw ParseError("datetime out of range: '" + std::string(s) + "'");
  const sys_days days{ymd};
  return time_point_cast<milliseconds>(days) + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis} -
         minutes{offset_minutes};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  auto rest = t - days;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto m = duration_cast<minutes>(rest);
  rest -= m;
  const auto sec = duration_cast<seconds>(rest);
  rest -= sec;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03d+0000", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(sec.count()), static_cast<int>(rest.count()));
  return buf;
}

std::int64_t epoch_seconds(Timestamp t) {
  return std::chrono::floor<std::chrono::seconds>(t).time_since_epoch().count();
}

std::string_view to_string(LifecycleState s) { return kStateNames[static_cast<std::size_t>(s)]; }

LifecycleState parse_state(std::string_view name) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (iequals(name, kStateNames[i])) return static_cast<LifecycleState>(i);
  }
  throw ValidationError("unknown FlexOffer state '" + std::string(name) + "'");
}

bool is_terminal(LifecycleState s) {
  return s == LifecycleState::rejected || s == LifecycleState::executed || s == LifecycleState::canceled ||
         s == LifecycleState::invalid;
}

std::string_view to_string(FoKind k) {
  switch (k) {
    case FoKind::sfo: return "SFO";
    case FoKind::tecfo: return "TECFO";
    case FoKind::dfo: return "DFO";
    case FoKind::ufo: return "UFO";
  }
  return "?";
}

FoKind parse_fo_kind(std::string_view name) {
  if (iequals(name, "sfo")) return FoKind::sfo;
  if (iequals(name, "tecfo")) return FoKind::tecfo;
  if (iequals(name, "dfo")) return FoKind::dfo;
  if (iequals(name, "ufo")) return FoKind::ufo;
  throw ValidationError("unknown FlexOffer kind '" + std::string(name) + "'");
}

std::string_view to_string(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::slice_bound: return "slice-bound";
    case ConstraintFamily::total_energy: return "total-energy";
    case ConstraintFamily::dependency: return "dependency";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// HalfspaceMatrix

bool HalfspaceMatrix::holds(double x, double y, double tol) const {
  return std::all_of(rows.begin(), rows.end(), [&](const HalfspaceRow& r) { return r.holds(x, y, tol); });
}

std::vector<std::size_t> HalfspaceMatrix::violated_rows(double x, double y, double tol) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].holds(x, y, tol)) out.push_back(i);
  }
  return out;
}

std::optional<EnergyBounds> HalfspaceMatrix::y_range(double x) const {
  double lo = -INFINITY;
  double hi = INFINITY;
  for (const auto& r : rows) {
    const double rhs = r.c - r.a * x;
    if (r.b > 0) {
      hi = std::min(hi, rhs / r.b);
    } else if (r.b < 0) {
      lo = std::max(lo, rhs / r.b);
    } else if (rhs < -kFeasibilityTolerance) {
      return std::nullopt;
    }
  }
  if (!finite(lo) || !finite(hi) || lo > hi + kFeasibilityTolerance) return std::nullopt;
  return EnergyBounds{lo, std::max(lo, hi)};
}

std::vector<Point2> HalfspaceMatrix::vertices(double clip) const {
  std::vector<Point2> poly = {{-clip, -clip}, {clip, -clip}, {clip, clip}, {-clip, clip}};
  for (const auto& r : rows) {
    if (poly.empty()) break;
    std::vector<Point2> next;
    next.reserve(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2& p = poly[i];
      const Point2& q = poly[(i + 1) % poly.size()];
      const double fp = r.lhs(p.x, p.y) - r.c;
      const double fq = r.lhs(q.x, q.y) - r.c;
      const bool pin = fp <= 0;
      const bool qin = fq <= 0;
      if (pin) next.push_back(p);
      if (pin != qin) {
        const double s = fp / (fp - fq);
        next.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
      }
    }
    poly = std::move(next);
  }
  return poly;
}

// ---------------------------------------------------------------------------
// Schedule helpers

double Schedule::total_energy() const {
  return std::accumulate(slices.begin(), slices.end(), 0.0,
                         [](double acc, const ScheduleSlice& s) { return acc + s.energy_amount; });
}

Schedule unit_expand(const Schedule& s) {
  Schedule out = s;
  out.slices.clear();
  for (const auto& sl : s.slices) {
    if (sl.duration <= 1) {
      out.slices.push_back({1, sl.energy_amount, sl.price});
      continue;
    }
    const double part = sl.energy_amount / sl.duration;
    for (int i = 0; i < sl.duration - 1; ++i) out.slices.push_back({1, part, sl.price});
    // last piece absorbs rounding so the slice total is preserved
    out.slices.push_back({1, sl.energy_amount - part * (sl.duration - 1), sl.price});
  }
  return out;
}

std::vector<double> energies(const Schedule& s) {
  const Schedule u = unit_expand(s);
  std::vector<double> e;
  e.reserve(u.slices.size());
  for (const auto& sl : u.slices) e.push_back(sl.energy_amount);
  return e;
}

Schedule make_schedule(std::vector<double> const& e, ScheduleKind kind, std::optional<Timestamp> start,
                       std::vector<double> const* prices) {
  Schedule s;
  s.kind = kind;
  s.start_time = start;
  s.slices.reserve(e.size());
  for (std::size_t t = 0; t < e.size(); ++t) {
    ScheduleSlice sl{1, e[t], std::nullopt};
    if (prices != nullptr && t < prices->size()) sl.price = (*prices)[t];
    s.slices.push_back(sl);
  }
  return s;
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

double ceil6(double v) {
  const double r = std::ceil(v * 1e6 - 1e-6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

double floor6(double v) {
  const double r = std::floor(v * 1e6 + 1e-6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

std::string stable_id(std::string_view prefix, std::string_view seed) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : seed) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(prefix) + "-" + buf;
}

// ---------------------------------------------------------------------------
// FlexOffer

FoKind FlexOffer::kind() const {
  if (!uncertain.empty()) return FoKind::ufo;
  if (!dependency.empty()) return FoKind::dfo;
  if (total_energy) return FoKind::tecfo;
  return FoKind::sfo;
}

std::int64_t FlexOffer::effective_start_after_interval() const {
  if (start_after_interval) return *start_after_interval;
  return floor_div(epoch_seconds(start_after_time), num_seconds_per_interval);
}

std::int64_t FlexOffer::effective_start_before_interval() const {
  if (start_before_interval) return *start_before_interval;
  return floor_div(epoch_seconds(start_before_time), num_seconds_per_interval);
}

void validate(const FlexOffer& fo) {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (fo.id.empty()) fail("missing mandatory attribute ID");
  if (fo.offered_by_id.empty()) fail("missing mandatory attribute OfferedByID");
  if (fo.num_seconds_per_interval <= 0) fail("NumSecondsPerInterval must be positive");
  if (fo.start_after_time > fo.start_before_time) fail("StartAfterTime is later than StartBeforeTime");
  if (fo.start_after_interval && fo.start_before_interval && *fo.start_after_interval > *fo.start_before_interval) {
    fail("StartAfterInterval is later than StartBeforeInterval");
  }
  if (fo.creation_interval &&
      *fo.creation_interval != floor_div(epoch_seconds(fo.creation_time), fo.num_seconds_per_interval)) {
    fail("CreationInterval is inconsistent with CreationTime / NumSecondsPerInterval");
  }
  if (fo.profile.empty()) fail("FlexOfferProfileConstraints must hold at least one profile constraint");

  for (std::size_t t = 0; t < fo.profile.size(); ++t) {
    const auto& sc = fo.profile[t];
    const std::string where = "slice " + std::to_string(t + 1) + ": ";
    if (!finite(sc.energy.lower) || !finite(sc.energy.upper)) fail(where + "energy bounds must be finite");
    if (sc.energy.lower > sc.energy.upper) fail(where + "energy lower bound exceeds upper bound");
    if (sc.min_duration <= 0 || sc.max_duration <= 0) fail(where + "durations must be positive");
    if (sc.min_duration > sc.max_duration) fail(where + "minDuration exceeds maxDuration");
    if (sc.price && sc.price->min_price > sc.price->max_price) fail(where + "minPrice exceeds maxPrice");
  }
  if (fo.total_energy) {
    if (!finite(fo.total_energy->lower) || !finite(fo.total_energy->upper)) fail("total energy bounds must be finite");
    if (fo.total_energy->lower > fo.total_energy->upper) fail("total energy lower bound exceeds upper bound");
  }
  if (!fo.dependency.empty() && !fo.uncertain.empty()) fail("a FlexOffer cannot carry both dependency and uncertain constraints");
  if (!fo.dependency.empty()) {
    if (fo.dependency.size() != fo.profile.size()) fail("dependency constraint count differs from profile length");
    for (std::size_t t = 0; t < fo.dependency.size(); ++t) {
      const auto& m = fo.dependency[t];
      const std::string where = "slice " + std::to_string(t + 1) + ": ";
      if (m.rows.empty()) fail(where + "dependency matrix has no rows");
      for (const auto& r : m.rows) {
        if (!finite(r.a) || !finite(r.b) || !finite(r.c)) fail(where + "dependency coefficients must be finite");
        if (t == 0 && r.a != 0.0) fail(where + "first-slice dependency rows must have a = 0");
      }
      if (t == 0) {
        // x is identically zero at the first slice
        bool has_lo = false;
        bool has_hi = false;
        for (const auto& r : m.rows) {
          has_lo |= r.b < 0;
          has_hi |= r.b > 0;
        }
        if (!has_lo || !has_hi) fail(where + "dependency polygon is unbounded in y");
      } else {
        constexpr double clip = 1e6;
        for (const auto& v : m.vertices(clip)) {
          if (std::abs(v.y) >= clip * 0.5) fail(where + "dependency polygon is unbounded in y");
        }
      }
    }
  }
  if (!fo.uncertain.empty()) {
    if (fo.uncertain.size() != fo.profile.size()) fail("uncertain function count differs from profile length");
    for (std::size_t t = 0; t < fo.uncertain.size(); ++t) {
      const auto& f = fo.uncertain[t];
      const std::string where = "slice " + std::to_string(t + 1) + ": ";
      if (f.polys.empty()) fail(where + "uncertain function has no polynomials");
      if (f.domain.lower > f.domain.upper) fail(where + "uncertain domain is reversed");
      for (const auto& p : f.polys) {
        if (p.empty()) fail(where + "polynomial without coefficients");
        if (p.size() > 4) fail(where + "polynomial degree exceeds 3");
        for (double c : p) {
          if (!finite(c)) fail(where + "polynomial coefficients must be finite");
        }
      }
    }
  }
  if (fo.uncertain_threshold && (*fo.uncertain_threshold < 0.0 || *fo.uncertain_threshold > 1.0)) {
    fail("uncertain threshold must lie in [0, 1]");
  }
  for (const auto* sched : {&fo.default_schedule, &fo.flexoffer_schedule}) {
    if (!*sched) continue;
    if ((*sched)->slices.empty()) fail("a schedule consists of at least one slice");
    for (const auto& sl : (*sched)->slices) {
      if (sl.duration <= 0) fail("schedule slice durations must be positive");
      if (!finite(sl.energy_amount)) fail("schedule energy amounts must be finite");
    }
  }
}

double amount_flexibility(const FlexOffer& fo, std::size_t t) {
  if (t < 1 || t > fo.profile.size()) {
    throw RangeError("slice index " + std::to_string(t) + " outside 1.." + std::to_string(fo.profile.size()));
  }
  return fo.profile[t - 1].energy.width();
}

std::int64_t time_flexibility(const FlexOffer& fo) {
  const std::int64_t after = fo.effective_start_after_interval();
  const std::int64_t before = fo.effective_start_before_interval();
  if (before < after) throw ValidationError("StartBefore precedes StartAfter");
  return before - after;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  if (family == ConstraintFamily::total_energy) {
    os << "total-energy: sum " << value << " outside bound " << bound;
    return os.str();
  }
  os << "slice " << slice << ": " << to_string(family);
  if (row && row_coefficients) {
    os.unsetf(std::ios::fixed);
    os << " row " << *row << " [" << row_coefficients->a << ", " << row_coefficients->b << ", " << row_coefficients->c
       << "]";
    os << std::fixed;
  }
  os << " violated (" << value << " vs " << bound << ")";
  return os.str();
}

FeasibilityReport check_schedule(const FlexOffer& fo, const Schedule& s, double tol) {
  const std::vector<double> e = energies(s);
  if (e.size() != fo.profile.size()) {
    throw ShapeError("schedule has " + std::to_string(e.size()) + " unit slices, FlexOffer profile has " +
                     std::to_string(fo.profile.size()));
  }
  FeasibilityReport report;
  auto add = [&](Violation v) {
    report.feasible = false;
    report.violations.push_back(std::move(v));
  };
  double x = 0.0;
  for (std::size_t t = 0; t < e.size(); ++t) {
    const EnergyBounds& b = fo.profile[t].energy;
    if (e[t] < b.lower - tol) add({ConstraintFamily::slice_bound, t + 1, std::nullopt, std::nullopt, e[t], b.lower});
    if (e[t] > b.upper + tol) add({ConstraintFamily::slice_bound, t + 1, std::nullopt, std::nullopt, e[t], b.upper});
    if (!fo.dependency.empty()) {
      const auto& rows = fo.dependency[t].rows;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].holds(x, e[t], tol)) {
          add({ConstraintFamily::dependency, t + 1, r + 1, rows[r], rows[r].lhs(x, e[t]), rows[r].c});
        }
      }
    }
    x += e[t];
  }
  if (fo.total_energy) {
    if (x < fo.total_energy->lower - tol) add({ConstraintFamily::total_energy, 0, std::nullopt, std::nullopt, x, fo.total_energy->lower});
    if (x > fo.total_energy->upper + tol) add({ConstraintFamily::total_energy, 0, std::nullopt, std::nullopt, x, fo.total_energy->upper});
  }
  return report;
}

}  // namespace flexkit
