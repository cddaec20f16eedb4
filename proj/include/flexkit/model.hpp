#pragma once

// Core FlexOffer types: per-slice energy bounds, total-energy constraints,
// dependency polygons (H-representation over cumulative/slice energy),
// uncertain probability functions, schedules and the lifecycle state.
//
// Energies are kWh, prices EUR or EUR/kWh, times are discrete time units of
// num_seconds_per_interval seconds.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flexkit {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// A row a*x + b*y <= c holds when a*x + b*y <= c + tolerance.
inline constexpr double kFeasibilityTolerance = 1e-9;

/// Parses "YYYY-MM-DDThh:mm:ss[.SSS](Z|+hhmm|+hh:mm)". Throws ParseError.
Timestamp parse_timestamp(std::string_view text);
/// Formats as "YYYY-MM-DDThh:mm:ss.SSS+0000" (always UTC).
std::string format_timestamp(Timestamp t);
std::int64_t epoch_seconds(Timestamp t);

enum class LifecycleState { initial, offered, accepted, rejected, assigned, executed, invalid, canceled };

std::string_view to_string(LifecycleState s);
/// Case-insensitive. Throws ValidationError for names outside the enumeration.
LifecycleState parse_state(std::string_view name);
bool is_terminal(LifecycleState s);

struct EnergyBounds {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double e, double tol = kFeasibilityTolerance) const {
    return e >= lower - tol && e <= upper + tol;
  }
  bool operator==(const EnergyBounds&) const = default;
};

struct PriceBounds {
  double min_price = 0.0;
  double max_price = 0.0;

  bool admits(double price) const { return price >= min_price && price <= max_price; }
  bool operator==(const PriceBounds&) const = default;
};

struct SliceConstraint {
  EnergyBounds energy;
  std::optional<PriceBounds> price;
  int min_duration = 1;
  int max_duration = 1;

  bool operator==(const SliceConstraint&) const = default;
};

struct HalfspaceRow {
  double a = 0.0;  // coefficient of cumulative prior energy x
  double b = 0.0;  // coefficient of slice energy y
  double c = 0.0;

  double lhs(double x, double y) const { return a * x + b * y; }
  bool holds(double x, double y, double tol = kFeasibilityTolerance) const { return lhs(x, y) <= c + tol; }
  bool operator==(const HalfspaceRow&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Convex polygon {(x, y) : every row holds}.
struct HalfspaceMatrix {
  std::vector<HalfspaceRow> rows;

  bool holds(double x, double y, double tol = kFeasibilityTolerance) const;
  /// Zero-based indices of the rows violated at (x, y).
  std::vector<std::size_t> violated_rows(double x, double y, double tol = kFeasibilityTolerance) const;
  /// Slice-energy interval admitted at cumulative energy x; nullopt if empty or unbounded.
  std::optional<EnergyBounds> y_range(double x) const;
  /// Vertices of the polygon clipped to [-clip, clip]^2, counter-clockwise; empty if infeasible.
  std::vector<Point2> vertices(double clip = 1e6) const;

  bool operator==(const HalfspaceMatrix&) const = default;
};

/// f(e) = clamp(min_i p_i(e), 0, 1) on domain; each polynomial lists
/// coefficients in ascending degree.
struct UncertainFunction {
  EnergyBounds domain;
  std::vector<std::vector<double>> polys;

  bool operator==(const UncertainFunction&) const = default;
};

struct GeoLocation {
  double longitude = 0.0;
  double latitude = 0.0;
  bool operator==(const GeoLocation&) const = default;
};

/// FlexOfferPriceConstraint entry: a price valid for a number of time units.
struct PriceSlice {
  int duration = 1;
  double price = 0.0;
  bool operator==(const PriceSlice&) const = default;
};

struct ScheduleSlice {
  int duration = 1;
  double energy_amount = 0.0;
  std::optional<double> price;  // EUR/kWh
  bool operator==(const ScheduleSlice&) const = default;
};

enum class ScheduleKind { default_schedule, flexoffer_schedule };

struct Schedule {
  std::int64_t schedule_id = 0;
  std::int64_t update_id = 0;
  std::optional<Timestamp> start_time;
  std::vector<ScheduleSlice> slices;
  ScheduleKind kind = ScheduleKind::default_schedule;

  double total_energy() const;
  bool operator==(const Schedule&) const = default;
};

/// Wire attribute the model does not interpret, kept as raw JSON text.
struct PassThrough {
  std::string key;
  std::string json;
  bool operator==(const PassThrough&) const = default;
};

enum class FoKind { sfo, tecfo, dfo, ufo };

std::string_view to_string(FoKind k);
/// Accepts "sfo", "tecfo", "dfo", "ufo" (any case).
FoKind parse_fo_kind(std::string_view name);

struct FlexOffer {
  std::string id;
  LifecycleState state = LifecycleState::initial;
  std::optional<std::string> state_reason;
  std::int64_t num_seconds_per_interval = 900;
  Timestamp creation_time{};
  std::optional<std::int64_t> creation_interval;
  std::string offered_by_id;
  std::optional<GeoLocation> location;

  std::optional<Timestamp> accept_before_time;
  std::optional<std::int64_t> accept_before_interval;
  std::optional<Timestamp> assignment_before_time;
  std::optional<std::int64_t> assignment_before_interval;
  Timestamp start_after_time{};
  Timestamp start_before_time{};
  std::optional<std::int64_t> start_after_interval;
  std::optional<std::int64_t> start_before_interval;
  std::optional<Timestamp> end_after_time;
  std::optional<std::int64_t> end_after_interval;
  std::optional<Timestamp> end_before_time;
  std::optional<std::int64_t> end_before_interval;

  std::vector<SliceConstraint> profile;
  std::optional<EnergyBounds> total_energy;
  /// Parsed and carried, never used by the optimizer.
  std::optional<EnergyBounds> total_cost;
  /// One matrix per slice when present.
  std::vector<HalfspaceMatrix> dependency;
  /// One function per slice when present.
  std::vector<UncertainFunction> uncertain;
  std::optional<double> uncertain_threshold;
  std::vector<PriceSlice> price_constraints;
  std::optional<Timestamp> price_constraint_start_time;

  std::optional<Schedule> default_schedule;
  std::optional<Schedule> flexoffer_schedule;

  std::vector<PassThrough> passthrough;

  std::size_t slice_count() const { return profile.size(); }
  FoKind kind() const;
  /// start_after_interval if set, otherwise derived from start_after_time.
  std::int64_t effective_start_after_interval() const;
  std::int64_t effective_start_before_interval() const;

  bool operator==(const FlexOffer&) const = default;
};

/// Throws ValidationError naming the first broken invariant.
void validate(const FlexOffer& fo);

/// emax_t - emin_t for the one-based slice index t. Throws RangeError.
double amount_flexibility(const FlexOffer& fo, std::size_t t);

/// Width of the start window in time units. Throws ValidationError if reversed.
std::int64_t time_flexibility(const FlexOffer& fo);

enum class ConstraintFamily { slice_bound, total_energy, dependency };

std::string_view to_string(ConstraintFamily f);

struct Violation {
  ConstraintFamily family = ConstraintFamily::slice_bound;
  std::size_t slice = 0;  // one-based; 0 for the total-energy constraint
  std::optional<std::size_t> row;  // one-based dependency row
  std::optional<HalfspaceRow> row_coefficients;
  double value = 0.0;  // evaluated left-hand side
  double bound = 0.0;  // violated bound

  std::string describe() const;
  bool operator==(const Violation&) const = default;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;

  bool operator==(const FeasibilityReport&) const = default;
};

/// Splits every slice of duration d into d unit slices carrying energy/d.
Schedule unit_expand(const Schedule& s);

/// Checks every slice bound, the TEC and every dependency row. Multi-unit
/// schedule slices are expanded first. Throws ShapeError when the expanded
/// schedule does not have one slice per profile entry.
FeasibilityReport check_schedule(const FlexOffer& fo, const Schedule& s, double tol = kFeasibilityTolerance);

/// Unit-slice energies of s (after unit_expand).
std::vector<double> energies(const Schedule& s);

/// Builds a unit-slice schedule from energies, optionally with per-unit prices.
Schedule make_schedule(std::vector<double> const& energies, ScheduleKind kind, std::optional<Timestamp> start = std::nullopt,
                       std::vector<double> const* prices = nullptr);

/// Round to 6 decimal places, the wire precision.
double round6(double v);
/// Smallest multiple of 1e-6 >= v (within float noise).
double ceil6(double v);
/// Largest multiple of 1e-6 <= v (within float noise).
double floor6(double v);

/// "<prefix>-<16 hex digits>" from a 64-bit FNV-1a hash of seed.
std::string stable_id(std::string_view prefix, std::string_view seed);

}  // namespace flexkit
