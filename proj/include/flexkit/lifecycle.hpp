#pragma once

// FlexOffer lifecycle state machine and a synchronous prosumer/aggregator
// exchange that logs every message and transition as JSON lines.
//
//   initial  --offer-->   offered
//   offered  --accept-->  accepted      offered --reject(reason)--> rejected
//   accepted --assign-->  assigned      assigned --assign--> assigned (update_id + 1)
//   assigned --execute--> executed
//   initial|offered|accepted|assigned --cancel-->     canceled
//   initial|offered|accepted|assigned --invalidate--> invalid
//
// rejected, executed, canceled and invalid absorb nothing: every event on
// them is an InvalidTransition.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/heatpump.hpp"
#include "flexkit/model.hpp"
#include "flexkit/optimize.hpp"

namespace flexkit {

enum class EventKind { offer, accept, reject, assign, execute, cancel, invalidate };

inline constexpr EventKind kAllEvents[] = {EventKind::offer,   EventKind::accept, EventKind::reject,
                                           EventKind::assign,  EventKind::execute, EventKind::cancel,
                                           EventKind::invalidate};
inline constexpr LifecycleState kAllStates[] = {LifecycleState::initial,  LifecycleState::offered,
                                                LifecycleState::accepted, LifecycleState::rejected,
                                                LifecycleState::assigned, LifecycleState::executed,
                                                LifecycleState::invalid,  LifecycleState::canceled};

std::string_view to_string(EventKind e);
/// Throws ValidationError for unknown names.
EventKind parse_event_kind(std::string_view name);

struct Event {
  EventKind kind = EventKind::offer;
  std::optional<std::string> reason;    // reject, cancel, invalidate
  std::optional<Schedule> schedule;     // assign

  static Event offer() { return {EventKind::offer, {}, {}}; }
  static Event accept() { return {EventKind::accept, {}, {}}; }
  static Event reject(std::string reason) { return {EventKind::reject, std::move(reason), {}}; }
  static Event assign(Schedule s) { return {EventKind::assign, {}, std::move(s)}; }
  static Event execute() { return {EventKind::execute, {}, {}}; }
  static Event cancel(std::optional<std::string> reason = {}) { return {EventKind::cancel, std::move(reason), {}}; }
  static Event invalidate(std::string reason) { return {EventKind::invalidate, std::move(reason), {}}; }
};

/// Target of the transition table, nullopt when the event is not allowed.
std::optional<LifecycleState> transition_target(LifecycleState from, EventKind e);

/// Returns the FO after the event. An accept after accept_before_time or an
/// assign after assignment_before_time (with `now` given) invalidates instead.
/// Throws InvalidTransition for events outside the table and ValidationError
/// for an assign whose schedule is infeasible; fo itself is never modified.
FlexOffer apply(const FlexOffer& fo, const Event& e, std::optional<Timestamp> now = std::nullopt);

struct Policy {
  enum class Kind { accept_all, min_flexibility } kind = Kind::accept_all;
  double threshold_kwh = 0.0;  // sum of per-slice amount flexibility

  static Policy accept_all() { return {}; }
  static Policy min_flexibility(double kwh) { return {Kind::min_flexibility, kwh}; }
  bool accepts(const FlexOffer& fo) const;
};

/// Parses "accept-all" or "min-flex:<kWh>". Throws ValidationError.
Policy parse_policy(std::string_view text);

struct ExchangeLog {
  /// One JSON object per line, in processing order.
  std::vector<std::string> lines;
  std::vector<FlexOffer> final_fos;
  std::optional<Schedule> aggregate_schedule;
  double aggregate_objective = 0.0;
};

/// Every prosumer generates an FO of the given kind and offers it; the
/// aggregator applies the policy, aggregates the accepted FOs, optimizes,
/// disaggregates, assigns and executes. Failures after acceptance invalidate
/// the affected FOs.
ExchangeLog run_exchange(const std::vector<HeatPumpModel>& prosumers, const PriceCurve& prices, const Policy& policy,
                         FoKind kind = FoKind::sfo);

std::string to_jsonl(const ExchangeLog& log);

/// Rebuilds every FO from the "created" messages and re-applies the logged
/// transitions. Throws ValidationError when a logged target state differs.
std::map<std::string, FlexOffer> replay(const std::vector<std::string>& lines);

}  // namespace flexkit
