#include "flexkit/lifecycle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "flexkit/aggregate.hpp"
#include "flexkit/codec.hpp"
#include "flexkit/errors.hpp"

namespace flexkit {

namespace {

using S = LifecycleState;

bool live(S s) { return !is_terminal(s); }

class Recorder {
 public:
  explicit Recorder(ExchangeLog& log) : log_(log) {}

  void created(const FlexOffer& fo) {
    Json j = entry("message");
    j["kind"] = "created";
    j["flexOffer"] = to_json(fo)["flexOffer"];
    push(std::move(j));
  }

  void message(std::string_view kind, std::string_view from, std::string_view to, const Json& body) {
    Json j = entry("message");
    j["kind"] = kind;
    j["from"] = from;
    j["to"] = to;
    j["body"] = body;
    push(std::move(j));
  }

  void transition(const FlexOffer& before, const Event& e, const FlexOffer& after) {
    Json j = entry("transition");
    j["id"] = before.id;
    j["event"] = to_string(e.kind);
    j["from"] = to_string(before.state);
    j["to"] = to_string(after.state);
    if (e.reason) j["reason"] = *e.reason;
    if (e.schedule) j["schedule"] = serialize_schedule(*e.schedule, true);
    push(std::move(j));
  }

 private:
  Json entry(std::string_view type) {
    Json j = Json::object();
    j["seq"] = ++seq_;
    j["type"] = type;
    return j;
  }
  void push(Json j) { log_.lines.push_back(j.dump()); }

  ExchangeLog& log_;
  std::size_t seq_ = 0;
};

FlexOffer step(Recorder& rec, const FlexOffer& fo, const Event& e) {
  FlexOffer next = apply(fo, e);
  rec.transition(fo, e, next);
  return next;
}

}  // namespace

std::string_view to_string(EventKind e) {
  switch (e) {
    case EventKind::offer: return "offer";
    case EventKind::accept: return "accept";
    case EventKind::reject: return "reject";
    case EventKind::assign: return "assign";
    case EventKind::execute: return "execute";
    case EventKind::cancel: return "cancel";
    case EventKind::invalidate: return "invalidate";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view name) {
  for (EventKind e : kAllEvents) {
    if (to_string(e) == name) return e;
  }
  throw ValidationError("unknown lifecycle event '" + std::string(name) + "'");
}

std::optional<LifecycleState> transition_target(LifecycleState from, EventKind e) {
  if (!live(from)) return std::nullopt;
  switch (e) {
    case EventKind::offer:
      if (from == S::initial) return S::offered;
      break;
    case EventKind::accept:
      if (from == S::offered) return S::accepted;
      break;
    case EventKind::reject:
      if (from == S::offered) return S::rejected;
      break;
    case EventKind::assign:
      if (from == S::accepted || from == S::assigned) return S::assigned;
      break;
    case EventKind::execute:
      if (from == S::assigned) return S::executed;
      break;
    case EventKind::cancel: return S::canceled;
    case EventKind::invalidate: return S::invalid;
  }
  return std::nullopt;
}

FlexOffer apply(const FlexOffer& fo, const Event& e, std::optional<Timestamp> now) {
  const auto target = transition_target(fo.state, e.kind);
  if (!target) {
    throw InvalidTransition("event " + std::string(to_string(e.kind)) + " is not allowed in state " +
                            std::string(to_string(fo.state)) + " (" + fo.id + ")");
  }
  FlexOffer next = fo;
  if (now && e.kind == EventKind::accept && fo.accept_before_time && *now > *fo.accept_before_time) {
    next.state = S::invalid;
    next.state_reason = "acceptance deadline passed";
    return next;
  }
  if (now && e.kind == EventKind::assign && fo.assignment_before_time && *now > *fo.assignment_before_time) {
    next.state = S::invalid;
    next.state_reason = "assignment deadline passed";
    return next;
  }
  switch (e.kind) {
    case EventKind::reject:
    case EventKind::cancel:
    case EventKind::invalidate:
      if (e.reason) next.state_reason = *e.reason;
      break;
    case EventKind::assign: {
      if (!e.schedule) throw ValidationError("assign needs a schedule");
      const FeasibilityReport r = check_schedule(fo, *e.schedule);
      if (!r.feasible) throw ValidationError("assigned schedule is infeasible: " + r.violations.front().describe());
      Schedule s = *e.schedule;
      s.kind = ScheduleKind::flexoffer_schedule;
      if (fo.state == S::assigned && fo.flexoffer_schedule) {
        s.schedule_id = fo.flexoffer_schedule->schedule_id;
        s.update_id = fo.flexoffer_schedule->update_id + 1;
      }
      next.flexoffer_schedule = std::move(s);
      break;
    }
    default: break;
  }
  next.state = *target;
  return next;
}

bool Policy::accepts(const FlexOffer& fo) const {
  if (kind == Kind::accept_all) return true;
  double total = 0.0;
  for (std::size_t t = 1; t <= fo.slice_count(); ++t) total += amount_flexibility(fo, t);
  return total >= threshold_kwh;
}

Policy parse_policy(std::string_view text) {
  if (text == "accept-all") return Policy::accept_all();
  constexpr std::string_view prefix = "min-flex:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string_view num = text.substr(prefix.size());
    double v = 0.0;
    const auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec == std::errc() && end == num.data() + num.size() && v >= 0.0) return Policy::min_flexibility(v);
  }
  throw ValidationError("policy must be 'accept-all' or 'min-flex:<kWh>'");
}

ExchangeLog run_exchange(const std::vector<HeatPumpModel>& prosumers, const PriceCurve& prices, const Policy& policy,
                         FoKind kind) {
  ExchangeLog log;
  Recorder rec(log);
  std::vector<FlexOffer> fos;
  std::vector<std::string> owners;

  for (std::size_t i = 0; i < prosumers.size(); ++i) {
    const std::string owner = "prosumer-" + std::to_string(i + 1);
    GenerationOptions opts;
    opts.id = owner + "-fo";
    opts.offered_by = owner;
    FlexOffer fo = generate_fo(prosumers[i], kind, opts);
    rec.created(fo);
    fo = step(rec, fo, Event::offer());
    rec.message("offer", owner, "aggregator", to_json(fo)["flexOffer"]);
    fos.push_back(std::move(fo));
    owners.push_back(owner);
  }

  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < fos.size(); ++i) {
    const bool ok = policy.accepts(fos[i]);
    fos[i] = step(rec, fos[i], ok ? Event::accept() : Event::reject("insufficient flexibility"));
    Json reply = Json::object();
    reply["id"] = fos[i].id;
    reply["state"] = to_string(fos[i].state);
    if (fos[i].state_reason) reply["stateReason"] = *fos[i].state_reason;
    rec.message(ok ? "accept" : "reject", "aggregator", owners[i], reply);
    if (ok) accepted.push_back(i);
  }

  auto invalidate_all = [&](const std::vector<std::size_t>& which, const std::string& why) {
    for (std::size_t i : which) fos[i] = step(rec, fos[i], Event::invalidate(why));
  };

  if (!accepted.empty()) {
    std::vector<FlexOffer> pool;
    for (std::size_t i : accepted) pool.push_back(fos[i]);
    try {
      const AggregateBinding binding = aggregate(pool);
      const OptimizationResult opt = optimize(binding.aggregate_fo, prices);
      if (opt.status != OptStatus::optimal) {
        invalidate_all(accepted, "aggregate has no feasible schedule");
      } else {
        log.aggregate_schedule = opt.schedule;
        log.aggregate_objective = opt.objective;
        const auto parts = disaggregate(binding, opt.schedule);
        for (std::size_t k = 0; k < accepted.size(); ++k) {
          const std::size_t i = accepted[k];
          fos[i] = step(rec, fos[i], Event::assign(parts[k].schedule));
          Json body = Json::object();
          body["id"] = fos[i].id;
          body["flexOfferSchedule"] = serialize_schedule(*fos[i].flexoffer_schedule);
          rec.message("assign", "aggregator", owners[i], body);
        }
        for (std::size_t i : accepted) fos[i] = step(rec, fos[i], Event::execute());
      }
    } catch (const ShapeError&) {
      throw;
    } catch (const Error& err) {
      std::vector<std::size_t> open;
      for (std::size_t i : accepted) {
        if (live(fos[i].state)) open.push_back(i);
      }
      invalidate_all(open, err.what());
    }
  }
  log.final_fos = std::move(fos);
  return log;
}

std::string to_jsonl(const ExchangeLog& log) {
  std::string out;
  for (const auto& l : log.lines) out += l + "\n";
  return out;
}

std::map<std::string, FlexOffer> replay(const std::vector<std::string>& lines) {
  std::map<std::string, FlexOffer> fos;
  for (const auto& line : lines) {
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("log line is not JSON: ") + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "message") {
      if (j.value("kind", "") == "created") {
        Json msg = Json::object();
        msg["flexOffer"] = j.at("flexOffer");
        FlexOffer fo = from_json(msg);
        fos[fo.id] = std::move(fo);
      }
      continue;
    }
    if (type != "transition") throw ValidationError("unknown log entry type '" + type + "'");
    const std::string id = j.at("id").get<std::string>();
    const auto it = fos.find(id);
    if (it == fos.end()) throw ValidationError("transition for unknown FlexOffer " + id);
    Event e{parse_event_kind(j.at("event").get<std::string>()), {}, {}};
    if (j.contains("reason")) e.reason = j.at("reason").get<std::string>();
    if (j.contains("schedule")) e.schedule = parse_schedule(j.at("schedule"), ScheduleKind::flexoffer_schedule);
    it->second = apply(it->second, e);
    if (to_string(it->second.state) != j.at("to").get<std::string>()) {
      throw ValidationError("replay of " + id + " reached " + std::string(to_string(it->second.state)) +
                            ", log says " + j.at("to").get<std::string>());
    }
  }
  return fos;
}

}  // namespace flexkit
