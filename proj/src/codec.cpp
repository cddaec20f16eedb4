#include "flexkit/codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "flexkit/errors.hpp"

namespace flexkit {

namespace {

using Scope = MandatoryAttribute::Scope;

constexpr std::string_view kDependencyKey = "DependencyEnergyConstraintList";
constexpr std::string_view kDependencyKeySpaced = "DependencyEnergy ConstraintList";
constexpr std::string_view kUncertainKey = "UncertainEnergyConstraintList";
constexpr std::string_view kUncertainKeySpaced = "UncertainEnergy ConstraintList";
constexpr std::string_view kTecKey = "TotalEnergyConstraints";
constexpr std::string_view kTecKeyAlt = "TotalEnergyConstraint";
constexpr std::string_view kCostKey = "TotalCostConstraints";
constexpr std::string_view kCostKeyAlt = "TotalCostConstraint";

// Emission order of top-level keys. "assignment" and "correct" are opaque but
// have a fixed slot in the reference message.
constexpr std::array<std::string_view, 28> kKeyOrder = {
    "id",
    "state",
    "stateReason",
    "creationInterval",
    "offeredById",
    "locationId",
    "acceptanceBeforeInterval",
    "assignmentBeforeInterval",
    "startAfterInterval",
    "startBeforeInterval",
    "endAfterInterval",
    "endBeforeInterval",
    "assignment",
    "flexOfferProfileConstraints",
    "flexOfferPriceConstraint",
    "uncertainThreshold",
    "acceptanceBeforeTime",
    "assignmentBeforeTime",
    "numSecondsPerInterval",
    "startAfterTime",
    "startBeforeTime",
    "endAfterTime",
    "endBeforeTime",
    "priceConstraintStartTime",
    "creationTime",
    "correct",
    "defaultSchedule",
    "flexOfferSchedule",
};

bool is_known_key(std::string_view key) {
  if (key == "assignment" || key == "correct") return false;  // pass-through
  return std::find(kKeyOrder.begin(), kKeyOrder.end(), key) != kKeyOrder.end();
}

const Json* find(const Json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

[[noreturn]] void missing(std::string_view attribute) {
  throw ValidationError("missing mandatory attribute " + std::string(attribute));
}

double as_number(const Json& v, std::string_view what) {
  if (!v.is_number()) throw ParseError("non-numeric value for " + std::string(what) + ": " + v.dump());
  return v.get<double>();
}

std::int64_t as_integer(const Json& v, std::string_view what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::trunc(d) == d) return static_cast<std::int64_t>(d);
  }
  throw ParseError("expected an integer for " + std::string(what) + ": " + v.dump());
}

std::string as_string(const Json& v, std::string_view what) {
  if (!v.is_string()) throw ParseError("expected a string for " + std::string(what) + ": " + v.dump());
  return v.get<std::string>();
}

Timestamp as_time(const Json& v, std::string_view what) { return parse_timestamp(as_string(v, what)); }

const Json& as_object(const Json& v, std::string_view what) {
  if (!v.is_object()) throw ParseError("expected an object for " + std::string(what));
  return v;
}

const Json& as_array(const Json& v, std::string_view what) {
  if (!v.is_array()) throw ParseError("expected an array for " + std::string(what));
  return v;
}

template <class T, class F>
std::optional<T> optional_field(const Json& obj, std::string_view key, F&& conv) {
  if (const Json* v = find(obj, key); v != nullptr && !v->is_null()) return conv(*v, key);
  return std::nullopt;
}

EnergyBounds parse_bounds_list(const Json& v, std::string_view what) {
  const Json& arr = as_array(v, what);
  if (arr.size() != 1) throw ValidationError(std::string(what) + " must hold exactly one {lower, upper} pair");
  const Json& pair = as_object(arr[0], what);
  const Json* lo = find(pair, "lower");
  const Json* hi = find(pair, "upper");
  if (lo == nullptr || hi == nullptr) throw ValidationError(std::string(what) + " entry needs lower and upper");
  return {as_number(*lo, "lower"), as_number(*hi, "upper")};
}

HalfspaceMatrix parse_matrix(const Json& v) {
  HalfspaceMatrix m;
  for (const Json& row : as_array(v, kDependencyKey)) {
    const Json& r = as_array(row, kDependencyKey);
    if (r.size() != 3) throw ValidationError("dependency rows must have exactly three entries [a, b, c]");
    m.rows.push_back({as_number(r[0], "a"), as_number(r[1], "b"), as_number(r[2], "c")});
  }
  return m;
}

std::vector<std::vector<double>> parse_polys(const Json& v) {
  std::vector<std::vector<double>> polys;
  for (const Json& p : as_array(v, kUncertainKey)) {
    std::vector<double> coeffs;
    for (const Json& c : as_array(p, kUncertainKey)) coeffs.push_back(as_number(c, "polynomial coefficient"));
    polys.push_back(std::move(coeffs));
  }
  return polys;
}

// y-extent of a dependency polygon, rounded outward to the wire grid.
EnergyBounds projected_bounds(const HalfspaceMatrix& m, bool first_slice) {
  if (first_slice) {
    if (auto r = m.y_range(0.0)) return {floor6(r->lower), ceil6(r->upper)};
    throw ValidationError("slice 1: dependency polygon is empty or unbounded");
  }
  const auto verts = m.vertices();
  if (verts.empty()) throw ValidationError("dependency polygon is empty");
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& p : verts) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  return {floor6(lo), ceil6(hi)};
}

struct ProfileParse {
  std::vector<SliceConstraint> profile;
  std::vector<HalfspaceMatrix> dependency;
  std::vector<UncertainFunction> uncertain;
  std::optional<EnergyBounds> total_energy;
  std::optional<EnergyBounds> total_cost;
};

ProfileParse parse_profile(const Json& v) {
  ProfileParse out;
  bool tail_seen = false;
  for (const Json& entry : as_array(v, "flexOfferProfileConstraints")) {
    as_object(entry, "profile constraint");
    const Json* tec = find(entry, kTecKey);
    if (tec == nullptr) tec = find(entry, kTecKeyAlt);
    const Json* cost = find(entry, kCostKey);
    if (cost == nullptr) cost = find(entry, kCostKeyAlt);
    if (tec != nullptr || cost != nullptr) {
      if (tec != nullptr) {
        if (out.total_energy) throw ValidationError("more than one TotalEnergyConstraints entry");
        out.total_energy = parse_bounds_list(*tec, kTecKey);
      }
      if (cost != nullptr) {
        if (out.total_cost) throw ValidationError("more than one TotalCostConstraint entry");
        out.total_cost = parse_bounds_list(*cost, kCostKey);
      }
      tail_seen = true;
      continue;
    }
    if (tail_seen) throw ValidationError("slice constraints must precede the TotalEnergyConstraints entry");

    const std::size_t t = out.profile.size();
    SliceConstraint sc;
    const Json* dep = find(entry, kDependencyKey);
    if (dep == nullptr) dep = find(entry, kDependencyKeySpaced);
    const Json* unc = find(entry, kUncertainKey);
    if (unc == nullptr) unc = find(entry, kUncertainKeySpaced);
    if (dep != nullptr && unc != nullptr) throw ValidationError("entry carries both dependency and uncertain constraints");

    const Json* energy = find(entry, "energyConstraintList");
    if (dep != nullptr) {
      HalfspaceMatrix m = parse_matrix(*dep);
      sc.energy = energy != nullptr ? parse_bounds_list(*energy, "energyConstraintList") : projected_bounds(m, t == 0);
      out.dependency.push_back(std::move(m));
    } else {
      if (energy == nullptr) missing("EnergyConstraintsList");
      sc.energy = parse_bounds_list(*energy, "energyConstraintList");
      if (unc != nullptr) out.uncertain.push_back({sc.energy, parse_polys(*unc)});
    }
    if (const Json* pc = find(entry, "priceConstraint")) {
      as_object(*pc, "priceConstraint");
      const Json* lo = find(*pc, "minPrice");
      const Json* hi = find(*pc, "maxPrice");
      if (lo == nullptr || hi == nullptr) throw ValidationError("priceConstraint needs minPrice and maxPrice");
      sc.price = PriceBounds{as_number(*lo, "minPrice"), as_number(*hi, "maxPrice")};
    }
    if (const Json* d = find(entry, "minDuration")) sc.min_duration = static_cast<int>(as_integer(*d, "minDuration"));
    if (const Json* d = find(entry, "maxDuration")) sc.max_duration = static_cast<int>(as_integer(*d, "maxDuration"));
    out.profile.push_back(sc);
  }
  return out;
}

Json bounds_list(const EnergyBounds& b) {
  Json pair = Json::object();
  pair["lower"] = wire_number(b.lower);
  pair["upper"] = wire_number(b.upper);
  return Json::array({pair});
}

Json profile_json(const FlexOffer& fo) {
  Json arr = Json::array();
  for (std::size_t t = 0; t < fo.profile.size(); ++t) {
    const SliceConstraint& sc = fo.profile[t];
    Json e = Json::object();
    if (!fo.dependency.empty()) {
      Json rows = Json::array();
      for (const auto& r : fo.dependency[t].rows) {
        rows.push_back(Json::array({wire_number(r.a), wire_number(r.b), wire_number(r.c)}));
      }
      e[std::string(kDependencyKey)] = std::move(rows);
    } else if (!fo.uncertain.empty()) {
      Json polys = Json::array();
      for (const auto& p : fo.uncertain[t].polys) {
        Json coeffs = Json::array();
        for (double c : p) coeffs.push_back(wire_number(c));
        polys.push_back(std::move(coeffs));
      }
      e[std::string(kUncertainKey)] = std::move(polys);
    }
    e["energyConstraintList"] = bounds_list(sc.energy);
    if (sc.price) {
      Json pc = Json::object();
      pc["minPrice"] = wire_number(sc.price->min_price);
      pc["maxPrice"] = wire_number(sc.price->max_price);
      e["priceConstraint"] = std::move(pc);
    }
    e["minDuration"] = sc.min_duration;
    e["maxDuration"] = sc.max_duration;
    arr.push_back(std::move(e));
  }
  if (fo.total_energy || fo.total_cost) {
    Json tail = Json::object();
    if (fo.total_energy) tail[std::string(kTecKey)] = bounds_list(*fo.total_energy);
    if (fo.total_cost) tail[std::string(kCostKey)] = bounds_list(*fo.total_cost);
    arr.push_back(std::move(tail));
  }
  return arr;
}

}  // namespace

const std::vector<MandatoryAttribute>& mandatory_attributes() {
  static const std::vector<MandatoryAttribute> kList = {
      {"ID", "id", Scope::message},
      {"State", "state", Scope::message},
      {"NumSecondsPerInterval", "numSecondsPerInterval", Scope::message},
      {"CreationTime", "creationTime", Scope::message},
      {"OfferedByID", "offeredById", Scope::message},
      {"StartAfterTime", "startAfterTime", Scope::message},
      {"StartBeforeTime", "startBeforeTime", Scope::message},
      {"FlexOfferProfileConstraints", "flexOfferProfileConstraints", Scope::message},
      {"EnergyConstraintsList", "energyConstraintList", Scope::profile_entry},
      {"EnergyAmount", "energyAmount", Scope::schedule_slice},
  };
  return kList;
}

Json wire_number(double v) {
  const double r = round6(v);
  if (std::trunc(r) == r && std::abs(r) < 1e15) return static_cast<std::int64_t>(r);
  return r;
}

Schedule parse_schedule(const Json& node, ScheduleKind kind) {
  as_object(node, "schedule");
  Schedule s;
  s.kind = kind;
  if (const Json* v = find(node, "scheduleId")) s.schedule_id = as_integer(*v, "scheduleId");
  if (const Json* v = find(node, "updateId")) s.update_id = as_integer(*v, "updateId");
  s.start_time = optional_field<Timestamp>(node, "startTime", as_time);
  const Json* slices = find(node, "scheduleSlices");
  if (slices == nullptr) throw ValidationError("a schedule consists of at least one slice (scheduleSlices missing)");
  for (const Json& sl : as_array(*slices, "scheduleSlices")) {
    as_object(sl, "schedule slice");
    ScheduleSlice out;
    if (const Json* d = find(sl, "duration")) out.duration = static_cast<int>(as_integer(*d, "duration"));
    const Json* amount = find(sl, "energyAmount");
    if (amount == nullptr) missing("EnergyAmount");
    out.energy_amount = as_number(*amount, "energyAmount");
    out.price = optional_field<double>(sl, "price", as_number);
    s.slices.push_back(out);
  }
  if (s.slices.empty()) throw ValidationError("a schedule consists of at least one slice");
  return s;
}

Json serialize_schedule(const Schedule& s, bool full_precision) {
  auto num = [&](double v) { return full_precision ? Json(v) : wire_number(v); };
  Json out = Json::object();
  out["scheduleId"] = s.schedule_id;
  out["updateId"] = s.update_id;
  Json slices = Json::array();
  for (const auto& sl : s.slices) {
    Json j = Json::object();
    j["duration"] = sl.duration;
    j["energyAmount"] = num(sl.energy_amount);
    if (sl.price) j["price"] = num(*sl.price);
    slices.push_back(std::move(j));
  }
  out["scheduleSlices"] = std::move(slices);
  if (s.start_time) out["startTime"] = format_timestamp(*s.start_time);
  return out;
}

FlexOffer from_json(const Json& root) {
  const Json* body = &root;
  if (root.is_object()) {
    if (const Json* inner = find(root, "flexOffer")) body = inner;
  }
  const Json& obj = as_object(*body, "flexOffer");

  for (const auto& attr : mandatory_attributes()) {
    if (attr.scope == Scope::message && find(obj, attr.wire_key) == nullptr) missing(attr.name);
  }

  FlexOffer fo;
  const Json& id = obj.at("id");
  if (id.is_string()) {
    fo.id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    fo.id = std::to_string(id.get<std::int64_t>());
  } else {
    throw ParseError("ID must be a string or an integer");
  }
  fo.state = parse_state(as_string(obj.at("state"), "state"));
  fo.state_reason = optional_field<std::string>(obj, "stateReason", as_string);
  fo.num_seconds_per_interval = as_integer(obj.at("numSecondsPerInterval"), "numSecondsPerInterval");
  if (fo.num_seconds_per_interval <= 0) throw ValidationError("NumSecondsPerInterval must be positive");
  fo.creation_time = as_time(obj.at("creationTime"), "creationTime");
  fo.creation_interval = optional_field<std::int64_t>(obj, "creationInterval", as_integer);
  fo.offered_by_id = as_string(obj.at("offeredById"), "offeredById");
  if (const Json* loc = find(obj, "locationId"); loc != nullptr && !loc->is_null()) {
    const Json* user = find(as_object(*loc, "locationId"), "userLocation");
    if (user == nullptr) throw ValidationError("locationId needs a userLocation");
    as_object(*user, "userLocation");
    const Json* lon = find(*user, "longitude");
    const Json* lat = find(*user, "latitude");
    if (lon == nullptr || lat == nullptr) throw ValidationError("userLocation needs longitude and latitude");
    fo.location = GeoLocation{as_number(*lon, "longitude"), as_number(*lat, "latitude")};
  }
  fo.accept_before_interval = optional_field<std::int64_t>(obj, "acceptanceBeforeInterval", as_integer);
  fo.assignment_before_interval = optional_field<std::int64_t>(obj, "assignmentBeforeInterval", as_integer);
  fo.start_after_interval = optional_field<std::int64_t>(obj, "startAfterInterval", as_integer);
  fo.start_before_interval = optional_field<std::int64_t>(obj, "startBeforeInterval", as_integer);
  fo.end_after_interval = optional_field<std::int64_t>(obj, "endAfterInterval", as_integer);
  fo.end_before_interval = optional_field<std::int64_t>(obj, "endBeforeInterval", as_integer);
  fo.accept_before_time = optional_field<Timestamp>(obj, "acceptanceBeforeTime", as_time);
  fo.assignment_before_time = optional_field<Timestamp>(obj, "assignmentBeforeTime", as_time);
  fo.start_after_time = as_time(obj.at("startAfterTime"), "startAfterTime");
  fo.start_before_time = as_time(obj.at("startBeforeTime"), "startBeforeTime");
  fo.end_after_time = optional_field<Timestamp>(obj, "endAfterTime", as_time);
  fo.end_before_time = optional_field<Timestamp>(obj, "endBeforeTime", as_time);
  fo.price_constraint_start_time = optional_field<Timestamp>(obj, "priceConstraintStartTime", as_time);
  fo.uncertain_threshold = optional_field<double>(obj, "uncertainThreshold", as_number);

  ProfileParse profile = parse_profile(obj.at("flexOfferProfileConstraints"));
  fo.profile = std::move(profile.profile);
  fo.dependency = std::move(profile.dependency);
  fo.uncertain = std::move(profile.uncertain);
  fo.total_energy = profile.total_energy;
  fo.total_cost = profile.total_cost;

  if (const Json* pcs = find(obj, "flexOfferPriceConstraint"); pcs != nullptr && !pcs->is_null()) {
    for (const Json& pc : as_array(*pcs, "flexOfferPriceConstraint")) {
      as_object(pc, "flexOfferPriceConstraint");
      PriceSlice ps;
      if (const Json* d = find(pc, "duration")) ps.duration = static_cast<int>(as_integer(*d, "duration"));
      const Json* p = find(pc, "price");
      if (p == nullptr) throw ValidationError("flexOfferPriceConstraint entry needs a price");
      ps.price = as_number(*p, "price");
      fo.price_constraints.push_back(ps);
    }
  }
  if (const Json* s = find(obj, "defaultSchedule"); s != nullptr && !s->is_null()) {
    fo.default_schedule = parse_schedule(*s, ScheduleKind::default_schedule);
  }
  if (const Json* s = find(obj, "flexOfferSchedule"); s != nullptr && !s->is_null()) {
    fo.flexoffer_schedule = parse_schedule(*s, ScheduleKind::flexoffer_schedule);
  }

  for (const auto& [key, value] : obj.items()) {
    if (!is_known_key(key)) fo.passthrough.push_back({key, value.dump()});
  }

  if (!fo.creation_interval) {
    const std::int64_t secs = epoch_seconds(fo.creation_time);
    std::int64_t q = secs / fo.num_seconds_per_interval;
    if (secs % fo.num_seconds_per_interval != 0 && secs < 0) --q;
    fo.creation_interval = q;
  }
  validate(fo);
  return fo;
}

FlexOffer parse_message(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(root);
}

Json to_json(const FlexOffer& fo) {
  Json fields = Json::object();
  fields["id"] = fo.id;
  fields["state"] = std::string(to_string(fo.state));
  if (fo.state_reason) fields["stateReason"] = *fo.state_reason;
  if (fo.creation_interval) fields["creationInterval"] = *fo.creation_interval;
  fields["offeredById"] = fo.offered_by_id;
  if (fo.location) {
    Json user = Json::object();
    user["longitude"] = wire_number(fo.location->longitude);
    user["latitude"] = wire_number(fo.location->latitude);
    Json loc = Json::object();
    loc["userLocation"] = std::move(user);
    fields["locationId"] = std::move(loc);
  }
  if (fo.accept_before_interval) fields["acceptanceBeforeInterval"] = *fo.accept_before_interval;
  if (fo.assignment_before_interval) fields["assignmentBeforeInterval"] = *fo.assignment_before_interval;
  if (fo.start_after_interval) fields["startAfterInterval"] = *fo.start_after_interval;
  if (fo.start_before_interval) fields["startBeforeInterval"] = *fo.start_before_interval;
  if (fo.end_after_interval) fields["endAfterInterval"] = *fo.end_after_interval;
  if (fo.end_before_interval) fields["endBeforeInterval"] = *fo.end_before_interval;
  fields["flexOfferProfileConstraints"] = profile_json(fo);
  if (!fo.price_constraints.empty()) {
    Json pcs = Json::array();
    for (const auto& ps : fo.price_constraints) {
      Json j = Json::object();
      j["duration"] = ps.duration;
      j["price"] = wire_number(ps.price);
      pcs.push_back(std::move(j));
    }
    fields["flexOfferPriceConstraint"] = std::move(pcs);
  }
  if (fo.uncertain_threshold) fields["uncertainThreshold"] = wire_number(*fo.uncertain_threshold);
  if (fo.accept_before_time) fields["acceptanceBeforeTime"] = format_timestamp(*fo.accept_before_time);
  if (fo.assignment_before_time) fields["assignmentBeforeTime"] = format_timestamp(*fo.assignment_before_time);
  fields["numSecondsPerInterval"] = fo.num_seconds_per_interval;
  fields["startAfterTime"] = format_timestamp(fo.start_after_time);
  fields["startBeforeTime"] = format_timestamp(fo.start_before_time);
  if (fo.end_after_time) fields["endAfterTime"] = format_timestamp(*fo.end_after_time);
  if (fo.end_before_time) fields["endBeforeTime"] = format_timestamp(*fo.end_before_time);
  if (fo.price_constraint_start_time) fields["priceConstraintStartTime"] = format_timestamp(*fo.price_constraint_start_time);
  fields["creationTime"] = format_timestamp(fo.creation_time);
  if (fo.default_schedule) fields["defaultSchedule"] = serialize_schedule(*fo.default_schedule);
  if (fo.flexoffer_schedule) fields["flexOfferSchedule"] = serialize_schedule(*fo.flexoffer_schedule);
  for (const auto& p : fo.passthrough) fields[p.key] = Json::parse(p.json);

  Json body = Json::object();
  for (std::string_view key : kKeyOrder) {
    auto it = fields.find(std::string(key));
    if (it != fields.end()) body[std::string(key)] = *it;
  }
  for (const auto& p : fo.passthrough) {
    if (std::find(kKeyOrder.begin(), kKeyOrder.end(), p.key) == kKeyOrder.end()) body[p.key] = fields[p.key];
  }
  Json root = Json::object();
  root["flexOffer"] = std::move(body);
  return root;
}

std::string serialize_message(const FlexOffer& fo) { return to_json(fo).dump(2) + "\n"; }

}  // namespace flexkit
