#include "flexkit/rdf.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "flexkit/codec.hpp"

namespace flexkit {

namespace {

using C = Coverage;

const MappingRule* find_rule(std::string_view group, std::string_view attribute) {
  for (const auto& r : mapping_rules()) {
    if (r.group == group && r.fo_attribute == attribute) return &r;
  }
  return nullptr;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string str(std::string_view s) { return "\"" + escape(s) + "\""; }
std::string dec(double v) { return "\"" + wire_number(v).dump() + "\"^^xsd:decimal"; }
std::string integer(std::int64_t v) { return "\"" + std::to_string(v) + "\"^^xsd:integer"; }

std::string datetime(Timestamp t) {
  std::string s = format_timestamp(t);  // ...+0000
  return "\"" + s.substr(0, s.size() - 5) + "Z\"^^xsd:dateTime";
}

// Subject with a list of predicate-object pairs, emitted as one Turtle block.
class Block {
 public:
  Block(std::string subject, std::string type) : subject_(std::move(subject)) { add("a", std::move(type)); }
  void add(std::string predicate, std::string object) { pairs_.emplace_back(std::move(predicate), std::move(object)); }
  std::string str() const {
    std::string out = subject_;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      out += (i == 0 ? " " : " ;\n    ") + pairs_[i].first + " " + pairs_[i].second;
    }
    return out + " .\n";
  }

 private:
  std::string subject_;
  std::vector<std::pair<std::string, std::string>> pairs_;
};

std::string matrix_json(const HalfspaceMatrix& m) {
  Json j = Json::array();
  for (const auto& r : m.rows) j.push_back(Json::array({wire_number(r.a), wire_number(r.b), wire_number(r.c)}));
  return j.dump();
}

std::string functions_json(const UncertainFunction& f) {
  Json polys = Json::array();
  for (const auto& p : f.polys) {
    Json c = Json::array();
    for (double v : p) c.push_back(wire_number(v));
    polys.push_back(std::move(c));
  }
  Json j = Json::object();
  j["domain"] = Json::array({wire_number(f.domain.lower), wire_number(f.domain.upper)});
  j["polynomials"] = std::move(polys);
  return j.dump();
}

void schedule_blocks(std::vector<Block>& out, const std::string& base, const std::string& name, const Schedule& s) {
  const std::string node = "<" + base + "#" + name + ">";
  Block b(node, "dco:Schedule");
  b.add("dco:scheduleType", s.kind == ScheduleKind::default_schedule ? "dco:DefaultSchedule" : "dco:FlexOfferSchedule");
  b.add("dco:scheduleID", integer(s.schedule_id));
  b.add("dco:updateID", integer(s.update_id));
  if (s.start_time) b.add("dco:startTime", datetime(*s.start_time));
  std::vector<Block> slices;
  for (std::size_t i = 0; i < s.slices.size(); ++i) {
    const auto& sl = s.slices[i];
    const std::string sn = "<" + base + "#" + name + "-slice-" + std::to_string(i + 1) + ">";
    b.add("dco:hasSlice", sn);
    Block sb(sn, "dco:Slice");
    sb.add("s4ener:DefaultDuration", integer(sl.duration));
    sb.add("s4ener:EnergyExpected", dec(sl.energy_amount));
    if (sl.price) sb.add("dco:hasPrice", dec(*sl.price));
    slices.push_back(std::move(sb));
  }
  out.push_back(std::move(b));
  for (auto& sb : slices) out.push_back(std::move(sb));
}

void push_row(std::vector<CoverageRow>& rows, std::string_view group, std::string_view attribute) {
  const MappingRule* r = find_rule(group, attribute);
  if (r == nullptr) return;
  const bool constraint = group != kGroupCore && group != kGroupSlice;
  rows.push_back({std::string(r->group), std::string(r->fo_attribute), r->saref, std::string(r->target),
                  std::string(r->note), constraint});
}

}  // namespace

std::string_view to_string(Coverage c) {
  switch (c) {
    case C::mapped: return "mapped";
    case C::partial: return "partial";
    case C::dco_only: return "dco-only";
  }
  return "?";
}

const std::vector<MappingRule>& mapping_rules() {
  static const std::vector<MappingRule> rules = {
      {kGroupCore, "ID", true, C::dco_only, "", "dco:flexOfferID", ""},
      {kGroupCore, "State", true, C::mapped, "s4ener:PowerSequenceState", "dco:hasState", ""},
      {kGroupCore, "StateReason", false, C::dco_only, "", "dco:stateReason", ""},
      {kGroupCore, "NumSecondsPerInterval", true, C::dco_only, "", "dco:numSecondsPerInterval", ""},
      {kGroupCore, "CreationTime", true, C::dco_only, "", "dco:creationTime", ""},
      {kGroupCore, "CreationInterval", true, C::dco_only, "", "dco:creationInterval", ""},
      {kGroupCore, "OfferedByID", true, C::dco_only, "", "dco:offeredByID", ""},
      {kGroupCore, "LocationID", false, C::dco_only, "", "dco:locationID", "In SAREF, a device can have a location"},
      {kGroupCore, "AcceptBeforeTime", false, C::dco_only, "", "dco:acceptanceBeforeTime", ""},
      {kGroupCore, "AcceptBeforeInterval", false, C::dco_only, "", "dco:acceptBeforeInterval", ""},
      {kGroupCore, "AssignmentBeforeTime", false, C::dco_only, "", "dco:assignmentBeforeTime", ""},
      {kGroupCore, "AssignmentBeforeInterval", false, C::dco_only, "", "dco:assignmentBeforeInterval", ""},
      {kGroupCore, "StartAfterInterval", false, C::dco_only, "", "dco:startAfterInterval", ""},
      {kGroupCore, "StartBeforeTime", true, C::dco_only, "", "dco:startBeforeTime", ""},
      {kGroupCore, "StartBeforeInterval", false, C::dco_only, "", "dco:startBeforeInterval", ""},
      {kGroupCore, "EndAfterTime", false, C::dco_only, "", "dco:endAfterTime", ""},
      {kGroupCore, "EndAfterInterval", false, C::dco_only, "", "dco:endAfterInterval", ""},
      {kGroupCore, "EndBeforeTime", false, C::dco_only, "", "dco:endBeforeTime", ""},
      {kGroupCore, "EndBeforeInterval", false, C::dco_only, "", "dco:endBeforeInterval", ""},
      {kGroupCore, "StartAfterTime", true, C::dco_only, "", "dco:startAfterTime", ""},
      {kGroupCore, "FlexOfferProfileConstraints", true, C::dco_only, "", "dco:hasFlexOfferProfileConstraint", ""},
      {kGroupCore, "FlexOfferPriceConstraint", false, C::dco_only, "", "dco:hasFlexOfferPriceConstraint", ""},
      {kGroupCore, "DefaultSchedule", false, C::dco_only, "", "dco:DefaultSchedule", ""},
      {kGroupCore, "FlexOfferSchedule", false, C::dco_only, "", "dco:FlexOfferSchedule", ""},
      {kGroupProfile, "EnergyConstraintsList", true, C::mapped, "s4ener:Energy", "dco:hasEnergyConstraintList",
       "SAREF includes EnergyMax and EnergyMin"},
      {kGroupProfile, "PriceConstraint", false, C::partial, "saref:hasPrice", "saref:hasPrice",
       "SAREF does not include min and max price"},
      {kGroupProfile, "MinDuration", false, C::mapped, "s4ener:ActiveDurationMin", "s4ener:ActiveDurationMin", ""},
      {kGroupProfile, "MaxDuration", false, C::mapped, "s4ener:ActiveDurationMax", "s4ener:ActiveDurationMax", ""},
      {kGroupProfile, "TotalCostConstraint", false, C::dco_only, "", "dco:totalCostConstraint", ""},
      {kGroupSlice, "Duration", false, C::mapped, "s4ener:DefaultDuration", "s4ener:DefaultDuration", ""},
      {kGroupSlice, "EnergyAmount", true, C::mapped, "s4ener:EnergyExpected", "s4ener:EnergyExpected", ""},
      {kGroupSlice, "Price", false, C::dco_only, "", "dco:hasPrice", ""},
      {kGroupTec, "TotalEnergyConstraint", false, C::mapped, "s4ener:Energy", "dco:totalEnergyConstraint",
       "SAREF includes EnergyMax and EnergyMin"},
      {kGroupDependency, "DependencyEnergyConstraintList", false, C::dco_only, "", "dco:dependencyEnergyConstraintList",
       ""},
      {kGroupDependency, "PriceConstraint", false, C::partial, "saref:hasPrice", "saref:hasPrice", ""},
      {kGroupDependency, "MinDuration", false, C::mapped, "s4ener:ActiveDurationMin", "s4ener:ActiveDurationMin", ""},
      {kGroupDependency, "MaxDuration", false, C::mapped, "s4ener:ActiveDurationMax", "s4ener:ActiveDurationMax", ""},
      {kGroupUncertain, "UncertainFunctions", false, C::dco_only, "", "dco:uncertainFunctions", ""},
      {kGroupUncertain, "UncertainThreshold", false, C::dco_only, "", "dco:uncertainThreshold", ""},
      {kGroupUncertain, "MinDuration", false, C::mapped, "s4ener:ActiveDurationMin", "s4ener:ActiveDurationMin", ""},
      {kGroupUncertain, "MaxDuration", false, C::mapped, "s4ener:ActiveDurationMax", "s4ener:ActiveDurationMax", ""},
  };
  return rules;
}

std::vector<CoverageRow> saref_coverage(const FlexOffer& fo) {
  std::vector<CoverageRow> rows;
  auto core = [&](bool present, std::string_view attribute) {
    if (present) push_row(rows, kGroupCore, attribute);
  };
  core(true, "ID");
  core(true, "State");
  core(fo.state_reason.has_value(), "StateReason");
  core(true, "NumSecondsPerInterval");
  core(true, "CreationTime");
  core(fo.creation_interval.has_value(), "CreationInterval");
  core(true, "OfferedByID");
  core(fo.location.has_value(), "LocationID");
  core(fo.accept_before_time.has_value(), "AcceptBeforeTime");
  core(fo.accept_before_interval.has_value(), "AcceptBeforeInterval");
  core(fo.assignment_before_time.has_value(), "AssignmentBeforeTime");
  core(fo.assignment_before_interval.has_value(), "AssignmentBeforeInterval");
  core(fo.start_after_interval.has_value(), "StartAfterInterval");
  core(true, "StartBeforeTime");
  core(fo.start_before_interval.has_value(), "StartBeforeInterval");
  core(fo.end_after_time.has_value(), "EndAfterTime");
  core(fo.end_after_interval.has_value(), "EndAfterInterval");
  core(fo.end_before_time.has_value(), "EndBeforeTime");
  core(fo.end_before_interval.has_value(), "EndBeforeInterval");
  core(true, "StartAfterTime");
  core(true, "FlexOfferProfileConstraints");
  core(!fo.price_constraints.empty(), "FlexOfferPriceConstraint");
  core(fo.default_schedule.has_value(), "DefaultSchedule");
  core(fo.flexoffer_schedule.has_value(), "FlexOfferSchedule");

  const FoKind kind = fo.kind();
  const std::string_view family =
      kind == FoKind::dfo ? kGroupDependency : kind == FoKind::ufo ? kGroupUncertain : kGroupProfile;
  const bool priced = std::any_of(fo.profile.begin(), fo.profile.end(), [](const SliceConstraint& s) { return s.price; });
  push_row(rows, kGroupProfile, "EnergyConstraintsList");
  if (kind == FoKind::dfo) push_row(rows, kGroupDependency, "DependencyEnergyConstraintList");
  if (kind == FoKind::ufo) {
    push_row(rows, kGroupUncertain, "UncertainFunctions");
    if (fo.uncertain_threshold) push_row(rows, kGroupUncertain, "UncertainThreshold");
  }
  if (priced) push_row(rows, family, "PriceConstraint");
  push_row(rows, family, "MinDuration");
  push_row(rows, family, "MaxDuration");
  if (fo.total_energy) push_row(rows, kGroupTec, "TotalEnergyConstraint");
  if (fo.total_cost) push_row(rows, kGroupProfile, "TotalCostConstraint");

  std::vector<const Schedule*> schedules;
  if (fo.default_schedule) schedules.push_back(&*fo.default_schedule);
  if (fo.flexoffer_schedule) schedules.push_back(&*fo.flexoffer_schedule);
  if (!schedules.empty()) {
    push_row(rows, kGroupSlice, "Duration");
    push_row(rows, kGroupSlice, "EnergyAmount");
    const bool slice_prices = std::any_of(schedules.begin(), schedules.end(), [](const Schedule* s) {
      return std::any_of(s->slices.begin(), s->slices.end(), [](const ScheduleSlice& sl) { return sl.price; });
    });
    if (slice_prices) push_row(rows, kGroupSlice, "Price");
  }
  return rows;
}

std::string format_coverage(const std::vector<CoverageRow>& rows) {
  std::size_t wg = 5;
  std::size_t wa = 9;
  std::size_t wt = 6;
  for (const auto& r : rows) {
    wg = std::max(wg, r.group.size());
    wa = std::max(wa, r.attribute.size());
    wt = std::max(wt, r.target.size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::string out = pad("group", wg) + "  " + pad("attribute", wa) + "  " + pad("status", 8) + "  " +
                    pad("target", wt) + "  note\n";
  for (const auto& r : rows) {
    std::string line = pad(r.group, wg) + "  " + pad(r.attribute, wa) + "  " + pad(std::string(to_string(r.status)), 8) +
                       "  " + pad(r.target.empty() ? "-" : r.target, wt) + "  " + r.note;
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string flexoffer_iri(std::string_view id) {
  std::string out = "urn:flexoffer:";
  for (unsigned char c : id) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

std::string fo_to_turtle(const FlexOffer& fo) {
  const std::string base = flexoffer_iri(fo.id);
  const std::string self = "<" + base + ">";
  std::vector<Block> blocks;
  Block b(self, "dco:FlexOffer");
  b.add("dco:flexOfferID", str(fo.id));
  b.add("dco:hasState", str(to_string(fo.state)));
  if (fo.state_reason) b.add("dco:stateReason", str(*fo.state_reason));
  b.add("dco:offeredByID", str(fo.offered_by_id));
  std::vector<Block> extra;
  if (fo.location) {
    const std::string loc = "<" + base + "#location>";
    b.add("dco:locationID", loc);
    Block l(loc, "dco:Location");
    l.add("dco:longitude", dec(fo.location->longitude));
    l.add("dco:latitude", dec(fo.location->latitude));
    extra.push_back(std::move(l));
  }
  auto ival = [&](const char* p, const std::optional<std::int64_t>& v) {
    if (v) b.add(p, integer(*v));
  };
  auto time = [&](const char* p, const std::optional<Timestamp>& v) {
    if (v) b.add(p, datetime(*v));
  };
  ival("dco:creationInterval", fo.creation_interval);
  ival("dco:acceptBeforeInterval", fo.accept_before_interval);
  ival("dco:assignmentBeforeInterval", fo.assignment_before_interval);
  ival("dco:startAfterInterval", fo.start_after_interval);
  ival("dco:startBeforeInterval", fo.start_before_interval);
  ival("dco:endAfterInterval", fo.end_after_interval);
  ival("dco:endBeforeInterval", fo.end_before_interval);
  time("dco:acceptanceBeforeTime", fo.accept_before_time);
  time("dco:assignmentBeforeTime", fo.assignment_before_time);
  b.add("dco:numSecondsPerInterval", integer(fo.num_seconds_per_interval));
  time("dco:startAfterTime", fo.start_after_time);
  time("dco:startBeforeTime", fo.start_before_time);
  time("dco:endAfterTime", fo.end_after_time);
  time("dco:endBeforeTime", fo.end_before_time);
  time("dco:creationTime", fo.creation_time);
  time("dco:priceConstraintStartTime", fo.price_constraint_start_time);

  for (std::size_t t = 0; t < fo.profile.size(); ++t) {
    const auto& sc = fo.profile[t];
    const std::string c = base + "#constraint-" + std::to_string(t + 1);
    b.add("dco:hasFlexOfferProfileConstraint", "<" + c + ">");
    Block cb("<" + c + ">", "dco:FlexOfferProfileConstraint");
    cb.add("dco:hasEnergyConstraintList", "<" + c + "-energy>");
    Block eb("<" + c + "-energy>", "s4ener:Energy");
    eb.add("s4ener:EnergyMin", dec(sc.energy.lower));
    eb.add("s4ener:EnergyMax", dec(sc.energy.upper));
    std::optional<Block> pb;
    if (sc.price) {
      cb.add("saref:hasPrice", "<" + c + "-price>");
      pb.emplace("<" + c + "-price>", "saref:Price");
      pb->add("dco:minPrice", dec(sc.price->min_price));
      pb->add("dco:maxPrice", dec(sc.price->max_price));
    }
    cb.add("s4ener:ActiveDurationMin", integer(sc.min_duration));
    cb.add("s4ener:ActiveDurationMax", integer(sc.max_duration));
    if (t < fo.dependency.size()) cb.add("dco:dependencyEnergyConstraintList", str(matrix_json(fo.dependency[t])));
    if (t < fo.uncertain.size()) cb.add("dco:uncertainFunctions", str(functions_json(fo.uncertain[t])));
    extra.push_back(std::move(cb));
    extra.push_back(std::move(eb));
    if (pb) extra.push_back(std::move(*pb));
  }
  if (fo.uncertain_threshold) b.add("dco:uncertainThreshold", "\"" + wire_number(*fo.uncertain_threshold).dump() + "\"^^xsd:double");
  if (fo.total_energy) {
    const std::string n = "<" + base + "#total-energy>";
    b.add("dco:totalEnergyConstraint", n);
    Block tb(n, "s4ener:Energy");
    tb.add("s4ener:EnergyMin", dec(fo.total_energy->lower));
    tb.add("s4ener:EnergyMax", dec(fo.total_energy->upper));
    extra.push_back(std::move(tb));
  }
  if (fo.total_cost) {
    const std::string n = "<" + base + "#total-cost>";
    b.add("dco:totalCostConstraint", n);
    Block tb(n, "dco:TotalCostConstraint");
    tb.add("dco:costMin", dec(fo.total_cost->lower));
    tb.add("dco:costMax", dec(fo.total_cost->upper));
    extra.push_back(std::move(tb));
  }
  for (std::size_t k = 0; k < fo.price_constraints.size(); ++k) {
    const std::string n = "<" + base + "#price-" + std::to_string(k + 1) + ">";
    b.add("dco:hasFlexOfferPriceConstraint", n);
    Block pb(n, "dco:FlexOfferPriceConstraint");
    pb.add("dco:Duration", integer(fo.price_constraints[k].duration));
    pb.add("dco:hasPrice", dec(fo.price_constraints[k].price));
    extra.push_back(std::move(pb));
  }
  if (fo.default_schedule) {
    b.add("dco:hasSchedule", "<" + base + "#default-schedule>");
    schedule_blocks(extra, base, "default-schedule", *fo.default_schedule);
  }
  if (fo.flexoffer_schedule) {
    b.add("dco:hasSchedule", "<" + base + "#flexoffer-schedule>");
    schedule_blocks(extra, base, "flexoffer-schedule", *fo.flexoffer_schedule);
  }

  std::ostringstream out;
  out << "@prefix dco: <" << kDcoNamespace << "> .\n"
      << "@prefix s4ener: <" << kS4enerNamespace << "> .\n"
      << "@prefix saref: <" << kSarefNamespace << "> .\n"
      << "@prefix xsd: <" << kXsdNamespace << "> .\n\n"
      << b.str();
  for (const auto& e : extra) out << "\n" << e.str();
  return out.str();
}

}  // namespace flexkit
