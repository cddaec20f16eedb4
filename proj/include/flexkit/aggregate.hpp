#pragma once

// Baseline aggregation: members are fixed at their earliest start and their
// slice bounds are summed unit by unit (a Minkowski sum of boxes). The start
// time flexibility of the members is given up.
//
// Disaggregation splits every aggregate unit with one fill ratio theta_t:
// e_{m,t} = lb_{m,t} + theta_t * (ub_{m,t} - lb_{m,t}). Member total-energy
// constraints are honoured by restricting the aggregate total to the range
// where this split keeps every member inside its TEC. For members whose
// flexibility is spread proportionally that range is exactly the sum of the
// member TECs.

#include <cstdint>
#include <string>
#include <vector>

#include "flexkit/model.hpp"

namespace flexkit {

struct AggregateMember {
  std::string id;
  std::int64_t offset = 0;  // time units after the aggregate start
  FlexOffer fo;
  /// Member bounds used for splitting (TEC-tightened, never looser than fo.profile).
  std::vector<EnergyBounds> bounds;
};

struct AggregateBinding {
  FlexOffer aggregate_fo;
  std::vector<AggregateMember> members;
};

/// Key under which member ids and offsets travel in the aggregate message.
inline constexpr const char* kAggregateMembersKey = "aggregateMembers";

/// Throws ValidationError (empty pool, mixed interval lengths, infeasible
/// member) or UnsupportedInstance (DFO/UFO member).
AggregateBinding aggregate(const std::vector<FlexOffer>& fos);

struct MemberSchedule {
  std::string id;
  Schedule schedule;
};

/// Throws ValidationError when s is infeasible for the aggregate.
std::vector<MemberSchedule> disaggregate(const AggregateBinding& binding, const Schedule& s);

}  // namespace flexkit
