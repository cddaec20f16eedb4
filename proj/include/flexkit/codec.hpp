#pragma once

// JSON wire format for FlexOffer messages.
//
// A message is {"flexOffer": {...}} (a bare object is accepted on input).
// Emission uses a fixed key order, two-space indentation, numbers rounded to
// six decimals with trailing zeros trimmed and integral values printed
// without a fraction, and datetimes as "YYYY-MM-DDThh:mm:ss.SSS+0000".
// Top-level keys the model does not know are carried through verbatim.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flexkit/model.hpp"

namespace flexkit {

using Json = nlohmann::ordered_json;

/// A mandatory attribute of the message-attribute table and where it lives.
struct MandatoryAttribute {
  std::string_view name;      // attribute-table name, used in error messages
  std::string_view wire_key;  // JSON key
  enum class Scope { message, profile_entry, schedule_slice } scope;
};

const std::vector<MandatoryAttribute>& mandatory_attributes();

/// Throws ParseError (malformed JSON, datetimes, numbers) or ValidationError
/// (missing mandatory attribute, broken invariant).
FlexOffer parse_message(std::string_view text);
FlexOffer from_json(const Json& node);

std::string serialize_message(const FlexOffer& fo);
Json to_json(const FlexOffer& fo);

Schedule parse_schedule(const Json& node, ScheduleKind kind);
/// full_precision keeps every digit of the energies and prices (for logs).
Json serialize_schedule(const Schedule& s, bool full_precision = false);

/// A number as the codec emits it.
Json wire_number(double v);

}  // namespace flexkit
