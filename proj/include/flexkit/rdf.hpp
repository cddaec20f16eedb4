#pragma once

// dCO / SAREF4ENER export of FlexOffers as Turtle, and the attribute mapping
// table that says which FlexOffer attributes SAREF4ENER can express.

#include <string>
#include <string_view>
#include <vector>

#include "flexkit/model.hpp"

namespace flexkit {

inline constexpr std::string_view kDcoNamespace = "https://w3id.org/dco#";
inline constexpr std::string_view kS4enerNamespace = "https://saref.etsi.org/saref4ener/";
inline constexpr std::string_view kSarefNamespace = "https://saref.etsi.org/core/";
inline constexpr std::string_view kXsdNamespace = "http://www.w3.org/2001/XMLSchema#";

enum class Coverage { mapped, partial, dco_only };

std::string_view to_string(Coverage c);

struct MappingRule {
  std::string_view group;         // block of the mapping table
  std::string_view fo_attribute;
  bool mandatory = false;
  Coverage saref = Coverage::dco_only;
  std::string_view target;        // SAREF/SAREF4ENER curie, empty when none
  std::string_view dco_property;  // property used in the dCO export
  std::string_view note;
};

inline constexpr std::string_view kGroupCore = "Standard FlexOffer";
inline constexpr std::string_view kGroupProfile = "FlexOfferProfileConstraints";
inline constexpr std::string_view kGroupSlice = "ScheduleSlice attributes";
inline constexpr std::string_view kGroupTec = "Total energy FlexOffer";
inline constexpr std::string_view kGroupDependency = "Dependency FlexOffer";
inline constexpr std::string_view kGroupUncertain = "Uncertain FlexOffer";

/// The mapping table, row for row.
const std::vector<MappingRule>& mapping_rules();

struct CoverageRow {
  std::string group;
  std::string attribute;
  Coverage status = Coverage::dco_only;
  std::string target;
  std::string note;
  bool constraint = false;  // a constraint attribute (profile, TEC, dependency, uncertain)
};

/// One row per populated attribute of fo, classified by the mapping table.
std::vector<CoverageRow> saref_coverage(const FlexOffer& fo);
/// Fixed-width text table.
std::string format_coverage(const std::vector<CoverageRow>& rows);

/// IRI of the FlexOffer individual: urn:flexoffer:<percent-encoded id>.
std::string flexoffer_iri(std::string_view id);

std::string fo_to_turtle(const FlexOffer& fo);

}  // namespace flexkit
