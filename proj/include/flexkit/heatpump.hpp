#pragma once

// First-order thermal model of a heat-pump heated room and FlexOffer
// generation from it.
//
//   T' = T + (cop * e * 3.6e6 - wall_area * c_ht * (T - t_out) * dt) / C
//
// which is affine: T' = alpha*T + beta*e + gamma.

#include <string>
#include <string_view>
#include <vector>

#include "flexkit/model.hpp"

namespace flexkit {

struct HeatPumpModel {
  double p_max = 4.6;            // kW
  double cop = 3.65;
  double wall_area = 12.0;       // m^2
  double c_ht = 6.0;             // W/(m^2 K)
  double t_out = 275.0;          // K
  double t_min = 293.0;          // K
  double t_max = 297.0;          // K
  double t_init = 295.0;         // K
  double thermal_capacitance = 2.0e7;  // J/K
  double dt = 3600.0;            // s per time unit
  int horizon = 8;               // time units

  double max_energy() const { return p_max * dt / 3600.0; }
  double alpha() const;
  double beta() const;
  double gamma() const;
};

/// Throws ValidationError naming the first broken invariant.
void validate(const HeatPumpModel& m);

/// `name = value` lines, `#` comments; unspecified keys keep their defaults.
/// Throws ParseError on malformed lines or unknown keys, ValidationError on
/// an invalid model.
HeatPumpModel parse_model_config(std::string_view text);
HeatPumpModel load_model_config(const std::string& path);

/// kWh per time unit holding the room at t_init.
double steady_state_energy(const HeatPumpModel& m);
/// Energy holding the room at temperature t.
double holding_energy(const HeatPumpModel& m, double t);

/// Throws RangeError when e lies outside [0, p_max*dt/3600].
double step(const HeatPumpModel& m, double t_room, double e);

/// Temperatures after each slice, starting from t_init (no range checks).
std::vector<double> simulate(const HeatPumpModel& m, const std::vector<double>& energies);

/// True when every temperature of simulate() stays in [t_min, t_max].
bool keeps_comfort(const HeatPumpModel& m, const std::vector<double>& energies, double tol = 1e-9);

struct GenerationOptions {
  std::string id;  // derived from the model and kind when empty
  std::string offered_by = "heatpump";
  Timestamp start = parse_timestamp("2019-04-02T00:00:00Z");
};

/// SFO, TECFO or DFO whose feasible schedules keep the room in its comfort
/// band. The SFO box lies inside the TECFO, which lies inside the DFO.
/// Throws GenerationError when the band cannot be held, UnsupportedInstance
/// for UFO.
FlexOffer generate_fo(const HeatPumpModel& m, FoKind kind, const GenerationOptions& opts = {});

}  // namespace flexkit
