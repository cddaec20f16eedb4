#include "flexkit/heatpump.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flexkit/errors.hpp"
#include "flexkit/lp.hpp"

namespace flexkit {

namespace {

constexpr double kJoulesPerKwh = 3.6e6;

double ua(const HeatPumpModel& m) { return m.wall_area * m.c_ht; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Temperatures after 0..n slices with no heating.
std::vector<double> free_cooling(const HeatPumpModel& m) {
  std::vector<double> t = {m.t_init};
  for (int i = 0; i < m.horizon; ++i) t.push_back(m.alpha() * t.back() + m.gamma());
  return t;
}

// Row a*x + b*y <= c with a quantized to the wire precision, c lowered by the
// largest error the quantization can introduce for 0 <= x <= x_max.
HalfspaceRow quantized(double a, double b, double c, double x_max) {
  const double ar = round6(a);
  return {ar, b, floor6(c - std::abs(a - ar) * x_max)};
}

struct Dfo {
  std::vector<HalfspaceMatrix> slices;
  std::vector<EnergyBounds> y_ranges;
  EnergyBounds total;
};

// Bounds of x + y over a polygon (the next slice's cumulative energy).
EnergyBounds sum_range(const HalfspaceMatrix& p, std::size_t t) {
  if (t == 0) {
    const auto y = p.y_range(0.0);
    if (!y) throw GenerationError("comfort band cannot be held in slice 1");
    return *y;
  }
  const auto v = p.vertices();
  if (v.empty()) throw GenerationError("comfort band cannot be held in slice " + std::to_string(t + 1));
  EnergyBounds r{INFINITY, -INFINITY};
  for (const auto& q : v) {
    r.lower = std::min(r.lower, q.x + q.y);
    r.upper = std::max(r.upper, q.x + q.y);
  }
  return r;
}

EnergyBounds y_projection(const HalfspaceMatrix& p, std::size_t t) {
  if (t == 0) return *p.y_range(0.0);
  EnergyBounds r{INFINITY, -INFINITY};
  for (const auto& q : p.vertices()) {
    r.lower = std::min(r.lower, q.y);
    r.upper = std::max(r.upper, q.y);
  }
  return r;
}

// Each slice bounds the next temperature from both sides. With w the weight
// sum_{s<t} alpha^{t-1-s} e_s, the previous temperature is
// free[t-1] + beta * w and alpha^{t-2} x <= w <= x for e >= 0, so
//   alpha x + y           <= (t_max - gamma - alpha free[t-1]) / beta
//   alpha^{t-1} x + y     >= (t_min - gamma - alpha free[t-1]) / beta
// imply the band for every history with cumulative energy x.
Dfo build_dfo(const HeatPumpModel& m) {
  const double a = m.alpha();
  const double b = m.beta();
  const double g = m.gamma();
  const double emax = floor6(m.max_energy());
  const auto free = free_cooling(m);

  Dfo d;
  EnergyBounds x{0.0, 0.0};
  for (int t = 0; t < m.horizon; ++t) {
    const double up = (m.t_max - g - a * free[t]) / b;
    const double lo = (m.t_min - g - a * free[t]) / b;
    HalfspaceMatrix p;
    p.rows.push_back({0.0, -1.0, 0.0});
    p.rows.push_back({0.0, 1.0, emax});
    if (t == 0) {
      p.rows.push_back({0.0, 1.0, floor6(up)});
      p.rows.push_back({0.0, -1.0, floor6(-lo)});
    } else {
      p.rows.push_back({-1.0, 0.0, floor6(-x.lower)});
      p.rows.push_back({1.0, 0.0, floor6(x.upper)});
      p.rows.push_back(quantized(a, 1.0, up, x.upper));
      const double decay = std::pow(a, t);
      const double dr = round6(decay);
      p.rows.push_back({-dr, -1.0, floor6(-lo - std::abs(decay - dr) * x.upper)});
    }
    x = sum_range(p, t);
    const EnergyBounds y = y_projection(p, t);
    if (y.lower > y.upper) throw GenerationError("comfort band cannot be held in slice " + std::to_string(t + 1));
    d.y_ranges.push_back({floor6(y.lower), ceil6(y.upper)});
    d.slices.push_back(std::move(p));
  }
  d.total = x;
  return d;
}

// max of a*X + b*y with X in [k lo, k hi], y in [lo, hi]
double box_row_max(const HalfspaceRow& r, std::size_t k, double lo, double hi) {
  const double xs = static_cast<double>(k);
  return (r.a > 0 ? r.a * xs * hi : r.a * xs * lo) + (r.b > 0 ? r.b * hi : r.b * lo);
}

bool box_inside(const Dfo& d, double lo, double hi) {
  for (std::size_t t = 0; t < d.slices.size(); ++t) {
    for (const auto& r : d.slices[t].rows) {
      if (box_row_max(r, t, lo, hi) > r.c) return false;
    }
  }
  return true;
}

// Same test with the total-energy constraint coupling the slices: a 3-variable
// LP over (X = prior energy, y, Z = later energy) per row.
bool tec_box_inside(const Dfo& d, double lo, double hi, const EnergyBounds& te) {
  const std::size_t n = d.slices.size();
  for (std::size_t t = 0; t < n; ++t) {
    const double k = static_cast<double>(t);
    const double rest = static_cast<double>(n - t - 1);
    for (const auto& r : d.slices[t].rows) {
      LinearProgram lp(3);
      lp.cost = {-r.a, -r.b, 0.0};
      lp.add_bounds(0, k * lo, k * hi);
      lp.add_bounds(1, lo, hi);
      lp.add_bounds(2, rest * lo, rest * hi);
      lp.add_row({1.0, 1.0, 1.0}, te.upper);
      lp.add_row({-1.0, -1.0, -1.0}, -te.lower);
      const LpSolution s = solve_lp(lp);
      if (s.status == LpStatus::infeasible) continue;
      if (s.status != LpStatus::optimal || -s.objective > r.c) return false;
    }
  }
  return true;
}

struct Box {
  double lower;
  double upper;
};

// Rows with non-negative coefficients only see the upper bound and rows with
// non-positive coefficients only the lower one, so the widest box is found
// one side at a time: lowest lower bound first, then highest upper bound.
template <class Pred>
Box widest(const Box& seed, double emax, Pred pred) {
  Box box = seed;
  double in = seed.lower;
  double out = 0.0;
  if (pred({out, box.upper})) {
    in = out;
  } else {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (in + out);
      (pred({ceil6(mid), box.upper}) ? in : out) = mid;
    }
  }
  box.lower = ceil6(in);
  in = seed.upper;
  out = emax;
  if (pred({box.lower, out})) {
    in = out;
  } else {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (in + out);
      (pred({box.lower, floor6(mid)}) ? in : out) = mid;
    }
  }
  box.upper = floor6(in);
  return box;
}

std::string model_seed(const HeatPumpModel& m, FoKind kind) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind) << m.p_max << ' ' << m.cop << ' ' << m.wall_area << ' ' << m.c_ht << ' ' << m.t_out << ' '
     << m.t_min << ' ' << m.t_max << ' ' << m.t_init << ' ' << m.thermal_capacitance << ' ' << m.dt << ' ' << m.horizon;
  return os.str();
}

}  // namespace

double HeatPumpModel::alpha() const { return 1.0 - wall_area * c_ht * dt / thermal_capacitance; }
double HeatPumpModel::beta() const { return cop * kJoulesPerKwh / thermal_capacitance; }
double HeatPumpModel::gamma() const { return wall_area * c_ht * dt * t_out / thermal_capacitance; }

void validate(const HeatPumpModel& m) {
  auto fail = [](const std::string& what) { throw ValidationError("heat-pump model: " + what); };
  const std::pair<const char*, double> positive[] = {{"p_max", m.p_max},   {"cop", m.cop},
                                                     {"wall_area", m.wall_area}, {"c_ht", m.c_ht},
                                                     {"t_out", m.t_out}, {"t_min", m.t_min},
                                                     {"thermal_capacitance", m.thermal_capacitance}, {"dt", m.dt}};
  for (const auto& [name, v] : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be positive");
  }
  if (m.horizon <= 0) fail("horizon must be positive");
  if (!(m.t_min <= m.t_init && m.t_init <= m.t_max)) fail("t_init must lie in [t_min, t_max]");
  if (!(m.alpha() > 0.0)) fail("time step too long for the thermal capacitance (wall losses exceed stored heat)");
  if (m.max_energy() < steady_state_energy(m)) fail("p_max cannot hold the room at t_init");
}

HeatPumpModel parse_model_config(std::string_view text) {
  HeatPumpModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected name = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string raw = trim(std::string_view(body).substr(eq + 1));
    double v = 0.0;
    const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || end != raw.data() + raw.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": '" + raw + "' is not a number");
    }
    if (key == "p_max") m.p_max = v;
    else if (key == "cop") m.cop = v;
    else if (key == "wall_area") m.wall_area = v;
    else if (key == "c_ht") m.c_ht = v;
    else if (key == "t_out") m.t_out = v;
    else if (key == "t_min") m.t_min = v;
    else if (key == "t_max") m.t_max = v;
    else if (key == "t_init") m.t_init = v;
    else if (key == "thermal_capacitance") m.thermal_capacitance = v;
    else if (key == "dt") m.dt = v;
    else if (key == "horizon") {
      if (v != std::floor(v)) throw ParseError("line " + std::to_string(lineno) + ": horizon must be an integer");
      m.horizon = static_cast<int>(v);
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  validate(m);
  return m;
}

HeatPumpModel load_model_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model_config(ss.str());
}

double steady_state_energy(const HeatPumpModel& m) { return holding_energy(m, m.t_init); }

double holding_energy(const HeatPumpModel& m, double t) {
  return ua(m) * (t - m.t_out) * m.dt / (m.cop * kJoulesPerKwh);
}

double step(const HeatPumpModel& m, double t_room, double e) {
  if (!(e >= 0.0 && e <= m.max_energy())) {
    throw RangeError("energy " + std::to_string(e) + " kWh outside device range [0, " + std::to_string(m.max_energy()) +
                     "]");
  }
  return t_room + (m.cop * e * kJoulesPerKwh - ua(m) * (t_room - m.t_out) * m.dt) / m.thermal_capacitance;
}

std::vector<double> simulate(const HeatPumpModel& m, const std::vector<double>& energies) {
  std::vector<double> out;
  double t = m.t_init;
  for (double e : energies) {
    t = t + (m.cop * e * kJoulesPerKwh - ua(m) * (t - m.t_out) * m.dt) / m.thermal_capacitance;
    out.push_back(t);
  }
  return out;
}

bool keeps_comfort(const HeatPumpModel& m, const std::vector<double>& energies, double tol) {
  for (double t : simulate(m, energies)) {
    if (t < m.t_min - tol || t > m.t_max + tol) return false;
  }
  return true;
}

FlexOffer generate_fo(const HeatPumpModel& m, FoKind kind, const GenerationOptions& opts) {
  if (kind == FoKind::ufo) throw UnsupportedInstance("the heat-pump generator emits SFO, TECFO or DFO");
  validate(m);
  const Dfo d = build_dfo(m);
  const double centre = round6(steady_state_energy(m));
  const std::size_t n = static_cast<std::size_t>(m.horizon);

  FlexOffer fo;
  fo.id = opts.id.empty() ? stable_id("hp", model_seed(m, kind)) : opts.id;
  fo.state = LifecycleState::initial;
  fo.num_seconds_per_interval = std::llround(m.dt);
  fo.creation_time = opts.start;
  fo.creation_interval = epoch_seconds(opts.start) / fo.num_seconds_per_interval;
  fo.offered_by_id = opts.offered_by;
  fo.start_after_time = opts.start;
  fo.start_before_time = opts.start;
  fo.start_after_interval = fo.creation_interval;
  fo.start_before_interval = fo.creation_interval;
  fo.default_schedule = make_schedule(std::vector<double>(n, centre), ScheduleKind::default_schedule, opts.start);

  if (kind == FoKind::dfo) {
    for (std::size_t t = 0; t < n; ++t) fo.profile.push_back({d.y_ranges[t], std::nullopt, 1, 1});
    fo.dependency = d.slices;
    return fo;
  }

  const double emax = floor6(m.max_energy());
  auto sfo_ok = [&](const Box& b) { return b.lower <= b.upper && box_inside(d, b.lower, b.upper); };
  if (!sfo_ok({centre, centre})) {
    throw GenerationError("no slice box around the steady-state energy keeps the room in its comfort band");
  }
  Box box = widest({centre, centre}, emax, sfo_ok);

  if (kind == FoKind::tecfo) {
    const double nn = static_cast<double>(n);
    const EnergyBounds te{std::min(ceil6(d.total.lower), round6(nn * box.lower)),
                          std::max(floor6(d.total.upper), round6(nn * box.upper))};
    auto tec_ok = [&](const Box& b) { return b.lower <= b.upper && tec_box_inside(d, b.lower, b.upper, te); };
    box = widest(box, emax, tec_ok);
    fo.total_energy = te;
  }
  for (std::size_t t = 0; t < n; ++t) fo.profile.push_back({{box.lower, box.upper}, std::nullopt, 1, 1});
  return fo;
}

}  // namespace flexkit
