// flexkit command-line front end.
//
// Exit codes: 0 success, 1 validation failure or bad usage, 2 infeasible,
// 3 I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "flexkit/aggregate.hpp"
#include "flexkit/codec.hpp"
#include "flexkit/errors.hpp"
#include "flexkit/heatpump.hpp"
#include "flexkit/lifecycle.hpp"
#include "flexkit/metric.hpp"
#include "flexkit/optimize.hpp"
#include "flexkit/rdf.hpp"
#include "flexkit/uncertain.hpp"

namespace fs = std::filesystem;
using namespace flexkit;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kInfeasible = 2, kIo = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("error reading " + path);
  return ss.str();
}

// Write through a temporary file so a failure never leaves partial output.
void write_file(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << content;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("error writing " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot write " + path);
  }
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

double tolerance() {
  const char* env = std::getenv("FLEXKIT_TOLERANCE");
  if (env == nullptr || *env == '\0') return kFeasibilityTolerance;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v >= 0.0)) throw ValidationError("FLEXKIT_TOLERANCE must be a non-negative number");
  return v;
}

PriceCurve read_prices(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  PriceCurve prices;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "price_eur_per_kwh") throw ParseError(path + ": expected header price_eur_per_kwh");
      header = true;
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0') throw ParseError(path + ":" + std::to_string(lineno) + ": not a number");
    prices.push_back(v);
  }
  if (!header) throw ParseError(path + ": expected header price_eur_per_kwh");
  return prices;
}

FlexOffer read_fo(const std::string& path) { return parse_message(read_file(path)); }

std::string schedule_table(const Schedule& s) {
  std::string out = "slice,energy,price\n";
  const Schedule u = unit_expand(s);
  for (std::size_t t = 0; t < u.slices.size(); ++t) {
    out += std::to_string(t + 1) + "," + fixed(u.slices[t].energy_amount) + "," +
           (u.slices[t].price ? fixed(*u.slices[t].price) : "") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& in) {
  const double tol = tolerance();
  const FlexOffer fo = read_fo(in);
  std::cout << "kind: " << to_string(fo.kind()) << "\n";
  std::cout << "slices: " << fo.slice_count() << "\n";
  bool ok = true;
  bool any = false;
  auto check = [&](const char* name, const std::optional<Schedule>& s) {
    if (!s) return;
    any = true;
    const FeasibilityReport r = check_schedule(fo, *s, tol);
    std::cout << name << ": " << (r.feasible ? "feasible" : "infeasible") << "\n";
    for (const auto& v : r.violations) std::cout << "  " << v.describe() << "\n";
    ok = ok && r.feasible;
  };
  check("defaultSchedule", fo.default_schedule);
  check("flexOfferSchedule", fo.flexoffer_schedule);
  if (!any) {
    std::cout << "valid\n";
    return kOk;
  }
  std::cout << (ok ? "feasible" : "infeasible") << "\n";
  return ok ? kOk : kInfeasible;
}

int cmd_optimize(const std::string& in, const std::string& prices_path, double p0, const std::string& out) {
  const FlexOffer fo = read_fo(in);
  const PriceCurve prices = read_prices(prices_path);
  const OptimizationResult r = optimize(fo, prices, p0);
  std::cout << "kind: " << to_string(fo.kind()) << "\n";
  if (r.status != OptStatus::optimal) {
    std::cout << "status: infeasible\n";
    return kInfeasible;
  }
  std::cout << "status: optimal\n";
  std::cout << "objective: " << fixed(r.objective) << "\n";
  std::cout << schedule_table(r.schedule);
  if (!out.empty()) {
    FlexOffer scheduled = fo;
    scheduled.flexoffer_schedule = r.schedule;
    write_file(out, serialize_message(scheduled));
  }
  return kOk;
}

int cmd_aggregate(const std::vector<std::string>& ins, const std::string& out) {
  std::vector<FlexOffer> fos;
  for (const auto& p : ins) fos.push_back(read_fo(p));
  const AggregateBinding b = aggregate(fos);
  write_file(out, serialize_message(b.aggregate_fo));
  std::cout << "aggregate: " << b.aggregate_fo.id << "\n";
  std::cout << "members: " << b.members.size() << "\n";
  std::cout << "slices: " << b.aggregate_fo.slice_count() << "\n";
  if (b.aggregate_fo.total_energy) {
    std::cout << "total energy: [" << fixed(b.aggregate_fo.total_energy->lower) << ", "
              << fixed(b.aggregate_fo.total_energy->upper) << "]\n";
  }
  return kOk;
}

Schedule read_schedule(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.is_object() && j.contains("flexOffer")) {
    const FlexOffer fo = from_json(j);
    if (!fo.flexoffer_schedule) throw ValidationError(path + ": message carries no flexOfferSchedule");
    return *fo.flexoffer_schedule;
  }
  return parse_schedule(j, ScheduleKind::flexoffer_schedule);
}

int cmd_disaggregate(const std::string& agg_path, const std::string& schedule_path,
                     const std::vector<std::string>& members, const std::string& out) {
  const FlexOffer agg = read_fo(agg_path);
  const Schedule s = read_schedule(schedule_path);
  std::vector<FlexOffer> fos;
  for (const auto& p : members) fos.push_back(read_fo(p));
  const AggregateBinding b = aggregate(fos);
  if (b.aggregate_fo.id != agg.id) throw ValidationError("members do not form aggregate " + agg.id);
  const auto parts = disaggregate(b, s);
  std::cout << "member,slice,energy\n";
  Json all = Json::array();
  for (const auto& p : parts) {
    const auto e = energies(p.schedule);
    for (std::size_t t = 0; t < e.size(); ++t) std::cout << p.id << "," << t + 1 << "," << fixed(e[t]) << "\n";
    Json j = Json::object();
    j["id"] = p.id;
    j["flexOfferSchedule"] = serialize_schedule(p.schedule, true);
    all.push_back(std::move(j));
  }
  if (!out.empty()) write_file(out, all.dump(2) + "\n");
  return kOk;
}

int cmd_thresh(const std::string& in, double p0) {
  const FlexOffer fo = read_fo(in);
  if (fo.kind() != FoKind::ufo) throw ValidationError("thresh needs an uncertain FlexOffer");
  for (std::size_t t = 0; t < fo.uncertain.size(); ++t) {
    const auto iv = threshold_intervals(fo.uncertain[t], p0);
    std::cout << "slice " << t + 1 << ":";
    if (iv.empty()) std::cout << " empty";
    for (std::size_t k = 0; k < iv.size(); ++k) {
      std::cout << (k == 0 ? " " : " u ") << "[" << fixed(iv[k].lower) << ", " << fixed(iv[k].upper) << "]";
    }
    std::cout << "\n";
  }
  return kOk;
}

int cmd_gen(const std::string& model, const std::string& kind, const std::string& out) {
  const HeatPumpModel m = load_model_config(model);
  const FoKind k = parse_fo_kind(kind);
  if (k == FoKind::ufo) throw ValidationError("gen supports sfo, tecfo and dfo");
  const FlexOffer fo = generate_fo(m, k);
  write_file(out, serialize_message(fo));
  std::cout << "generated " << to_string(k) << " " << fo.id << " (" << fo.slice_count() << " slices)\n";
  return kOk;
}

int cmd_metric(const std::string& model, const std::string& prices_path, bool reference, double t_step, double e_step) {
  if (reference) {
    std::cout << "# published retention figures from external experiments; not reproduced here\n";
    std::cout << "device,model_kind,retained_percent\n";
    for (const auto& r : reference_retention()) std::cout << r.device << "," << r.model << "," << fixed(r.percent) << "\n";
    return kOk;
  }
  if (model.empty() || prices_path.empty()) throw ValidationError("metric needs --model and --prices");
  const HeatPumpModel m = load_model_config(model);
  const PriceCurve prices = read_prices(prices_path);
  const auto rows = heatpump_metric(m, prices, {t_step, e_step});
  std::cout << "model_kind,baseline_cost,optimized_cost,profit,retained\n";
  for (const auto& r : rows) {
    std::cout << to_string(r.model_kind) << "," << fixed(r.baseline_cost) << "," << fixed(r.optimized_cost) << ","
              << fixed(r.profit) << "," << fixed(r.retained) << "\n";
  }
  return kOk;
}

int cmd_export_rdf(const std::string& in, const std::string& out) {
  const FlexOffer fo = read_fo(in);
  const std::string ttl = fo_to_turtle(fo);
  if (out.empty()) std::cout << ttl;
  else write_file(out, ttl);
  return kOk;
}

int cmd_coverage(const std::string& in) {
  std::cout << format_coverage(saref_coverage(read_fo(in)));
  return kOk;
}

int cmd_simulate(int n, const std::string& prices_path, const std::string& policy, const std::string& model,
                 const std::string& kind, const std::string& log_path) {
  if (n <= 0) throw ValidationError("--n must be positive");
  const HeatPumpModel m = model.empty() ? HeatPumpModel{} : load_model_config(model);
  const PriceCurve prices = read_prices(prices_path);
  const ExchangeLog log = run_exchange(std::vector<HeatPumpModel>(static_cast<std::size_t>(n), m), prices,
                                       parse_policy(policy), parse_fo_kind(kind));
  if (!log_path.empty()) write_file(log_path, to_jsonl(log));
  std::cout << "id,state,reason\n";
  for (const auto& fo : log.final_fos) {
    std::cout << fo.id << "," << to_string(fo.state) << "," << fo.state_reason.value_or("") << "\n";
  }
  if (log.aggregate_schedule) std::cout << "aggregate objective: " << fixed(log.aggregate_objective) << "\n";
  return kOk;
}

int cmd_plot(const std::string& in, const std::string& out, const std::string& prices_path, double p0) {
  const FlexOffer fo = read_fo(in);
  std::vector<EnergyBounds> bounds;
  if (fo.kind() == FoKind::ufo) {
    for (const auto& f : fo.uncertain) {
      const auto iv = threshold_intervals(f, p0);
      bounds.push_back(iv.empty() ? EnergyBounds{NAN, NAN} : EnergyBounds{iv.front().lower, iv.back().upper});
    }
  } else {
    for (const auto& sc : fo.profile) bounds.push_back(sc.energy);
  }
  std::optional<std::vector<double>> sched;
  if (fo.flexoffer_schedule) sched = energies(*fo.flexoffer_schedule);
  else if (fo.default_schedule) sched = energies(*fo.default_schedule);
  if (!prices_path.empty()) {
    const OptimizationResult r = optimize(fo, read_prices(prices_path), p0);
    if (r.status != OptStatus::optimal) {
      std::cerr << "error: no feasible schedule\n";
      return kInfeasible;
    }
    sched = energies(r.schedule);
  }
  std::string csv = "slice,lower,upper,schedule\n";
  for (std::size_t t = 0; t < bounds.size(); ++t) {
    csv += std::to_string(t + 1) + "," + (std::isnan(bounds[t].lower) ? "" : fixed(bounds[t].lower)) + "," +
           (std::isnan(bounds[t].upper) ? "" : fixed(bounds[t].upper)) + "," +
           (sched && t < sched->size() ? fixed((*sched)[t]) : "") + "\n";
  }
  write_file(out, csv);
  return kOk;
}

int cmd_fmt(const std::string& in, const std::string& out) {
  const std::string text = serialize_message(read_fo(in));
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flexkit: FlexOffer validation, optimization, aggregation and export"};
  app.require_subcommand(1);

  std::string in, out, prices, agg, schedule, model, kind = "sfo", policy = "accept-all", log_path;
  std::vector<std::string> ins, members;
  double p0 = 1.0;
  double t_step = 0.01, e_step = 0.005;
  int n = 3;
  bool reference = false;

  auto* validate_cmd = app.add_subcommand("validate", "parse, check invariants and schedule feasibility");
  validate_cmd->add_option("--in", in, "FlexOffer message")->required();

  auto* optimize_cmd = app.add_subcommand("optimize", "cost-minimizing schedule");
  optimize_cmd->add_option("--in", in)->required();
  optimize_cmd->add_option("--prices", prices, "CSV with header price_eur_per_kwh")->required();
  optimize_cmd->add_option("--p0", p0, "probability threshold for uncertain FlexOffers");
  optimize_cmd->add_option("--out", out, "write the message with its flexOfferSchedule");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "aggregate SFO/TECFO messages");
  aggregate_cmd->add_option("--in", ins)->required()->expected(1, -1);
  aggregate_cmd->add_option("--out", out)->required();

  auto* disagg_cmd = app.add_subcommand("disaggregate", "split an aggregate schedule over its members");
  disagg_cmd->add_option("--agg", agg)->required();
  disagg_cmd->add_option("--schedule", schedule, "schedule JSON or message with flexOfferSchedule")->required();
  disagg_cmd->add_option("--members", members)->required()->expected(1, -1);
  disagg_cmd->add_option("--out", out, "write member schedules as JSON");

  auto* thresh_cmd = app.add_subcommand("thresh", "feasible energy intervals of an uncertain FlexOffer");
  thresh_cmd->add_option("--in", in)->required();
  thresh_cmd->add_option("--p0", p0)->required();

  auto* gen_cmd = app.add_subcommand("gen", "generate a FlexOffer from a heat-pump model");
  gen_cmd->add_option("--model", model)->required();
  gen_cmd->add_option("--kind", kind)->required()->check(CLI::IsMember({"sfo", "tecfo", "dfo"}));
  gen_cmd->add_option("--out", out)->required();

  auto* metric_cmd = app.add_subcommand("metric", "profit and retention against the exact device model");
  metric_cmd->add_option("--model", model);
  metric_cmd->add_option("--prices", prices);
  metric_cmd->add_option("--temperature-step", t_step, "oracle grid, K");
  metric_cmd->add_option("--energy-step", e_step, "oracle grid, kWh");
  metric_cmd->add_flag("--reference", reference, "print published retention figures instead (not reproduced)");

  auto* rdf_cmd = app.add_subcommand("export-rdf", "Turtle export");
  rdf_cmd->add_option("--in", in)->required();
  rdf_cmd->add_option("--out", out);

  auto* coverage_cmd = app.add_subcommand("coverage", "SAREF4ENER coverage of the populated attributes");
  coverage_cmd->add_option("--in", in)->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "prosumer/aggregator exchange");
  simulate_cmd->add_option("--n", n)->required();
  simulate_cmd->add_option("--prices", prices)->required();
  simulate_cmd->add_option("--policy", policy, "accept-all or min-flex:<kWh>");
  simulate_cmd->add_option("--model", model);
  simulate_cmd->add_option("--kind", kind)->check(CLI::IsMember({"sfo", "tecfo"}));
  simulate_cmd->add_option("--log", log_path, "JSON-lines exchange log");

  auto* plot_cmd = app.add_subcommand("plot", "per-slice bounds and schedule as CSV");
  plot_cmd->add_option("--in", in)->required();
  plot_cmd->add_option("--out", out)->required();
  plot_cmd->add_option("--prices", prices, "plot the optimized schedule");
  plot_cmd->add_option("--p0", p0);

  auto* fmt_cmd = app.add_subcommand("fmt", "canonical re-serialization");
  fmt_cmd->add_option("--in", in)->required();
  fmt_cmd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kInvalid;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(in);
    if (optimize_cmd->parsed()) return cmd_optimize(in, prices, p0, out);
    if (aggregate_cmd->parsed()) return cmd_aggregate(ins, out);
    if (disagg_cmd->parsed()) return cmd_disaggregate(agg, schedule, members, out);
    if (thresh_cmd->parsed()) return cmd_thresh(in, p0);
    if (gen_cmd->parsed()) return cmd_gen(model, kind, out);
    if (metric_cmd->parsed()) return cmd_metric(model, prices, reference, t_step, e_step);
    if (rdf_cmd->parsed()) return cmd_export_rdf(in, out);
    if (coverage_cmd->parsed()) return cmd_coverage(in);
    if (simulate_cmd->parsed()) return cmd_simulate(n, prices, policy, model, kind, log_path);
    if (plot_cmd->parsed()) return cmd_plot(in, out, prices, p0);
    if (fmt_cmd->parsed()) return cmd_fmt(in, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::runtime_error& e) {
    // model configs raise plain runtime_error when unreadable
    const bool io = dynamic_cast<const Error*>(&e) == nullptr;
    std::cerr << "error: " << e.what() << "\n";
    return io ? kIo : kInvalid;
  }
  return kInvalid;
}
