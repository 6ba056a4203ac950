// doa: tune, simulate and evaluate depth-of-anesthesia controllers.
//
//   doa optimize --controller fofpid --seed 42 --agents 30 --iters 100 --out run/
//   doa simulate --spec run/best.json --patients all --out sim/
//   doa evaluate --spec fopid/best.json --spec fofpid/best.json --out eval/

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "doa/doa.hpp"
#include "doa/io.hpp"

namespace fs = std::filesystem;
using namespace doa;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string registry;
  std::string patients;
  double horizon = 30.0;
  std::string out = ".";
};

std::vector<PatientProfile> select_patients(const CommonArgs& a, const std::string& fallback) {
  std::vector<PatientProfile> reg;
  try {
    reg = a.registry.empty() ? default_registry() : load_patient_registry(a.registry);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const std::string sel = a.patients.empty() ? fallback : a.patients;
  if (sel == "all") return reg;
  std::vector<PatientProfile> out;
  std::stringstream ss(sel);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("invalid patient id '" + tok + "'");
    }
    auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& p) { return p.id == id; });
    if (it == reg.end()) throw UsageError("patient " + tok + " is not in the registry");
    out.push_back(*it);
  }
  if (out.empty()) throw UsageError("patient selection is empty");
  return out;
}

SimConfig sim_config(const CommonArgs& a) {
  SimConfig c;
  c.horizon = a.horizon;
  if (!(c.horizon > 0.0)) throw UsageError("--horizon-min must be > 0");
  return c;
}

fs::path output_dir(const CommonArgs& a) {
  fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + a.out + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << text;
}

std::string trajectory_name(int patient_id) {
  return "trajectory_patient_" + std::to_string(patient_id) + ".csv";
}

void write_trajectory(const fs::path& dir, const SimResult& r) {
  std::ostringstream ss;
  write_trajectory_csv(ss, r);
  write_file(dir / trajectory_name(r.patient_id), ss.str());
}

StoredSpec load_spec_or_usage(const std::string& path) {
  try {
    return load_stored_spec(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

struct OptimizeArgs {
  CommonArgs common;
  std::string controller = "fofpid";
  std::uint64_t seed = 42;
  std::size_t agents = 30;
  std::size_t iters = 100;
  std::string optimize_rules = "off";
  unsigned threads = 0;
};

int cmd_optimize(const OptimizeArgs& a) {
  const auto fit_patients = select_patients(a.common, "1");
  const SimConfig sim = sim_config(a.common);
  const fs::path dir = output_dir(a.common);
  const Variant variant = parse_variant(a.controller);
  const bool with_rules = a.optimize_rules == "on";

  Objective objective;
  objective.variant = variant;
  objective.patients = fit_patients;
  objective.sim = sim;

  WoaConfig woa;
  woa.agents = a.agents;
  woa.iterations = a.iters;
  woa.seed = a.seed;
  woa.threads = a.threads;
  if (woa.agents < 2 || woa.iterations < 1) throw UsageError("need --agents >= 2 and --iters >= 1");

  const TuningResult tuned = tune(variant, objective, woa, with_rules);

  json best = {{"controller", std::string(to_string(variant))},
               {"genes", tuned.woa.best},
               {"cost", tuned.woa.best_cost},
               {"spec", spec_to_json(tuned.spec)},
               {"optimization",
                {{"seed", a.seed},
                 {"agents", a.agents},
                 {"iterations", a.iters},
                 {"spiral_b", woa.spiral_b},
                 {"optimize_rules", with_rules},
                 {"horizon_min", sim.horizon},
                 {"patients", [&] {
                    std::vector<int> ids;
                    for (const auto& p : fit_patients) ids.push_back(p.id);
                    return ids;
                  }()}}}};
  if (variant == Variant::fofpid) best["fuzzy_genes"] = tuned.woa.best;
  write_file(dir / "best.json", best.dump(2) + "\n");

  std::ostringstream hist;
  write_history_csv(hist, tuned.woa.history);
  write_file(dir / "history.csv", hist.str());

  int status = 0;
  try {
    write_trajectory(dir, simulate(fit_patients.front(), tuned.spec, sim));
  } catch (const DivergenceError& e) {
    std::cerr << "error: best controller diverges on patient " << fit_patients.front().id
              << ": " << e.what() << "\n";
    status = kExitFailure;
  }
  if (tuned.woa.best_cost >= kPenaltyCost) {
    std::cerr << "error: best cost " << tuned.woa.best_cost
              << " is a failure penalty (divergence or BIS below " << kOverdoseFloor << ")\n";
    status = kExitFailure;
  }
  std::cout << "best cost " << tuned.woa.best_cost << " written to " << (dir / "best.json").string()
            << "\n";
  return status;
}

struct SimulateArgs {
  CommonArgs common;
  std::string spec_path;
  std::string controller;
  std::vector<double> genes;
};

int cmd_simulate(const SimulateArgs& a) {
  ControllerSpec spec;
  if (!a.spec_path.empty()) {
    spec = load_spec_or_usage(a.spec_path).spec;
  } else if (!a.controller.empty() && !a.genes.empty()) {
    try {
      spec = decode_controller_genes(parse_variant(a.controller), a.genes);
    } catch (const LayoutError& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("simulate needs --spec FILE or --controller with --genes");
  }
  const auto patients = select_patients(a.common, "all");
  const SimConfig sim = sim_config(a.common);
  const fs::path dir = output_dir(a.common);
  int status = 0;
  for (const auto& p : patients) {
    try {
      write_trajectory(dir, simulate(p, spec, sim));
    } catch (const DivergenceError& e) {
      std::cerr << "patient " << p.id << ": " << e.what() << " at t = " << e.time_min << " min\n";
      status = kExitFailure;
    }
  }
  return status;
}

struct EvaluateArgs {
  CommonArgs common;
  std::vector<std::string> spec_paths;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.spec_paths.empty() || a.spec_paths.size() > 2)
    throw UsageError("evaluate takes one or two --spec files");
  const auto patients = select_patients(a.common, "all");
  const SimConfig sim = sim_config(a.common);
  const fs::path dir = output_dir(a.common);

  std::vector<StoredSpec> specs;
  for (const auto& path : a.spec_paths) specs.push_back(load_spec_or_usage(path));

  json doc = {{"horizon_min", sim.horizon}, {"setpoint", sim.setpoint}};
  std::vector<std::vector<CohortRow>> tables;
  json spec_list = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    tables.push_back(evaluate_cohort(specs[i].spec, patients, sim));
    json rows = json::array();
    for (const auto& row : tables.back()) {
      json r = {{"patient_id", row.patient_id}};
      if (row.metrics)
        r["metrics"] = metrics_to_json(*row.metrics);
      else
        r["error"] = row.error;
      rows.push_back(r);
    }
    spec_list.push_back({{"file", a.spec_paths[i]},
                         {"controller", std::string(to_string(specs[i].variant))},
                         {"patients", rows}});
  }
  doc["specs"] = spec_list;

  if (tables.size() == 2) {
    json cmp = json::array();
    for (std::size_t k = 0; k < patients.size(); ++k) {
      const auto& first = tables[0][k];
      const auto& second = tables[1][k];
      json r = {{"patient_id", first.patient_id}};
      if (first.metrics && second.metrics) {
        const json m0 = metrics_to_json(*first.metrics);
        const json m1 = metrics_to_json(*second.metrics);
        json delta;
        for (const auto& [key, v0] : m0.items())
          if (v0.is_number_float()) delta[key] = m1[key].get<double>() - v0.get<double>();
        r["delta_second_minus_first"] = delta;
        r["cost_delta"] = second.metrics->cost - first.metrics->cost;
      } else {
        r["error"] = "one of the runs diverged";
      }
      cmp.push_back(r);
    }
    doc["comparison"] = cmp;
  }
  write_file(dir / "metrics.json", doc.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--registry", c.registry, "Patient registry JSON (default: built-in cohort)");
  cmd->add_option("--patients", c.patients, "Comma-separated patient ids or 'all'");
  cmd->add_option("--horizon-min", c.horizon, "Simulated horizon in minutes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-of-anesthesia controller tuning and simulation"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Tune a controller with WOA on the fit patient(s)");
  add_common(optimize, opt.common);
  optimize->add_option("--controller", opt.controller, "pid | fopid | fofpid")
      ->check(CLI::IsMember({"pid", "fopid", "fofpid"}));
  optimize->add_option("--seed", opt.seed, "RNG seed");
  optimize->add_option("--agents", opt.agents, "Whale population size");
  optimize->add_option("--iters", opt.iters, "WOA iterations");
  optimize->add_option("--optimize-rules", opt.optimize_rules, "Also tune the 75 rule consequents")
      ->check(CLI::IsMember({"on", "off"}));
  optimize->add_option("--threads", opt.threads, "Objective evaluation threads (0 = all cores)");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Write trajectory CSVs for a controller");
  add_common(simulate_cmd, sim.common);
  simulate_cmd->add_option("--spec", sim.spec_path, "best.json from optimize");
  simulate_cmd->add_option("--controller", sim.controller, "pid | fopid | fofpid (with --genes)")
      ->check(CLI::IsMember({"pid", "fopid", "fofpid"}));
  simulate_cmd->add_option("--genes", sim.genes, "Explicit gene vector")->delimiter(',');

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Cohort metrics for one or two controllers");
  add_common(evaluate, eval.common);
  evaluate->add_option("--spec", eval.spec_paths, "best.json file(s); two for a comparison")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(optimize)) return cmd_optimize(opt);
    if (app.got_subcommand(simulate_cmd)) return cmd_simulate(sim);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(eval);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
