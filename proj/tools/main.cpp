// Experiment runner: every library operation behind one CLI with JSON
// configs, CSV/JSON artifacts and a reproducibility manifest per run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fpif/config.hpp"
#include "fpif/diagnostics.hpp"
#include "fpif/drift.hpp"
#include "fpif/fp_solver.hpp"
#include "fpif/io.hpp"
#include "fpif/particle.hpp"
#include "fpif/steady_state.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunContext {
  fpif::ExperimentConfig config;
  fs::path out_dir;
  bool check = false;
  int threads = 1;
  std::chrono::steady_clock::time_point started;
  std::string started_at;
};

RunContext open_run(const std::string& config_path, const std::string& config_inline,
                    const std::string& out_root, long seed_override, bool check,
                    int threads, const std::string& subcommand) {
  RunContext ctx;
  if (!config_path.empty())
    ctx.config = fpif::load_config_file(config_path);
  else
    ctx.config = fpif::parse_config(config_inline.empty() ? "{}" : config_inline);
  if (seed_override >= 0) {
    ctx.config.seed = static_cast<uint64_t>(seed_override);
    ctx.config.particles.seed = static_cast<uint64_t>(seed_override);
  }
  ctx.check = check;
  ctx.threads = threads;
  ctx.started = std::chrono::steady_clock::now();
  ctx.started_at = fpif::utc_timestamp();
  ctx.out_dir = fs::path(out_root) / (subcommand + "-" + ctx.config.canonical_hash());
  fs::create_directories(ctx.out_dir);
  fpif::write_text_file((ctx.out_dir / "config_resolved.json").string(),
                        ctx.config.to_json());
  return ctx;
}

void write_manifest(const RunContext& ctx, const json& extra = json::object()) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started)
          .count();
  json m;
  m["config_hash"] = ctx.config.canonical_hash();
  m["seed"] = ctx.config.seed;
  m["module_versions"] = {{"fpif_core", "0.1.0"}};
  m["started_at"] = ctx.started_at;
  m["wall_s"] = wall;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  fpif::write_text_file((ctx.out_dir / "manifest.json").string(), m.dump(2));
}

fpif::DensityField initial_state(const fpif::ExperimentConfig& cfg, const fpif::Grid& grid,
                                 const fpif::DriftSpec& spec) {
  if (cfg.initial_kind == "gaussian")
    return fpif::gaussian_bump(grid, cfg.initial_center, cfg.initial_sigma);
  if (cfg.initial_kind == "point") return fpif::point_mass(grid, cfg.initial_center);
  if (cfg.initial_kind == "steady") {
    auto op = fpif::build_operator(spec, grid, cfg.R, cfg.alpha_R);
    return op.stationary_state();
  }
  // file: CSV with columns x,u matching the grid
  fpif::DensityField out;
  const std::string text = fpif::read_text_file(cfg.initial_path);
  std::vector<double> vals;
  size_t pos = text.find('\n');  // skip header
  while (pos != std::string::npos && pos + 1 < text.size()) {
    size_t next = text.find('\n', pos + 1);
    const std::string line = text.substr(pos + 1, next - pos - 1);
    if (!line.empty()) {
      const size_t comma = line.find(',');
      if (comma != std::string::npos)
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    pos = next;
  }
  if (static_cast<int>(vals.size()) != grid.n_cells)
    throw std::invalid_argument("initial file does not match the grid");
  out.cells = std::move(vals);
  double mass = 0.0;
  for (double v : out.cells) mass += v;
  mass *= grid.dx();
  for (double& v : out.cells) v /= mass;
  return out;
}

void write_snapshot_csv(const fs::path& path, const fpif::Grid& grid,
                        const std::vector<double>& u) {
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i)
    rows.push_back({grid.center(i), u[i]});
  fpif::write_csv(path.string(), {"x", "u"}, rows);
}

int cmd_validate_drift(RunContext& ctx) {
  const auto spec = ctx.config.drift();
  const auto rep = fpif::validate_assumptions(spec);
  json j;
  j["left_branch_ok"] = rep.left_branch_ok;
  j["right_monotone_ok"] = rep.right_monotone_ok;
  auto put = [&](const char* name, const fpif::IntegralCheck& c) {
    j[name] = {{"finite", c.finite},
               {"value", c.finite ? c.value : 0.0},
               {"error_bound", c.finite ? c.error_bound : 0.0}};
  };
  put("inv_h_integrable", rep.inv_h_integrable);
  put("zeta_integrable", rep.zeta_integrable);
  put("third_condition", rep.third_condition);
  j["failures"] = rep.failures;
  j["admissible"] = rep.admissible();
  const auto poincare = fpif::poincare_condition_sup(spec);
  j["poincare_condition"] = {{"bounded", poincare.bounded},
                             {"sup_value", poincare.bounded ? poincare.sup_value : -1.0}};
  fpif::write_text_file((ctx.out_dir / "assumptions.json").string(), j.dump(2));
  write_manifest(ctx);
  std::cout << j.dump(2) << "\n";
  return (ctx.check && !rep.admissible()) ? 1 : 0;
}

int cmd_steady_state(RunContext& ctx) {
  const auto spec = ctx.config.drift();
  const auto grid = ctx.config.make_grid();
  const auto profile = fpif::compute_steady_state(spec, grid);
  const auto trunc =
      fpif::compute_truncated_steady_state(spec, ctx.config.R, ctx.config.alpha_R, grid);

  std::vector<std::vector<double>> rows;
  rows.reserve(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) {
    const double x = grid.center(i);
    const double u = profile.values[i];
    rows.push_back({x, u, spec.h(x) * u, u > 0 ? std::log(u) : -1e300});
  }
  fpif::write_csv((ctx.out_dir / "steady_state.csv").string(),
                  {"x", "u_inf", "h_u_inf", "log_u_inf"}, rows);
  write_snapshot_csv(ctx.out_dir / "steady_state_truncated.csv", grid,
                     trunc.profile.values);

  double mass = 0.0;
  for (double v : profile.values) mass += v;
  mass *= grid.dx();

  json j;
  j["n_inf"] = profile.n_inf;
  j["lambda_R"] = trunc.lambda_R;
  j["nbar_R"] = trunc.nbar_R;
  j["mass"] = mass;
  j["quadrature_tol"] = profile.quadrature_tol;
  fpif::write_text_file((ctx.out_dir / "summary.json").string(), j.dump(2));
  write_manifest(ctx);
  std::cout << j.dump(2) << "\n";

  if (ctx.check) {
    const double res5 = fpif::tail_residual(profile, spec, 5.0);
    if (std::abs(mass - 1.0) > 1e-8) return 1;
    if (grid.x_max > 5.0 && res5 > spec.zeta(5.0)) return 1;
  }
  return 0;
}

int cmd_evolve(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto spec = cfg.drift();
  const auto grid = cfg.make_grid();
  const auto u0 = initial_state(cfg, grid, spec);
  auto trace = fpif::evolve(u0, spec, grid, cfg.R, cfg.alpha_R, cfg.dt, cfg.t_end,
                            cfg.snapshot_every);

  auto op = fpif::build_operator(spec, grid, cfg.R, cfg.alpha_R);
  const auto discrete_ref = op.stationary_profile();
  const auto profile = fpif::compute_steady_state(spec, grid);
  fpif::attach_entropy_series(trace, discrete_ref, fpif::EntropyKind::Square);
  fpif::attach_e_norm_series(trace, profile);

  // trace csv: per-step series
  {
    std::vector<std::vector<double>> rows;
    rows.reserve(trace.times.size());
    for (size_t k = 0; k < trace.times.size(); ++k)
      rows.push_back({trace.times[k], trace.firing_rate[k], trace.mass[k],
                      trace.cumulative_rate[k]});
    fpif::write_csv((ctx.out_dir / "trace.csv").string(),
                    {"t", "N_R", "mass", "int_N_R"}, rows);
  }
  // snapshot series csv (snapshot times only)
  {
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < trace.snapshot_times.size(); ++k)
      rows.push_back({trace.snapshot_times[k], trace.entropy_series[k],
                      trace.e_norm_series[k]});
    fpif::write_csv((ctx.out_dir / "series.csv").string(),
                    {"t", "entropy_square", "e_norm"}, rows);
  }
  for (const auto& [t, u] : trace.snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_t%.6f.csv", t);
    write_snapshot_csv(ctx.out_dir / name, grid, u.cells);
  }

  const auto phi = fpif::compute_phi(spec, grid);
  const auto phi_res = fpif::phi_identity_residual(trace, phi, spec);
  const auto flux = fpif::boundary_flux_check(trace, spec, cfg.probes);

  double max_phi_res = 0.0;
  for (double r : phi_res) max_phi_res = std::max(max_phi_res, r);

  bool entropy_monotone = true;
  double worst_violation = 0.0;
  const double entropy_tol = 1e-8 * trace.entropy_series.front() + 1e-18;
  for (size_t k = 1; k < trace.entropy_series.size(); ++k) {
    const double v = trace.entropy_series[k] - trace.entropy_series[k - 1];
    if (v > entropy_tol) {
      entropy_monotone = false;
      worst_violation = std::max(worst_violation, v);
    }
  }

  double mass_err = 0.0;
  for (double m : trace.mass) mass_err = std::max(mass_err, std::abs(m - 1.0));

  const auto [wlo, whi] = cfg.effective_rate_window();
  json rate = json::object();
  bool rate_ok = true;
  try {
    const auto fit =
        fpif::fit_exponential_rate(trace.snapshot_times, trace.e_norm_series, wlo, whi);
    rate = {{"lambda", fit.lambda_hat}, {"M", fit.m_hat},    {"r2", fit.r_squared},
            {"window", {wlo, whi}},     {"reliable", fit.reliable}};
    rate_ok = fit.reliable && fit.lambda_hat > 0.0;
  } catch (const std::exception& e) {
    rate = {{"error", e.what()}};
    rate_ok = false;
  }

  // final distance to the stationary profile
  fpif::DensityField ref;
  ref.cells = profile.values;
  const double final_l1 =
      fpif::l1_distance(trace.snapshots.back().second, ref, grid);

  json j;
  j["entropy"] = {{"kind", "Square"},
                  {"monotone", entropy_monotone},
                  {"violations", worst_violation}};
  j["rate"] = rate;
  j["phi_identity"] = {{"max_residual", max_phi_res}};
  json probes_json = json::array();
  for (size_t p = 0; p < flux.probes.size(); ++p)
    probes_json.push_back({{"x", flux.probes[p]},
                           {"time_avg_discrepancy", flux.time_avg_discrepancy[p]}});
  j["flux_probes"] = probes_json;
  j["mass_error_max"] = mass_err;
  j["final_l1_to_u_inf"] = final_l1;
  j["nbar_discrete"] = discrete_ref.n_inf;
  fpif::write_text_file((ctx.out_dir / "diagnostics.json").string(), j.dump(2));
  write_manifest(ctx);
  std::cout << j.dump(2) << "\n";

  if (ctx.check) {
    if (mass_err > 1e-10) return 1;
    if (!entropy_monotone) return 1;
    if (cfg.initial_kind == "steady") {
      fpif::DensityField dref;
      dref.cells = discrete_ref.values;
      if (fpif::l1_distance(trace.snapshots.back().second, dref, grid) > 1e-6) return 1;
    } else if (max_phi_res > 1e-2 || !rate_ok) {
      return 1;
    }
  }
  return 0;
}

int cmd_particles(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto spec = cfg.drift();
  const auto grid = cfg.make_grid();
  const auto profile = fpif::compute_steady_state(spec, grid);

  fpif::DensityField u0;
  if (cfg.initial_kind == "steady") {
    u0.cells = profile.values;
  } else {
    u0 = initial_state(cfg, grid, spec);
  }

  const auto result = fpif::simulate(u0, spec, cfg.particles, grid, ctx.threads);

  {
    std::vector<std::vector<double>> rows;
    rows.reserve(result.spikes.spike_times.size());
    for (double t : result.spikes.spike_times) rows.push_back({t});
    fpif::write_csv((ctx.out_dir / "spikes.csv").string(), {"t_spike"}, rows);
  }
  write_snapshot_csv(ctx.out_dir / "histogram_time_avg.csv", grid,
                     result.time_avg_density.cells);
  for (const auto& [t, snap] : result.snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "histogram_t%.6f.csv", t);
    write_snapshot_csv(ctx.out_dir / name, grid, snap.field.cells);
  }

  // L1 distance between the time-averaged histogram and the grid profile
  fpif::DensityField ref;
  ref.cells = profile.values;
  const double l1 = fpif::l1_distance(result.time_avg_density, ref, grid);

  json j;
  j["mean_rate"] = result.mean_rate;
  j["n_inf"] = profile.n_inf;
  j["rate_rel_error"] = std::abs(result.mean_rate - profile.n_inf) / profile.n_inf;
  j["in_flight_fraction"] = result.in_flight_fraction_end;
  j["l1_vs_pde"] = l1;
  fpif::write_text_file((ctx.out_dir / "summary.json").string(), j.dump(2));
  write_manifest(ctx);
  std::cout << j.dump(2) << "\n";

  if (ctx.check) {
    if (l1 > 0.05) return 1;
    if (std::abs(result.mean_rate - profile.n_inf) > 0.1 * profile.n_inf) return 1;
  }
  return 0;
}

int cmd_doeblin_rate(RunContext& ctx) {
  const auto& cfg = ctx.config;
  const auto spec = cfg.drift();
  const auto grid = cfg.make_grid();
  const auto profile = fpif::compute_steady_state(spec, grid);
  const auto [wlo, whi] = cfg.effective_rate_window();

  const std::vector<double> starts = {-3.0, 2.0};
  json table = json::array();
  std::vector<double> lambdas;
  bool all_ok = true;
  for (double c : starts) {
    auto u0 = fpif::gaussian_bump(grid, c, cfg.initial_sigma);
    auto trace = fpif::evolve(u0, spec, grid, cfg.R, cfg.alpha_R, cfg.dt, cfg.t_end,
                              cfg.snapshot_every);
    fpif::attach_e_norm_series(trace, profile);
    const auto fit =
        fpif::fit_exponential_rate(trace.snapshot_times, trace.e_norm_series, wlo, whi);
    table.push_back({{"initial_center", c},
                     {"lambda", fit.lambda_hat},
                     {"M", fit.m_hat},
                     {"r2", fit.r_squared},
                     {"reliable", fit.reliable}});
    lambdas.push_back(fit.lambda_hat);
    all_ok = all_ok && fit.reliable && fit.lambda_hat > 0.0;
  }
  const double rel_spread =
      std::abs(lambdas[0] - lambdas[1]) / std::max(lambdas[0], lambdas[1]);

  json j;
  j["fits"] = table;
  j["lambda_rel_spread"] = rel_spread;
  j["window"] = {wlo, whi};
  fpif::write_text_file((ctx.out_dir / "rate_table.json").string(), j.dump(2));
  write_manifest(ctx);
  std::cout << j.dump(2) << "\n";

  if (ctx.check && (!all_ok || rel_spread > 0.25)) return 1;
  return 0;
}

int cmd_report(RunContext& ctx, const std::string& out_root) {
  // traceability summary over prior run artifacts in out_root
  json report = json::array();
  bool all_pass = true;
  for (const auto& entry : fs::directory_iterator(out_root)) {
    if (!entry.is_directory()) continue;
    const fs::path dir = entry.path();
    json item;
    item["run"] = dir.filename().string();
    for (const char* name : {"assumptions.json", "summary.json", "diagnostics.json",
                             "rate_table.json"}) {
      const fs::path p = dir / name;
      if (!fs::exists(p)) continue;
      try {
        item[name] = json::parse(fpif::read_text_file(p.string()));
      } catch (...) {
      }
    }
    if (item.contains("assumptions.json"))
      item["checks"]["drift_admissible"] = item["assumptions.json"]["admissible"];
    if (item.contains("diagnostics.json")) {
      const auto& d = item["diagnostics.json"];
      item["checks"]["mass_conserved"] =
          d.contains("mass_error_max") && d["mass_error_max"].get<double>() <= 1e-10;
      item["checks"]["entropy_monotone"] = d["entropy"]["monotone"];
      if (d.contains("phi_identity"))
        item["checks"]["phi_identity_small"] =
            d["phi_identity"]["max_residual"].get<double>() <= 1e-2;
    }
    if (item.contains("checks"))
      for (auto it = item["checks"].begin(); it != item["checks"].end(); ++it)
        if (it.value().is_boolean() && !it.value().get<bool>()) all_pass = false;
    report.push_back(std::move(item));
  }
  json j;
  j["runs"] = report;
  j["all_pass"] = all_pass;
  fpif::write_text_file((ctx.out_dir / "report.json").string(), j.dump(2));
  write_manifest(ctx);
  std::cout << j.dump(2) << "\n";
  return (ctx.check && !all_pass) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative Fokker-Planck integrate-and-fire toolkit"};
  app.require_subcommand(1);

  std::string config_path, config_inline, out_root = "runs";
  long seed = -1;
  bool check = false;
  int threads = 1;
  app.add_option("--config", config_path, "Path to a JSON experiment config");
  app.add_option("--config-json", config_inline, "Inline JSON experiment config");
  app.add_option("--out", out_root, "Output root directory");
  app.add_option("--seed", seed, "Seed override");
  app.add_flag("--check", check, "Exit nonzero when acceptance thresholds fail");
  app.add_option("--threads", threads, "Worker threads for particle runs");

  auto* validate = app.add_subcommand("validate-drift", "Check drift assumptions");
  auto* steady = app.add_subcommand("steady-state", "Stationary profiles and constants");
  auto* evolve = app.add_subcommand("evolve", "Implicit finite-volume evolution");
  auto* particles = app.add_subcommand("particles", "Stochastic particle run");
  auto* doeblin = app.add_subcommand("doeblin-rate", "Convergence-rate table");
  auto* report = app.add_subcommand("report", "Summarize prior runs");
  for (auto* sub : {validate, steady, evolve, particles, doeblin, report})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string sub = app.get_subcommands().front()->get_name();
    RunContext ctx = open_run(config_path, config_inline, out_root, seed, check, threads, sub);
    if (validate->parsed()) return cmd_validate_drift(ctx);
    if (steady->parsed()) return cmd_steady_state(ctx);
    if (evolve->parsed()) return cmd_evolve(ctx);
    if (particles->parsed()) return cmd_particles(ctx);
    if (doeblin->parsed()) return cmd_doeblin_rate(ctx);
    if (report->parsed()) return cmd_report(ctx, out_root);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
