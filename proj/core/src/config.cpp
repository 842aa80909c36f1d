#include "fpif/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fpif/io.hpp"
#include "json.hpp"

namespace fpif {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
}

}  // namespace

DriftSpec ExperimentConfig::drift() const {
  return make_canonical_drift(drift_kind, x0, h0, x1);
}

Grid ExperimentConfig::make_grid() const { return Grid::centered(x_min, x_max, dx); }

std::pair<double, double> ExperimentConfig::effective_rate_window() const {
  if (rate_window) return *rate_window;
  return {t_end / 4.0, t_end};
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["drift"] = {{"kind", to_string(drift_kind)}, {"x0", x0}, {"h0", h0}, {"x1", x1}};
  j["grid"] = {{"x_min", x_min}, {"x_max", x_max}, {"dx", dx}};
  j["trunc"] = {{"R", R}, {"alpha_R", alpha_R}};
  j["time"] = {{"dt", dt}, {"t_end", t_end}, {"snapshot_every", snapshot_every}};
  json init = {{"kind", initial_kind}};
  if (initial_kind == "gaussian" || initial_kind == "point") {
    init["center"] = initial_center;
    if (initial_kind == "gaussian") init["sigma"] = initial_sigma;
  }
  if (initial_kind == "file") init["path"] = initial_path;
  j["initial"] = init;
  j["particles"] = {{"m_particles", particles.m_particles},
                    {"dt", particles.dt},
                    {"x_blow", particles.x_blow},
                    {"t_end", particles.t_end},
                    {"seed", particles.seed},
                    {"rate_window", particles.rate_window},
                    {"snapshot_every", particles.snapshot_every},
                    {"average_after", particles.average_after}};
  const auto win = effective_rate_window();
  j["diagnostics"] = {{"entropy_kinds", entropy_kinds},
                      {"probes", probes},
                      {"rate_window", {win.first, win.second}}};
  j["seed"] = seed;
  return j.dump(2);
}

std::string ExperimentConfig::canonical_hash() const { return fnv1a_hex(to_json()); }

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }

  ExperimentConfig c;
  reject_unknown(j, {"drift", "grid", "trunc", "time", "initial", "particles",
                     "diagnostics", "seed"},
                 "top level");

  if (j.contains("drift")) {
    const auto& d = j["drift"];
    reject_unknown(d, {"kind", "x0", "h0", "x1", "custom_table"}, "drift");
    if (d.contains("kind")) c.drift_kind = drift_kind_from_string(d["kind"]);
    c.x0 = d.value("x0", c.x0);
    c.h0 = d.value("h0", c.h0);
    c.x1 = d.value("x1", c.x1);
    if (c.drift_kind == DriftKind::Custom)
      throw std::invalid_argument(
          "config: Custom drifts are constructed programmatically; the runner "
          "accepts Quadratic or Exponential");
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"x_min", "x_max", "dx"}, "grid");
    c.x_min = g.value("x_min", c.x_min);
    c.x_max = g.value("x_max", c.x_max);
    c.dx = g.value("dx", c.dx);
  }
  bool have_alpha = false;
  if (j.contains("trunc")) {
    const auto& t = j["trunc"];
    reject_unknown(t, {"R", "alpha_R"}, "trunc");
    c.R = t.value("R", c.R);
    have_alpha = t.contains("alpha_R");
    if (have_alpha) c.alpha_R = t["alpha_R"];
  }
  if (!have_alpha) c.alpha_R = c.R * c.R * c.R;
  if (j.contains("time")) {
    const auto& t = j["time"];
    reject_unknown(t, {"dt", "t_end", "snapshot_every"}, "time");
    c.dt = t.value("dt", c.dt);
    c.t_end = t.value("t_end", c.t_end);
    c.snapshot_every = t.value("snapshot_every", c.snapshot_every);
  }
  if (j.contains("initial")) {
    const auto& s = j["initial"];
    reject_unknown(s, {"kind", "center", "sigma", "path"}, "initial");
    c.initial_kind = s.value("kind", c.initial_kind);
    c.initial_center = s.value("center", c.initial_center);
    c.initial_sigma = s.value("sigma", c.initial_sigma);
    c.initial_path = s.value("path", c.initial_path);
  }
  if (j.contains("particles")) {
    const auto& p = j["particles"];
    reject_unknown(p,
                   {"m_particles", "dt", "x_blow", "t_end", "seed", "rate_window",
                    "snapshot_every", "average_after"},
                   "particles");
    c.particles.m_particles = p.value("m_particles", c.particles.m_particles);
    c.particles.dt = p.value("dt", c.particles.dt);
    c.particles.x_blow = p.value("x_blow", c.particles.x_blow);
    c.particles.t_end = p.value("t_end", c.particles.t_end);
    c.particles.seed = p.value("seed", c.particles.seed);
    c.particles.rate_window = p.value("rate_window", c.particles.rate_window);
    c.particles.snapshot_every = p.value("snapshot_every", c.particles.snapshot_every);
    c.particles.average_after = p.value("average_after", c.particles.average_after);
  }
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"];
    reject_unknown(d, {"entropy_kinds", "probes", "rate_window"}, "diagnostics");
    if (d.contains("entropy_kinds"))
      c.entropy_kinds = d["entropy_kinds"].get<std::vector<std::string>>();
    if (d.contains("probes")) c.probes = d["probes"].get<std::vector<double>>();
    if (d.contains("rate_window")) {
      auto w = d["rate_window"].get<std::vector<double>>();
      if (w.size() != 2) throw std::invalid_argument("config: rate_window needs [lo, hi]");
      c.rate_window = {w[0], w[1]};
    }
  }
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();

  // cross-field constraints
  if (!(c.x_min < c.x0))
    throw std::invalid_argument("config: x_min < x0 violated");
  if (!(c.R < c.x_max))
    throw std::invalid_argument("config: R < x_max violated");
  if (!(c.x1 < c.R))
    throw std::invalid_argument("config: x1 < R violated");
  if (!(c.dx > 0.0) || !(c.dt > 0.0) || !(c.t_end > 0.0))
    throw std::invalid_argument("config: dx, dt, t_end must be positive");
  if (!(c.alpha_R > 0.0))
    throw std::invalid_argument("config: alpha_R must be positive");
  for (double p : c.probes)
    if (!(p < c.R)) throw std::invalid_argument("config: probes < R violated");
  if (!(c.particles.x_blow > c.x1))
    throw std::invalid_argument("config: x_blow > x1 violated");
  for (const auto& k : c.entropy_kinds)
    if (k != "Square" && k != "Abs" && k != "PositivePart")
      throw std::invalid_argument("config: unknown entropy kind \"" + k + "\"");
  if (c.initial_kind != "gaussian" && c.initial_kind != "steady" &&
      c.initial_kind != "point" && c.initial_kind != "file")
    throw std::invalid_argument("config: unknown initial kind \"" + c.initial_kind + "\"");
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fpif
