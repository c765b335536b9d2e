#include "bdflow/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace bdflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ParameterError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ParameterError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParameterError(key + ": expected true or false, got '" + v + "'");
}

RegIndex to_reg_index(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "infinity") return RegIndex::infinity();
  const auto n = to_count(key, v);
  if (n == 0 || n > std::numeric_limits<unsigned>::max())
    throw ParameterError(key + ": regularization index must be >= 1 or inf");
  return RegIndex(static_cast<unsigned>(n));
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty() || v == "none") return out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  return out;
}

Profile::Shape to_shape(const std::string& key, const std::string& v) {
  if (v == "zero") return Profile::Shape::Zero;
  if (v == "gaussian") return Profile::Shape::Gaussian;
  throw ParameterError(key + ": shape must be zero or gaussian");
}

std::vector<Atom> to_atoms(const std::string& key, const std::string& v) {
  std::vector<Atom> out;
  if (v.empty() || v == "none") return out;
  for (const auto& item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ParameterError(key + ": atoms are written x:mass");
    out.push_back({to_double(key, parts[0]), to_double(key, parts[1])});
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

void profile_setters(std::map<std::string, Setter>& m, const std::string& prefix,
                     Profile ScenarioSpec::*field) {
  m[prefix + ".shape"] = [field](RunConfig& c, const std::string& k, const std::string& v) {
    (c.scenario.*field).shape = to_shape(k, v);
  };
  m[prefix + ".amplitude"] = [field](RunConfig& c, const std::string& k, const std::string& v) {
    (c.scenario.*field).amplitude = to_double(k, v);
  };
  m[prefix + ".center"] = [field](RunConfig& c, const std::string& k, const std::string& v) {
    (c.scenario.*field).center = to_double(k, v);
  };
  m[prefix + ".width"] = [field](RunConfig& c, const std::string& k, const std::string& v) {
    (c.scenario.*field).width = to_double(k, v);
  };
}

template <class T>
Setter number(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, double>)
      c.*field = to_double(k, v);
    else
      c.*field = static_cast<T>(to_count(k, v));
  };
}

Setter param(double Params::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    c.scenario.params.*field = to_double(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    m["scenario.kind"] = [](RunConfig& c, const std::string&, const std::string& v) {
      if (v == "manufactured") {
        c.manufactured = true;
        c.scenario.kind = ScenarioKind::Custom;
      } else {
        c.manufactured = false;
        c.scenario.kind = scenario_kind_from_string(v);
      }
    };
    m["scenario.density.values"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.density.values = to_doubles(k, v);
    };
    m["scenario.density.breaks"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.density.breaks = to_doubles(k, v);
    };
    profile_setters(m, "scenario.v0", &ScenarioSpec::v0);
    profile_setters(m, "scenario.u0", &ScenarioSpec::u0);
    m["scenario.density.bump.amplitude"] = [](RunConfig& c, const std::string& k,
                                              const std::string& v) {
      c.scenario.density.bump.shape = Profile::Shape::Gaussian;
      c.scenario.density.bump.amplitude = to_double(k, v);
    };
    m["scenario.density.bump.center"] = [](RunConfig& c, const std::string& k,
                                           const std::string& v) {
      c.scenario.density.bump.center = to_double(k, v);
    };
    m["scenario.density.bump.width"] = [](RunConfig& c, const std::string& k,
                                          const std::string& v) {
      c.scenario.density.bump.width = to_double(k, v);
    };
    m["scenario.atoms"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.momentum_atoms = to_atoms(k, v);
    };
    m["scenario.mollify_tau"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "none") {
        c.scenario.mollify_tau.reset();
      } else {
        c.scenario.mollify_tau = to_double(k, v);
        c.scenario.mollify_sigma_cells.reset();
      }
    };
    m["scenario.mollify_sigma_cells"] = [](RunConfig& c, const std::string& k,
                                           const std::string& v) {
      if (v == "none") {
        c.scenario.mollify_sigma_cells.reset();
      } else {
        c.scenario.mollify_sigma_cells = to_double(k, v);
        c.scenario.mollify_tau.reset();
      }
    };
    m["scenario.eps0"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.eps0 = to_double(k, v);
    };
    m["scenario.manufactured.rho_amplitude"] = [](RunConfig& c, const std::string& k,
                                                  const std::string& v) {
      c.mms.rho_amplitude = to_double(k, v);
    };
    m["scenario.manufactured.u_amplitude"] = [](RunConfig& c, const std::string& k,
                                                const std::string& v) {
      c.mms.u_amplitude = to_double(k, v);
    };
    m["scenario.manufactured.speed"] = [](RunConfig& c, const std::string& k,
                                          const std::string& v) {
      c.mms.speed = to_double(k, v);
    };

    m["params.mu"] = param(&Params::mu);
    m["params.alpha"] = param(&Params::alpha);
    m["params.a"] = param(&Params::a);
    m["params.gamma"] = param(&Params::gamma);
    m["params.rho_bar"] = param(&Params::rho_bar);
    m["params.theta"] = param(&Params::theta);
    m["params.n_reg"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.params.n_reg = to_reg_index(k, v);
    };

    m["grid.x_min"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.grid.x_min = to_double(k, v);
    };
    m["grid.x_max"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.grid.x_max = to_double(k, v);
    };
    m["grid.cells"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.grid.cells = to_count(k, v);
    };
    m["grid.ghost"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.grid.ghost = to_count(k, v);
    };
    m["grid.boundary"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "farfield")
        c.grid.boundary = Boundary::FarField;
      else if (v == "periodic")
        c.grid.boundary = Boundary::Periodic;
      else
        throw ParameterError(k + ": boundary must be farfield or periodic");
    };

    m["scheme.formulation"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.scheme.formulation = formulation_from_string(v);
    };
    m["scheme.flux"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.scheme.flux = flux_from_string(v);
    };
    m["scheme.cfl_safety"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scheme.cfl_safety = to_double(k, v);
    };
    m["scheme.vacuum_floor"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scheme.vacuum_floor = to_double(k, v);
    };
    m["scheme.max_steps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scheme.max_steps = to_count(k, v);
    };

    m["run.t_end"] = number(&RunConfig::t_end);
    m["run.record_every"] = number(&RunConfig::record_every);
    m["run.snapshot_points"] = number(&RunConfig::snapshot_points);
    m["run.output_dir"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.output_dir = v;
    };

    m["study.dx_refinement"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.study.dx_refinement.clear();
      for (const auto& item : split(v, ',')) c.study.dx_refinement.push_back(to_count(k, item));
    };
    m["study.n_sequence"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.study.n_sequence.clear();
      for (const auto& item : split(v, ',')) c.study.n_sequence.push_back(to_reg_index(k, item));
    };
    m["study.couple_tau"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.study.couple_tau = to_bool(k, v);
    };
    m["study.n_affects_viscosity"] = [](RunConfig& c, const std::string& k,
                                        const std::string& v) {
      c.study.n_affects_viscosity = to_bool(k, v);
    };

    m["diagnostics.jump_x0"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.diagnostics.jump_x0 = to_double(k, v);
    };
    m["diagnostics.jump_window"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.diagnostics.jump_window = to_count(k, v);
    };
    m["diagnostics.m2_norm"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.diagnostics.m2_norm = to_bool(k, v);
    };
    m["diagnostics.entropy_tol"] = number(&RunConfig::entropy_tol);
    m["diagnostics.gronwall_tol"] = number(&RunConfig::gronwall_tol);
    return m;
  }();
  return table;
}

void apply_preset(RunConfig& c, const std::string& name) {
  c.preset = name;
  if (name == "mms") {
    c.manufactured = true;
    c.scenario = ScenarioSpec{};
    c.grid.x_min = 0.0;
    c.grid.x_max = 2.0 * std::numbers::pi;
    c.grid.cells = 804;
    c.grid.boundary = Boundary::Periodic;
    c.t_end = 0.1;
    c.record_every = 0.025;
    c.diagnostics.jump_x0 = std::numbers::pi;
    return;
  }
  c.manufactured = false;
  c.scenario = scenario_preset(name);
}

void validate_config(const RunConfig& c, std::vector<std::string>& bad) {
  const auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      bad.insert(bad.end(), e.problems().begin(), e.problems().end());
    } catch (const std::exception& e) {
      bad.emplace_back(e.what());
    }
  };
  if (c.manufactured) {
    guard([&] { c.scenario.params.validate(); });
    if (c.grid.boundary != Boundary::Periodic)
      bad.emplace_back("scenario.kind=manufactured requires grid.boundary=periodic");
    if (!(std::abs(c.mms.rho_amplitude) < 1.0))
      bad.emplace_back("scenario.manufactured.rho_amplitude must lie in (-1, 1)");
  } else {
    guard([&] { c.scenario.validate(); });
  }
  guard([&] { c.grid.validate(); });
  guard([&] { c.scheme.validate(); });
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) bad.emplace_back("run.t_end must be >= 0");
  if (!(c.record_every >= 0.0)) bad.emplace_back("run.record_every must be >= 0");
  if (c.snapshot_points < 2) bad.emplace_back("run.snapshot_points must be >= 2");
  if (c.diagnostics.m2_norm && c.scenario.params.alpha == 0.5)
    bad.emplace_back("diagnostics.m2_norm needs phi2, which requires alpha != 1/2");
  if (c.diagnostics.jump_window < 4) bad.emplace_back("diagnostics.jump_window must be >= 4");
  if (!(c.entropy_tol >= 0.0)) bad.emplace_back("diagnostics.entropy_tol must be >= 0");
  if (!(c.gronwall_tol >= 0.0)) bad.emplace_back("diagnostics.gronwall_tol must be >= 0");
  const auto& cells = c.study.dx_refinement;
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i] <= cells[i - 1])
      bad.emplace_back("study.dx_refinement cell counts must be strictly increasing");
  for (std::size_t i = 0; i < c.study.n_sequence.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (c.study.n_sequence[i] == c.study.n_sequence[j])
        bad.emplace_back("study.n_sequence contains a repeated index");
}

}  // namespace

std::vector<std::string> run_preset_names() {
  auto names = scenario_preset_names();
  names.emplace_back("mms");
  return names;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"scenario.preset"};
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> bad;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    out.emplace_back(trim(std::string_view(line).substr(0, eq)),
                     trim(std::string_view(line).substr(eq + 1)));
  }
  if (!bad.empty()) throw ValidationError(bad);
  return out;
}

RunConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  RunConfig c;
  std::vector<std::string> bad;
  // The preset is the base layer regardless of where it appears.
  for (const auto& [k, v] : pairs) {
    if (k != "scenario.preset") continue;
    try {
      apply_preset(c, v);
    } catch (const std::exception& e) {
      bad.push_back(std::string("scenario.preset: ") + e.what());
    }
  }
  const auto& table = setters();
  for (const auto& [k, v] : pairs) {
    if (k == "scenario.preset") continue;
    const auto it = table.find(k);
    if (it == table.end()) {
      bad.push_back("unknown key '" + k + "'");
      continue;
    }
    try {
      it->second(c, k, v);
    } catch (const std::exception& e) {
      bad.emplace_back(e.what());
    }
  }
  validate_config(c, bad);
  if (!bad.empty()) throw ValidationError(bad);
  return c;
}

RunConfig parse_config(std::string_view text) { return config_from_pairs(parse_pairs(text)); }

double regularization_ratio(const State& s, const Grid1D& g, const Params& p) {
  Grid1D coarse = g;
  coarse.cells = g.cells / 2;
  coarse.x_max = g.x_min + static_cast<double>(2 * coarse.cells) * g.dx();
  State c{restrict_by_two(s.rho), restrict_by_two(s.m), s.t};
  const double h_fine = h1_phi1(s, g, p);
  const double h_coarse = h1_phi1(c, coarse, p);
  if (h_coarse == 0.0) return h_fine == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return h_fine / h_coarse;
}

std::string classify_regularization(double ratio) {
  if (ratio < 1.1) return "regularized";
  if (ratio >= 1.2) return "persistent";
  return "inconclusive";
}

double l1_distance(std::span<const double> coarse, const Grid1D& gc, std::span<const double> fine,
                   const Grid1D& gf) {
  const double dxc = gc.dx();
  const std::size_t nc = coarse.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double x = gf.center(i);
    const double s = (x - gc.x_min) / dxc - 0.5;  // fractional coarse index
    double value = 0.0;
    if (s <= 0.0) {
      value = gc.boundary == Boundary::Periodic
                  ? coarse[nc - 1] + (s + 1.0) * (coarse[0] - coarse[nc - 1])
                  : coarse[0];
    } else if (s >= static_cast<double>(nc - 1)) {
      const double f = s - static_cast<double>(nc - 1);
      value = gc.boundary == Boundary::Periodic ? coarse[nc - 1] + f * (coarse[0] - coarse[nc - 1])
                                                : coarse[nc - 1];
    } else {
      const auto k = static_cast<std::size_t>(s);
      const double f = s - static_cast<double>(k);
      value = coarse[k] + f * (coarse[k + 1] - coarse[k]);
    }
    sum += std::abs(fine[i] - value);
  }
  return sum * gf.dx();
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_csv(const Trajectory& traj, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# bdflow diagnostics schema_version=" << kCsvSchemaVersion << "\n";
  os << "t,mass,l1_rhou,l1_rhov,bd_entropy,energy,tv_rho,rho_max,rho_min,h1_phi1,jump_amp,"
        "gronwall_rhs,dissipation_bd,m2_l2,dev_l2_near,dev_lgamma_far\n";
  for (const auto& snap : traj.snapshots) {
    const auto& r = snap.record;
    const double cols[] = {r.t,        r.mass,     r.l1_rhou,      r.l1_rhov,       r.bd_entropy,
                           r.energy,   r.tv_rho,   r.rho_max,      r.rho_min,       r.h1_phi1,
                           r.jump_amp, r.gronwall_rhs, r.dissipation_bd, r.m2_l2, r.dev_l2_near,
                           r.dev_lgamma_far};
    for (std::size_t k = 0; k < std::size(cols); ++k) os << (k ? "," : "") << fmt(cols[k]);
    os << "\n";
  }
}

void write_snapshots(const Trajectory& traj, const Grid1D& g, std::size_t max_points,
                     const fs::path& path) {
  const std::size_t stride = std::max<std::size_t>(1, (g.cells + max_points - 1) / max_points);
  json out;
  out["stride"] = stride;
  json xs = json::array();
  for (std::size_t i = 0; i < g.cells; i += stride) xs.push_back(g.center(i));
  out["x"] = std::move(xs);
  json snaps = json::array();
  for (const auto& snap : traj.snapshots) {
    if (snap.state.rho.empty()) continue;
    json rho = json::array(), m = json::array();
    for (std::size_t i = 0; i < g.cells; i += stride) {
      rho.push_back(snap.state.rho[i]);
      m.push_back(snap.state.m[i]);
    }
    snaps.push_back({{"t", snap.record.t}, {"rho", std::move(rho)}, {"m", std::move(m)}});
  }
  out["snapshots"] = std::move(snaps);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << out.dump(1) << "\n";
}

json summary_json(const RunConfig& cfg, const RunResult& r) {
  json s;
  s["scenario"] = cfg.manufactured ? std::string("manufactured")
                                   : std::string(to_string(cfg.scenario.kind));
  s["preset"] = cfg.preset;
  s["formulation"] = std::string(to_string(cfg.scheme.formulation));
  s["cells"] = cfg.grid.cells;
  s["dx"] = cfg.grid.dx();
  s["n_reg"] = cfg.scenario.params.n_reg.to_string();
  s["status"] = std::string(to_string(r.trajectory.status));
  s["message"] = r.trajectory.message;
  s["steps"] = r.trajectory.steps;
  s["min_dt"] = r.trajectory.min_dt;
  s["t_final"] = r.trajectory.snapshots.empty() ? 0.0 : r.trajectory.snapshots.back().record.t;
  s["tau"] = r.built.tau;
  s["smallness"] = {{"dphi1_norm", r.built.smallness.dphi1_norm},
                    {"m0_norm", r.built.smallness.m0_norm},
                    {"eps0", r.built.smallness.eps0},
                    {"exceeds", r.built.smallness.exceeds()}};
  const auto& v = r.verdicts;
  json verdicts;
  verdicts["entropy_decay"] = {{"pass", v.entropy.verdict},
                               {"max_violation", number_or_null(v.entropy.max_violation)},
                               {"tolerance", cfg.entropy_tol}};
  verdicts["gronwall"] = {{"pass", v.gronwall.verdict},
                          {"max_ratio", v.gronwall.max_ratio},
                          {"tolerance", cfg.gronwall_tol}};
  verdicts["mass_balance"] = {{"pass", v.mass_ok},
                              {"max_step_rel_error", v.mass.max_step_rel_error},
                              {"accumulated_rel_error", v.mass.accumulated_rel_error}};
  verdicts["regularization_probe"] = {{"trend", v.probe},
                                      {"ratio", number_or_null(v.probe_ratio)}};
  s["verdicts"] = std::move(verdicts);
  s["warnings"] = r.warnings;
  return s;
}

}  // namespace

RunResult run_scenario(const RunConfig& cfg) {
  RunResult r;
  const Params& p = cfg.scenario.params;
  if (cfg.manufactured) {
    r.built.state = cfg.mms.state(cfg.grid, 0.0);
    r.built.effective = cfg.mms.effective_state(cfg.grid, p, 0.0);
    r.built.smallness.eps0 = cfg.scenario.eps0;
  } else {
    r.built = build_scenario(cfg.scenario, cfg.grid);
  }
  if (r.built.smallness.exceeds())
    r.warnings.push_back("initial data exceed the smallness bound eps0");
  if (r.built.support_warning)
    r.warnings.push_back("mollification kernel support leaves the domain");

  Forcing forcing;
  RunOptions opts;
  opts.diagnostics = cfg.diagnostics;
  if (cfg.manufactured) {
    forcing = cfg.mms.forcing(cfg.scheme.formulation, p);
    opts.forcing = &forcing;
  }
  if (cfg.scheme.formulation == Formulation::Effective)
    r.trajectory = run(r.built.effective, cfg.t_end, cfg.grid, p, cfg.scheme, cfg.record_every,
                       opts);
  else
    r.trajectory = run(r.built.state, cfg.t_end, cfg.grid, p, cfg.scheme, cfg.record_every, opts);

  auto& v = r.verdicts;
  v.entropy = entropy_decay(r.trajectory, cfg.entropy_tol);
  v.gronwall = gronwall_envelope(r.trajectory, p, cfg.gronwall_tol);
  v.mass = r.trajectory.mass_balance;
  v.mass_ok = v.mass.max_step_rel_error <= 1e-13 && v.mass.accumulated_rel_error <= 1e-10;
  const auto& last = r.trajectory.snapshots.back();
  v.probe_ratio = regularization_ratio(last.state, cfg.grid, p);
  v.probe = classify_regularization(v.probe_ratio);
  r.exit_code = r.trajectory.status == RunStatus::Completed ? 0 : 3;

  if (!cfg.output_dir.empty()) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_csv(r.trajectory, dir / "diagnostics.csv");
    write_snapshots(r.trajectory, cfg.grid, cfg.snapshot_points, dir / "snapshots.json");
    std::ofstream os(dir / "summary.json");
    os << summary_json(cfg, r).dump(2) << "\n";
  }
  return r;
}

namespace {

StudyRow to_row(std::string key, const RunConfig& cfg, RunResult&& res) {
  StudyRow row;
  row.key = std::move(key);
  row.cells = cfg.grid.cells;
  row.n = cfg.scenario.params.n_reg;
  row.exit_code = res.exit_code;
  row.verdicts = std::move(res.verdicts);
  const auto& last = res.trajectory.snapshots.back();
  row.h1_final = last.record.h1_phi1;
  row.final_state = last.state;
  return row;
}

std::vector<StudyRow> run_all(std::vector<std::pair<std::string, RunConfig>> jobs) {
  std::vector<std::future<StudyRow>> futures;
  futures.reserve(jobs.size());
  for (auto& [key, c] : jobs) {
    futures.push_back(std::async(std::launch::async, [key = key, c = c] {
      return to_row(key, c, run_scenario(c));
    }));
  }
  std::vector<StudyRow> rows;
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

std::string sub_dir(const RunConfig& cfg, const std::string& name) {
  return cfg.output_dir.empty() ? std::string() : (fs::path(cfg.output_dir) / name).string();
}

}  // namespace

StudyResult refinement_study(const RunConfig& cfg) {
  auto cells = cfg.study.dx_refinement;
  if (cells.empty()) cells.push_back(cfg.grid.cells);
  std::vector<std::pair<std::string, RunConfig>> jobs;
  for (std::size_t n : cells) {
    RunConfig c = cfg;
    c.grid.cells = n;
    c.output_dir = sub_dir(cfg, "cells_" + std::to_string(n));
    c.study = {};
    jobs.emplace_back(std::to_string(n), std::move(c));
  }
  StudyResult out;
  out.rows = run_all(std::move(jobs));
  auto grid_of = [&](std::size_t n) {
    Grid1D g = cfg.grid;
    g.cells = n;
    return g;
  };
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    auto& row = out.rows[k];
    const Grid1D g = grid_of(row.cells);
    if (cfg.manufactured) {
      const State exact = cfg.mms.state(g, row.final_state.t);
      double err = 0.0;
      for (std::size_t i = 0; i < g.cells; ++i)
        err += std::abs(row.final_state.rho[i] - exact.rho[i]);
      row.l1_to_reference = err * g.dx();
    }
    if (k + 1 < out.rows.size()) {
      const auto& next = out.rows[k + 1];
      row.l1_to_next =
          l1_distance(row.final_state.rho, g, next.final_state.rho, grid_of(next.cells));
    }
  }
  for (std::size_t k = 0; k + 1 < out.rows.size(); ++k) {
    auto& row = out.rows[k];
    const auto& next = out.rows[k + 1];
    if (std::isfinite(row.l1_to_next) && std::isfinite(next.l1_to_next))
      row.order = std::log2(row.l1_to_next / next.l1_to_next);
    if (std::isfinite(row.l1_to_reference) && std::isfinite(next.l1_to_reference))
      row.reference_order = std::log2(row.l1_to_reference / next.l1_to_reference);
  }
  for (const auto& row : out.rows) out.exit_code = std::max(out.exit_code, row.exit_code);
  if (!cfg.output_dir.empty()) write_study_csv(out, fs::path(cfg.output_dir) / "refinement.csv");
  return out;
}

StudyResult n_sequence_study(const RunConfig& cfg) {
  auto ns = cfg.study.n_sequence;
  if (ns.empty()) ns.push_back(cfg.scenario.params.n_reg);
  std::sort(ns.begin(), ns.end(), [](const RegIndex& a, const RegIndex& b) {
    if (a.finite() != b.finite()) return a.finite();
    return a.finite() && a.value() < b.value();
  });
  std::vector<std::pair<std::string, RunConfig>> jobs;
  for (const auto& n : ns) {
    RunConfig c = cfg;
    if (cfg.study.n_affects_viscosity) c.scenario.params.n_reg = n;
    if (cfg.study.couple_tau && n.finite()) {
      c.scenario.mollify_tau = n.inverse();
      c.scenario.mollify_sigma_cells.reset();
    }
    c.output_dir = sub_dir(cfg, "n_" + n.to_string());
    c.study = {};
    jobs.emplace_back(n.to_string(), std::move(c));
  }
  StudyResult out;
  out.rows = run_all(std::move(jobs));
  for (std::size_t k = 0; k < out.rows.size(); ++k) out.rows[k].n = ns[k];
  const StudyRow* reference = out.rows.back().n.finite() ? nullptr : &out.rows.back();
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    auto& row = out.rows[k];
    if (k + 1 < out.rows.size())
      row.l1_to_next =
          l1_distance(row.final_state.rho, cfg.grid, out.rows[k + 1].final_state.rho, cfg.grid);
    if (reference)
      row.l1_to_reference =
          l1_distance(row.final_state.rho, cfg.grid, reference->final_state.rho, cfg.grid);
  }
  for (const auto& row : out.rows) out.exit_code = std::max(out.exit_code, row.exit_code);
  if (!cfg.output_dir.empty()) write_study_csv(out, fs::path(cfg.output_dir) / "n_sequence.csv");
  return out;
}

void write_study_csv(const StudyResult& study, const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# bdflow study schema_version=" << kCsvSchemaVersion << "\n";
  os << "key,cells,n_reg,exit_code,l1_to_next,order,l1_to_reference,reference_order,h1_final,"
        "entropy_decay,gronwall,mass_balance,regularization_probe\n";
  for (const auto& r : study.rows) {
    os << r.key << "," << r.cells << "," << r.n.to_string() << "," << r.exit_code << ","
       << fmt(r.l1_to_next) << "," << fmt(r.order) << "," << fmt(r.l1_to_reference) << ","
       << fmt(r.reference_order) << "," << fmt(r.h1_final) << ","
       << (r.verdicts.entropy.verdict ? "pass" : "fail") << ","
       << (r.verdicts.gronwall.verdict ? "pass" : "fail") << ","
       << (r.verdicts.mass_ok ? "pass" : "fail") << "," << r.verdicts.probe << "\n";
  }
}

}  // namespace bdflow
