#include "bdflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bdflow {

std::string_view to_string(Formulation f) {
  return f == Formulation::Primitive ? "primitive" : "effective";
}

std::string_view to_string(FluxKind f) { return f == FluxKind::Rusanov ? "rusanov" : "upwind"; }

Formulation formulation_from_string(std::string_view s) {
  if (s == "primitive") return Formulation::Primitive;
  if (s == "effective") return Formulation::Effective;
  throw ParameterError("unknown formulation '" + std::string(s) + "'");
}

FluxKind flux_from_string(std::string_view s) {
  if (s == "rusanov") return FluxKind::Rusanov;
  if (s == "upwind") return FluxKind::Upwind;
  throw ParameterError("unknown flux '" + std::string(s) + "'");
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::VacuumBreach: return "vacuum_breach";
    case RunStatus::StepBudgetExhausted: return "step_budget_exhausted";
  }
  return "unknown";
}

void SchemeConfig::validate() const {
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw ParameterError("cfl_safety must lie in (0, 1]");
  if (vacuum_floor && !(*vacuum_floor > 0.0)) throw ParameterError("vacuum_floor must be positive");
  if (max_steps == 0) throw ParameterError("max_steps must be positive");
}

namespace {

double van_leer(double a, double b) {
  const double ab = a * b;
  return ab > 0.0 ? 2.0 * ab / (a + b) : 0.0;
}

// Pads src into ext (size n + 2G) with the far-field value or a periodic wrap.
void fill_ext(std::vector<double>& ext, std::span<const double> src, const Grid1D& g, double far) {
  const std::size_t n = src.size();
  const std::size_t G = g.ghost;
  ext.resize(n + 2 * G);
  std::copy(src.begin(), src.end(), ext.begin() + static_cast<std::ptrdiff_t>(G));
  for (std::size_t k = 0; k < G; ++k) {
    if (g.boundary == Boundary::Periodic) {
      ext[G - 1 - k] = src[n - 1 - k % n];
      ext[G + n + k] = src[k % n];
    } else {
      ext[G - 1 - k] = far;
      ext[G + n + k] = far;
    }
  }
}

void check_finite(std::span<const double> f, const char* where) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) {
      std::ostringstream os;
      os << where << ": non-finite value at cell " << i;
      throw StateError(os.str());
    }
  }
}

double diffusive_bound(double rho, double dx, const Params& p) {
  return 0.5 * dx * dx * rho / viscosity(rho, p);
}

void fill_sources(const Forcing* forcing, const std::vector<double>& x, double t,
                  std::vector<double>& s_rho, std::vector<double>& s_second) {
  const std::size_t n = x.size();
  s_rho.assign(n, 0.0);
  s_second.assign(n, 0.0);
  if (!forcing) return;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = (*forcing)(x[i], t);
    s_rho[i] = a;
    s_second[i] = b;
  }
}

}  // namespace

double cfl_dt(const State& s, const Grid1D& g, const Params& p, const SchemeConfig& cfg) {
  check_density(s.rho, "cfl_dt");
  check_finite(s.m, "cfl_dt");
  const double dx = g.dx();
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    const double r = s.rho[i];
    const double speed = std::abs(s.m[i] / r) + sound_speed(r, p);
    dt = std::min({dt, dx / speed, diffusive_bound(r, dx, p)});
  }
  return cfg.cfl_safety * dt;
}

double cfl_dt(const EffectiveState& e, const Grid1D& g, const Params& p, const SchemeConfig& cfg) {
  check_density(e.rho, "cfl_dt");
  check_finite(e.w, "cfl_dt");
  const auto s = from_effective(e, g, p);
  const double dx = g.dx();
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.rho.size(); ++i) {
    const double r = e.rho[i];
    const double drift = std::max(std::abs(s.m[i] / r), std::abs(e.w[i] / r));
    // The rho-diffusion coefficient mu_n(rho)/rho gives the same bound as the viscous term.
    dt = std::min({dt, dx / (drift + sound_speed(r, p)), diffusive_bound(r, dx, p)});
  }
  return cfg.cfl_safety * dt;
}

PrimitiveStepper::PrimitiveStepper(const Grid1D& g, const Params& p, const SchemeConfig& cfg,
                                   const Forcing* forcing)
    : g_(g), p_(p), cfg_(cfg), forcing_(forcing) {
  g_.validate();
  p_.validate();
  cfg_.validate();
  x_ = g_.centers();
  const std::size_t ext = g_.cells + 2 * g_.ghost;
  for (auto* v : {&rho_, &m_, &u_, &pres_, &visc_, &speed_, &d_rho_, &d_m_}) v->resize(ext);
  f_rho_.resize(g_.cells + 1);
  f_m_.resize(g_.cells + 1);
}

StepFluxes PrimitiveStepper::step(State& s, double dt) {
  const std::size_t n = g_.cells;
  const std::size_t G = g_.ghost;
  if (s.rho.size() != n || s.m.size() != n) throw ParameterError("state size does not match grid");
  const double dx = g_.dx();

  fill_ext(rho_, s.rho, g_, p_.rho_bar);
  fill_ext(m_, s.m, g_, 0.0);
  const std::size_t last = rho_.size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    u_[k] = m_[k] / rho_[k];
    visc_[k] = viscosity(rho_[k], p_);
    pres_[k] = pressure(rho_[k], p_);
    speed_[k] = std::abs(u_[k]) + sound_speed(rho_[k], p_);
    if (k == 0 || k == last) {
      d_rho_[k] = d_m_[k] = 0.0;
    } else {
      d_rho_[k] = 0.5 * van_leer(rho_[k] - rho_[k - 1], rho_[k + 1] - rho_[k]);
      d_m_[k] = 0.5 * van_leer(m_[k] - m_[k - 1], m_[k + 1] - m_[k]);
    }
  }
  fill_sources(forcing_, x_, s.t, s_rho_, s_m_);

  for (std::size_t j = 0; j <= n; ++j) {
    const std::size_t a = G - 1 + j;
    const std::size_t b = a + 1;
    const double rl = rho_[a] + d_rho_[a];
    const double rr = rho_[b] - d_rho_[b];
    const double ml = m_[a] + d_m_[a];
    const double mr = m_[b] - d_m_[b];
    double fr = 0.0;
    double fm = 0.0;
    if (cfg_.flux == FluxKind::Rusanov) {
      const double lam = std::max(speed_[a], speed_[b]);
      fr = 0.5 * (ml + mr) - 0.5 * lam * (rr - rl);
      fm = 0.5 * (ml * ml / rl + pressure(rl, p_) + mr * mr / rr + pressure(rr, p_)) -
           0.5 * lam * (mr - ml);
    } else {
      const double uf = 0.5 * (u_[a] + u_[b]);
      const bool from_left = uf >= 0.0;
      fr = uf * (from_left ? rl : rr);
      fm = uf * (from_left ? ml : mr) + 0.5 * (pres_[a] + pres_[b]);
    }
    const double mu_f = 2.0 * visc_[a] * visc_[b] / (visc_[a] + visc_[b]);
    fm -= mu_f * (u_[b] - u_[a]) / dx;
    f_rho_[j] = fr;
    f_m_[j] = fm;
  }

  StepFluxes out{f_rho_[0], f_rho_[n], 0.0, false};
  const double lam = dt / dx;
  const double floor = cfg_.floor(p_);
  double src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.rho[i] += -lam * (f_rho_[i + 1] - f_rho_[i]) + dt * s_rho_[i];
    s.m[i] += -lam * (f_m_[i + 1] - f_m_[i]) + dt * s_m_[i];
    src += s_rho_[i];
    if (!(s.rho[i] >= floor) || !std::isfinite(s.m[i])) out.vacuum_breach = true;
  }
  out.source = src * dx;
  s.t += dt;
  return out;
}

EffectiveStepper::EffectiveStepper(const Grid1D& g, const Params& p, const SchemeConfig& cfg,
                                   const Forcing* forcing)
    : g_(g), p_(p), cfg_(cfg), forcing_(forcing) {
  g_.validate();
  p_.validate();
  cfg_.validate();
  x_ = g_.centers();
  const std::size_t ext = g_.cells + 2 * g_.ghost;
  for (auto* v : {&rho_, &w_, &v_, &u_, &ph1_, &d_rho_, &d_w_}) v->resize(ext);
  ph_.resize(g_.cells);
  f_rho_.resize(g_.cells + 1);
  f_w_.resize(g_.cells + 1);
}

StepFluxes EffectiveStepper::step(EffectiveState& e, double dt) {
  const std::size_t n = g_.cells;
  const std::size_t G = g_.ghost;
  if (e.rho.size() != n || e.w.size() != n) throw ParameterError("state size does not match grid");
  const double dx = g_.dx();

  fill_ext(rho_, e.rho, g_, p_.rho_bar);
  fill_ext(w_, e.w, g_, 0.0);
  const std::size_t last = rho_.size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    v_[k] = w_[k] / rho_[k];
    ph1_[k] = phi1(rho_[k], p_);
    if (k == 0 || k == last) {
      d_rho_[k] = d_w_[k] = 0.0;
    } else {
      d_rho_[k] = 0.5 * van_leer(rho_[k] - rho_[k - 1], rho_[k + 1] - rho_[k]);
      d_w_[k] = 0.5 * van_leer(w_[k] - w_[k - 1], w_[k + 1] - w_[k]);
    }
  }
  // u = (w - D phi1(rho)) / rho at the start of the step; ph_ holds it for real cells.
  const double inv2dx = 1.0 / (2.0 * dx);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i + G;
    ph_[i] = (w_[k] - (ph1_[k + 1] - ph1_[k - 1]) * inv2dx) / rho_[k];
  }
  fill_ext(u_, ph_, g_, 0.0);
  fill_sources(forcing_, x_, e.t, s_rho_, s_w_);

  for (std::size_t j = 0; j <= n; ++j) {
    const std::size_t a = G - 1 + j;
    const std::size_t b = a + 1;
    const double rl = rho_[a] + d_rho_[a];
    const double rr = rho_[b] - d_rho_[b];
    const double wl = w_[a] + d_w_[a];
    const double wr = w_[b] - d_w_[b];
    double fr = 0.0;
    if (cfg_.flux == FluxKind::Rusanov) {
      const double lam = std::max(std::abs(v_[a]), std::abs(v_[b]));
      fr = 0.5 * (wl + wr) - 0.5 * lam * (rr - rl);
    } else {
      const double vf = 0.5 * (v_[a] + v_[b]);
      fr = vf * (vf >= 0.0 ? rl : rr);
    }
    fr -= (ph1_[b] - ph1_[a]) / dx;
    const double uf = 0.5 * (u_[a] + u_[b]);
    f_rho_[j] = fr;
    f_w_[j] = uf * (uf >= 0.0 ? wl : wr);
  }

  StepFluxes out{f_rho_[0], f_rho_[n], 0.0, false};
  const double lam = dt / dx;
  const double floor = cfg_.floor(p_);
  double src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = e.rho[i] - lam * (f_rho_[i + 1] - f_rho_[i]) + dt * s_rho_[i];
    const double w = e.w[i] - lam * (f_w_[i + 1] - f_w_[i]) + dt * s_w_[i];
    src += s_rho_[i];
    e.rho[i] = r;
    if (!(r >= floor) || !std::isfinite(w)) {
      out.vacuum_breach = true;
      e.w[i] = w;
      continue;
    }
    // Exact integrating factor for dv/dt = -rate (v - u) with u frozen.
    const double u = ph_[i];
    const double decay = std::exp(-relaxation_rate(r, p_) * dt);
    e.w[i] = r * (u + (w / r - u) * decay);
  }
  out.source = src * dx;
  e.t += dt;
  return out;
}

State step_primitive(const State& s, double dt, const Grid1D& g, const Params& p,
                     const SchemeConfig& cfg) {
  PrimitiveStepper stepper(g, p, cfg);
  State out = s;
  if (stepper.step(out, dt).vacuum_breach) throw StateError("step_primitive: vacuum breach");
  return out;
}

EffectiveState step_effective(const EffectiveState& e, double dt, const Grid1D& g,
                              const Params& p, const SchemeConfig& cfg) {
  EffectiveStepper stepper(g, p, cfg);
  EffectiveState out = e;
  if (stepper.step(out, dt).vacuum_breach) throw StateError("step_effective: vacuum breach");
  return out;
}

namespace {

State as_state(const State& s, const Grid1D&, const Params&) { return s; }
State as_state(const EffectiveState& e, const Grid1D& g, const Params& p) {
  return from_effective(e, g, p);
}

long double density_sum(const std::vector<double>& rho) {
  long double sum = 0.0L;
  for (double r : rho) sum += r;
  return sum;
}

template <class Stepper, class S>
Trajectory integrate(S state, double t_end, const Grid1D& g, const Params& p,
                     const SchemeConfig& cfg, double record_every, const RunOptions& opts) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be non-negative");
  check_density(state.rho, "run");
  Stepper stepper(g, p, cfg, opts.forcing);

  Trajectory traj;
  const double dx = g.dx();
  double gronwall_integral = 0.0;
  double dissipation = 0.0;
  double start_l1 = 0.0;

  auto record = [&](const S& st) {
    State prim = as_state(st, g, p);
    double rhs = 0.0;
    if (traj.snapshots.empty()) {
      const auto r0 = make_record(prim, g, p, opts.diagnostics, 0.0, 0.0);
      start_l1 = r0.l1_rhou + r0.l1_rhov;
    }
    rhs = start_l1 * std::exp(3.0 * gronwall_integral);
    Snapshot snap;
    snap.record = make_record(prim, g, p, opts.diagnostics, rhs, dissipation);
    if (opts.store_states) snap.state = std::move(prim);
    traj.snapshots.push_back(std::move(snap));
  };

  auto rates = [&](const S& st) {
    const auto [mn, mx] = std::minmax_element(st.rho.begin(), st.rho.end());
    return std::pair{gronwall_rate(*mn, *mx, p), dissipation_rate(st.rho, g, p)};
  };

  record(state);
  if (t_end == 0.0) return traj;

  const long double m0 = density_sum(state.rho);
  long double m_prev = m0;
  long double expected_total = 0.0L;
  auto [g_prev, d_prev] = rates(state);
  const bool cadence = record_every > 0.0 && std::isfinite(record_every);
  std::size_t next_index = 1;
  traj.min_dt = std::numeric_limits<double>::infinity();
  S previous = state;

  while (state.t < t_end) {
    if (traj.steps >= cfg.max_steps) {
      traj.status = RunStatus::StepBudgetExhausted;
      traj.message = "step budget of " + std::to_string(cfg.max_steps) + " exhausted at t=" +
                     std::to_string(state.t);
      if (traj.snapshots.back().record.t < state.t) record(state);
      break;
    }
    double target = t_end;
    if (cadence) target = std::min(target, static_cast<double>(next_index) * record_every);
    double dt = cfl_dt(state, g, p, cfg);
    bool lands = false;
    if (dt >= target - state.t) {
      dt = target - state.t;
      lands = true;
    }
    previous.rho.assign(state.rho.begin(), state.rho.end());
    if constexpr (std::is_same_v<S, State>)
      previous.m.assign(state.m.begin(), state.m.end());
    else
      previous.w.assign(state.w.begin(), state.w.end());
    previous.t = state.t;

    const StepFluxes fl = stepper.step(state, dt);
    ++traj.steps;
    if (lands) state.t = target;
    if (fl.vacuum_breach) {
      traj.status = RunStatus::VacuumBreach;
      const auto it = std::min_element(state.rho.begin(), state.rho.end());
      std::ostringstream os;
      os << "density fell below the vacuum floor " << cfg.floor(p) << " (min " << *it
         << ") at t=" << state.t;
      traj.message = os.str();
      if (traj.snapshots.back().record.t < previous.t) record(previous);
      break;
    }
    traj.min_dt = std::min(traj.min_dt, dt);

    const long double m_now = density_sum(state.rho);
    const long double expected =
        static_cast<long double>(dt) * (static_cast<long double>(fl.left) - fl.right + fl.source) /
        dx;
    expected_total += expected;
    const double step_err = static_cast<double>(std::abs((m_now - m_prev) - expected) / m_prev);
    traj.mass_balance.max_step_rel_error = std::max(traj.mass_balance.max_step_rel_error, step_err);
    m_prev = m_now;

    const auto [g_now, d_now] = rates(state);
    gronwall_integral += 0.5 * (g_prev + g_now) * dt;
    dissipation += 0.5 * (d_prev + d_now) * dt;
    g_prev = g_now;
    d_prev = d_now;

    if (lands) {
      record(state);
      if (cadence && target < t_end) ++next_index;
      // Skip cadence points that the step landed beyond (cannot happen when landing exactly).
      while (cadence && static_cast<double>(next_index) * record_every <= state.t) ++next_index;
    }
  }
  traj.mass_balance.accumulated_rel_error =
      static_cast<double>(std::abs(m_prev - m0 - expected_total) / m0);
  if (traj.steps == 0) traj.min_dt = 0.0;
  return traj;
}

}  // namespace

Trajectory run(const State& initial, double t_end, const Grid1D& g, const Params& p,
               const SchemeConfig& cfg, double record_every, const RunOptions& opts) {
  if (cfg.formulation == Formulation::Effective)
    return run(to_effective(initial, g, p), t_end, g, p, cfg, record_every, opts);
  return integrate<PrimitiveStepper>(initial, t_end, g, p, cfg, record_every, opts);
}

Trajectory run(const EffectiveState& initial, double t_end, const Grid1D& g, const Params& p,
               const SchemeConfig& cfg, double record_every, const RunOptions& opts) {
  return integrate<EffectiveStepper>(initial, t_end, g, p, cfg, record_every, opts);
}

}  // namespace bdflow
