#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bdflow/core.hpp"
#include "bdflow/diagnostics.hpp"

namespace bdflow {

enum class Formulation { Primitive, Effective };
enum class FluxKind { Rusanov, Upwind };

std::string_view to_string(Formulation f);
std::string_view to_string(FluxKind f);
Formulation formulation_from_string(std::string_view s);
FluxKind flux_from_string(std::string_view s);

struct SchemeConfig {
  Formulation formulation = Formulation::Primitive;
  double cfl_safety = 0.4;
  FluxKind flux = FluxKind::Rusanov;
  std::optional<double> vacuum_floor;  // default 1e-8 rho_bar
  std::size_t max_steps = 100'000'000;

  double floor(const Params& p) const { return vacuum_floor.value_or(1e-8 * p.rho_bar); }
  void validate() const;
};

/// Cell-centred source terms (mass, momentum) at (x, t). For the effective
/// formulation the second component drives w = rho v.
using Forcing = std::function<std::pair<double, double>(double x, double t)>;

/// Mass fluxes through the two boundary faces during one step; the discrete
/// mass changes by exactly dt (left - right + source).
struct StepFluxes {
  double left = 0.0;
  double right = 0.0;
  double source = 0.0;  // integral of the mass source over the domain
  bool vacuum_breach = false;
};

double cfl_dt(const State& s, const Grid1D& g, const Params& p, const SchemeConfig& cfg);
double cfl_dt(const EffectiveState& e, const Grid1D& g, const Params& p, const SchemeConfig& cfg);

/// Explicit finite-volume update of the primitive system (density, momentum)
/// with reusable work buffers.
class PrimitiveStepper {
 public:
  PrimitiveStepper(const Grid1D& g, const Params& p, const SchemeConfig& cfg,
                   const Forcing* forcing = nullptr);
  StepFluxes step(State& s, double dt);

 private:
  Grid1D g_;
  Params p_;
  SchemeConfig cfg_;
  const Forcing* forcing_;
  std::vector<double> x_, rho_, m_, u_, pres_, visc_, speed_, d_rho_, d_m_, s_rho_, s_m_, f_rho_,
      f_m_;
};

/// Update of the (density, effective momentum) system: upwinded drift plus
/// nonlinear diffusion for rho, transport of w, and exact relaxation of v
/// towards u over the step.
class EffectiveStepper {
 public:
  EffectiveStepper(const Grid1D& g, const Params& p, const SchemeConfig& cfg,
                   const Forcing* forcing = nullptr);
  StepFluxes step(EffectiveState& e, double dt);

 private:
  Grid1D g_;
  Params p_;
  SchemeConfig cfg_;
  const Forcing* forcing_;
  std::vector<double> x_, rho_, w_, v_, u_, ph_, ph1_, d_rho_, d_w_, s_rho_, s_w_, f_rho_, f_w_;
};

State step_primitive(const State& s, double dt, const Grid1D& g, const Params& p,
                     const SchemeConfig& cfg);
EffectiveState step_effective(const EffectiveState& e, double dt, const Grid1D& g,
                              const Params& p, const SchemeConfig& cfg);

enum class RunStatus { Completed, VacuumBreach, StepBudgetExhausted };
std::string_view to_string(RunStatus s);

struct Snapshot {
  State state;  // primitive variables; empty fields when states are not stored
  DiagnosticsRecord record;
};

struct MassBalance {
  double max_step_rel_error = 0.0;    // worst single-step |dM - dt (F_l - F_r)| / M
  double accumulated_rel_error = 0.0; // |M(T) - M(0) - sum dt (F_l - F_r)| / M(0)
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  RunStatus status = RunStatus::Completed;
  std::size_t steps = 0;
  double min_dt = 0.0;
  MassBalance mass_balance;
  std::string message;
};

struct RunOptions {
  const Forcing* forcing = nullptr;
  DiagnosticsOptions diagnostics;
  bool store_states = true;
};

/// Advance to t_end, recording at t = 0, every `record_every`, and at the end.
/// The integration uses the formulation selected in cfg; an effective run
/// converts the initial State with to_effective.
Trajectory run(const State& initial, double t_end, const Grid1D& g, const Params& p,
               const SchemeConfig& cfg, double record_every, const RunOptions& opts = {});
/// Effective-variable start; the integration always uses the effective stepper.
Trajectory run(const EffectiveState& initial, double t_end, const Grid1D& g, const Params& p,
               const SchemeConfig& cfg, double record_every, const RunOptions& opts = {});

}  // namespace bdflow
