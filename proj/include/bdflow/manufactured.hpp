#pragma once

#include "bdflow/core.hpp"
#include "bdflow/solver.hpp"

namespace bdflow {

/// Smooth travelling wave rho = 1 + A sin(x - c t), u = B cos(x - c t) on a
/// periodic domain, with the sources that make it an exact solution.
struct ManufacturedSolution {
  double rho_amplitude = 0.1;
  double u_amplitude = 0.1;
  double speed = 1.0;

  double rho(double x, double t) const;
  double u(double x, double t) const;
  double momentum(double x, double t) const { return rho(x, t) * u(x, t); }
  /// rho v = rho u + d_x phi1(rho), evaluated exactly.
  double effective_momentum(double x, double t, const Params& p) const;

  /// (S_rho, S_m) for the primitive system.
  std::pair<double, double> primitive_source(double x, double t, const Params& p) const;
  /// (S_rho, S_w) for the effective system: S_w = S_m + d_x((mu_n(rho)/rho) S_rho).
  std::pair<double, double> effective_source(double x, double t, const Params& p) const;

  Forcing forcing(Formulation f, const Params& p) const;

  /// Cell-sampled exact state at time t.
  State state(const Grid1D& g, double t) const;
  EffectiveState effective_state(const Grid1D& g, const Params& p, double t) const;
};

}  // namespace bdflow
