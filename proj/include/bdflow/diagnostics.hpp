#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bdflow/core.hpp"

namespace bdflow {

struct Trajectory;

struct DiagnosticsOptions {
  double jump_x0 = 0.0;
  std::size_t jump_window = 32;  // cells
  bool m2_norm = false;          // needs alpha != 1/2
};

/// All monitored functionals at one time. gronwall_rhs and dissipation_bd are
/// running quantities accumulated by the time loop.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double l1_rhou = 0.0;
  double l1_rhov = 0.0;
  double bd_entropy = 0.0;
  double energy = 0.0;
  double tv_rho = 0.0;
  double rho_max = 0.0;
  double rho_min = 0.0;
  double h1_phi1 = 0.0;
  double jump_amp = 0.0;
  double gronwall_rhs = 0.0;
  double dissipation_bd = 0.0;
  double m2_l2 = 0.0;          // NaN when disabled
  double dev_l2_near = 0.0;    // ||rho - rho_bar||_L2 where |rho - rho_bar| <= rho_bar/2
  double dev_lgamma_far = 0.0; // ||rho - rho_bar||_Lgamma elsewhere
};

double mass(const State& s, const Grid1D& g);

struct MomentumNorms {
  double rhou = 0.0;
  double rhov = 0.0;
};
/// ||rho u||_L1 and ||rho v||_L1 with rho v = m + D phi1(rho).
MomentumNorms l1_momenta(const State& s, const Grid1D& g, const Params& p);

/// int (rho v^2 / 2 + Pi(rho) - Pi(rho_bar)) dx.
double bd_entropy(const State& s, const Grid1D& g, const Params& p);
/// int (rho u^2 / 2 + Pi(rho) - Pi(rho_bar)) dx.
double energy(const State& s, const Grid1D& g, const Params& p);

double total_variation(std::span<const double> field);

/// Discrete L2 norm of d_x phi1(rho) on cell faces.
double h1_phi1(const State& s, const Grid1D& g, const Params& p);

/// Largest neighbour jump |rho[i+1] - rho[i]| over `window` cells centred at x0.
double jump_amplitude(std::span<const double> rho, const Grid1D& g, double x0,
                      std::size_t window);

/// ||sqrt(rho) u + D phi2(rho)||_L2.
double m2_l2(const State& s, const Grid1D& g, const Params& p);

struct DeviationNorms {
  double l2_near = 0.0;
  double lgamma_far = 0.0;
};
DeviationNorms deviation_norms(std::span<const double> rho, const Grid1D& g, const Params& p);

/// Upper bound on ||P'(rho) rho / mu_n(rho)||_inf given the density range.
double gronwall_rate(double rho_min, double rho_max, const Params& p);

/// int P'(rho) mu_n(rho) / rho^2 |d_x rho|^2 dx written as
/// 4 a gamma mu/(gamma+alpha-1)^2 |d_x rho^{(gamma+alpha-1)/2}|^2 (+ the theta branch).
double dissipation_rate(std::span<const double> rho, const Grid1D& g, const Params& p);

DiagnosticsRecord make_record(const State& s, const Grid1D& g, const Params& p,
                              const DiagnosticsOptions& opts, double gronwall_rhs,
                              double dissipation);

/// Restrict a field to a grid twice as coarse by averaging cell pairs.
std::vector<double> restrict_by_two(std::span<const double> field);

struct GronwallReport {
  std::vector<double> envelope;
  std::vector<double> measured;
  double max_ratio = 0.0;  // max measured / envelope over snapshots with envelope > 0
  bool verdict = true;
};
/// Envelope (||rho v(0)||_1 + ||rho u(0)||_1) exp(3 int_0^t rate) with the rate
/// integrated by the trapezoid rule over snapshot times.
GronwallReport gronwall_envelope(const Trajectory& traj, const Params& p, double tol);

struct DissipationReport {
  std::vector<double> dissipation;
  std::vector<double> residual;  // bd(t) + D(t) - bd(0)
  double max_residual = 0.0;
};
DissipationReport dissipation_budget(const Trajectory& traj);

struct EntropyReport {
  double max_violation = 0.0;  // max_t max(0, bd(t) - bd(0)) / bd(0)
  bool verdict = true;
};
EntropyReport entropy_decay(const Trajectory& traj, double tol);

}  // namespace bdflow
