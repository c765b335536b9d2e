#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bdflow/core.hpp"

namespace bdflow {

/// Raised when a scenario does not satisfy the hypotheses of its regime.
/// Carries one message per violated hypothesis.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class ScenarioKind {
  StrongCoupling,     // theo1-strong-coupling: v0 in L^2, m0 = rho0 v0 - d_x phi1(rho0)
  WeakCoupling,       // corbis-weak-coupling: u0 in L^2, m0 may carry Dirac atoms
  ConstantViscosity,  // theo2-constant-visc: strong-coupling data with alpha = 0
  HoffL2Velocity,     // hoff-L2-velocity: u0 in L^2, BV density, no atoms
  Custom,
};

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

/// A smooth, square-integrable profile.
struct Profile {
  enum class Shape { Zero, Gaussian };
  Shape shape = Shape::Zero;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;

  double operator()(double x) const;
  bool is_zero() const { return shape == Shape::Zero || amplitude == 0.0; }
};

/// Piecewise-constant density (values.size() == breaks.size() + 1) plus an
/// optional smooth bump.
struct DensityProfile {
  std::vector<double> breaks;
  std::vector<double> values{1.0};
  Profile bump;

  double operator()(double x) const;
};

/// Dirac atom of a finite measure.
struct Atom {
  double x = 0.0;
  double mass = 0.0;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Custom;
  DensityProfile density;
  std::vector<Atom> momentum_atoms;
  Profile v0;  // effective velocity profile (strong coupling, constant viscosity)
  Profile u0;  // velocity profile (weak coupling, Hoff)
  std::optional<double> mollify_tau;
  // Ties the mollification to the grid: tau = (sigma_cells dx)^2 / 2.
  std::optional<double> mollify_sigma_cells;
  double eps0 = 0.1;
  Params params;

  /// Mollification time for grid g; 0 means the data are not mollified.
  double resolved_tau(const Grid1D& g) const;

  /// Hypothesis check; throws ValidationError listing every violation.
  void validate() const;
};

struct MollifyResult {
  std::vector<double> field;
  bool support_warning = false;  // kernel support of non-trivial data leaves the domain
};

/// Discrete heat semigroup e^{tau d_xx}: convolution with the Gaussian of
/// variance 2 tau truncated at 8 standard deviations. Samples outside the
/// domain are taken equal to `exterior` on far-field grids.
MollifyResult heat_mollify(std::span<const double> field, double tau, const Grid1D& g,
                           double exterior = 0.0);

/// Heat semigroup applied to a sum of Dirac atoms, sampled at cell centres.
MollifyResult heat_mollify(std::span<const Atom> atoms, double tau, const Grid1D& g);

std::vector<double> make_shock_density(double rho_left, double rho_right, double x0,
                                       const Grid1D& g);

MollifyResult make_dirac_momentum(std::span<const Atom> atoms, double tau, const Grid1D& g);

/// Measure norms of the raw data entering the smallness condition.
struct SmallnessReport {
  double dphi1_norm = 0.0;  // ||d_x phi1(rho0)||_M
  double m0_norm = 0.0;     // ||m0||_M
  double eps0 = 0.1;
  double total() const { return dphi1_norm + m0_norm; }
  bool exceeds() const { return total() > eps0; }
};

struct BuiltScenario {
  State state;
  EffectiveState effective;
  SmallnessReport smallness;
  double tau = 0.0;
  bool support_warning = false;
};

BuiltScenario build_scenario(const ScenarioSpec& spec, const Grid1D& g);

/// Named scenario presets: equilibrium, theo1, corbis, theo2, hoff, acoustic.
std::vector<std::string> scenario_preset_names();
ScenarioSpec scenario_preset(std::string_view name);

}  // namespace bdflow
