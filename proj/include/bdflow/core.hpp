#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdflow {

// Thrown when a transform is evaluated outside its domain (e.g. rho <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Thrown for invalid constants or operation arguments.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a field violates the vacuum guard or contains non-finite values.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regularization index n in N u {infinity}. The infinite index disables the
/// (1/n) rho^theta part of the viscosity.
class RegIndex {
 public:
  constexpr RegIndex() = default;
  constexpr explicit RegIndex(unsigned n) : n_(n) {}

  static constexpr RegIndex infinity() { return RegIndex{}; }

  constexpr bool finite() const { return n_.has_value(); }
  constexpr unsigned value() const { return *n_; }
  constexpr double inverse() const { return n_ ? 1.0 / static_cast<double>(*n_) : 0.0; }

  std::string to_string() const { return n_ ? std::to_string(*n_) : std::string("inf"); }

  friend constexpr bool operator==(const RegIndex&, const RegIndex&) = default;

 private:
  std::optional<unsigned> n_;
};

/// Physical and regularization constants: P(rho) = a rho^gamma and
/// mu_n(rho) = mu rho^alpha + (1/n) rho^theta.
struct Params {
  double mu = 1.0;
  double alpha = 1.0;
  double a = 1.0;
  double gamma = 2.0;
  double rho_bar = 1.0;
  double theta = 0.25;
  RegIndex n_reg = RegIndex::infinity();

  // Throws ParameterError listing the first violated constraint.
  void validate() const;

  /// gamma >= alpha, and gamma >= 2 alpha - 1 whenever alpha > 1/2.
  bool strong_coupling_regime() const;
};

enum class Boundary { FarField, Periodic };

/// Uniform cell-centred mesh on [x_min, x_max] with `ghost` padding cells per side.
struct Grid1D {
  double x_min = -20.0;
  double x_max = 20.0;
  std::size_t cells = 20480;
  std::size_t ghost = 2;
  Boundary boundary = Boundary::FarField;

  double dx() const { return (x_max - x_min) / static_cast<double>(cells); }
  double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx(); }
  double length() const { return x_max - x_min; }
  std::vector<double> centers() const;

  void validate() const;
};

/// Density and momentum rho u per cell.
struct State {
  std::vector<double> rho;
  std::vector<double> m;
  double t = 0.0;
};

/// Density and effective momentum w = rho v per cell.
struct EffectiveState {
  std::vector<double> rho;
  std::vector<double> w;
  double t = 0.0;
};

// x^e with cheap paths for the exponents that dominate the presets.
inline double fast_pow(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  if (e == 0.5) return std::sqrt(x);
  if (e == -1.0) return 1.0 / x;
  if (e == 1.5) return x * std::sqrt(x);
  return std::pow(x, e);
}

double pressure(double rho, const Params& p);
double pressure_derivative(double rho, const Params& p);
double viscosity(double rho, const Params& p);
double viscosity_derivative(double rho, const Params& p);

/// Primitive of mu_n(rho)/rho^2 (the effective velocity is v = u + d_x phi(rho)).
double phi(double rho, const Params& p);
/// Primitive of mu_n(rho)/rho, so d_x phi1(rho) = rho d_x phi(rho).
double phi1(double rho, const Params& p);
/// Primitive of mu_n(rho)/rho^{3/2}. Undefined for alpha = 1/2.
double phi2(double rho, const Params& p);

/// Inverse of phi1 restricted to the mu rho^alpha branch (n = infinity).
double phi1_inverse(double value, const Params& p);

/// Relative pressure potential Pi(rho) - Pi(rho_bar), the convex potential
/// energy density that vanishes at the far-field density.
double pi_rel(double rho, const Params& p);

double sound_speed(double rho, const Params& p);

/// Rate a gamma rho^gamma / mu_n(rho) at which v relaxes towards u.
double relaxation_rate(double rho, const Params& p);

// Vacuum guard: throws StateError unless every density is finite and > 0.
void check_density(std::span<const double> rho, const char* where);

/// Copy of `field` padded with grid.ghost cells per side: far-field value, or
/// periodic wrap-around.
std::vector<double> with_ghosts(std::span<const double> field, const Grid1D& g, double far_value);

/// The one discrete gradient used for every cell-centred derivative:
/// (f[i+1] - f[i-1]) / (2 dx), with ghost values from `far_value` or periodicity.
std::vector<double> centered_gradient(std::span<const double> field, const Grid1D& g,
                                      double far_value);

/// Cell-centred transform field f(rho) and its centred gradient.
template <class Fn>
std::vector<double> gradient_of(std::span<const double> rho, const Grid1D& g, const Params& p,
                                Fn&& transform) {
  std::vector<double> f(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) f[i] = transform(rho[i], p);
  return centered_gradient(f, g, transform(p.rho_bar, p));
}

/// v = m/rho + D phi(rho).
std::vector<double> effective_velocity(const State& s, const Grid1D& g, const Params& p);

/// w = m + D phi1(rho).
EffectiveState to_effective(const State& s, const Grid1D& g, const Params& p);
/// m = w - D phi1(rho).
State from_effective(const EffectiveState& e, const Grid1D& g, const Params& p);

}  // namespace bdflow
