#include "bdflow/core.hpp"

#include <sstream>

namespace bdflow {

namespace {

void require_positive(double rho, const char* what) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    std::ostringstream os;
    os << what << ": density must be positive and finite, got " << rho;
    throw DomainError(os.str());
  }
}

// Primitive of c z^{k-1}: c/k z^k, or c ln z when k == 0.
double power_primitive(double c, double k, double z) {
  if (k == 0.0) return c * std::log(z);
  return c / k * fast_pow(z, k);
}

}  // namespace

void Params::validate() const {
  if (!(mu > 0.0)) throw ParameterError("mu must be positive");
  if (!(alpha >= 0.0)) throw ParameterError("alpha must be non-negative");
  if (!(a > 0.0)) throw ParameterError("a must be positive");
  if (!(gamma > 1.0)) throw ParameterError("gamma must exceed 1");
  if (!(rho_bar > 0.0)) throw ParameterError("rho_bar must be positive");
  if (!(theta >= 0.0 && theta < 0.5)) throw ParameterError("theta must lie in [0, 1/2)");
  if (n_reg.finite() && n_reg.value() == 0) throw ParameterError("n_reg must be >= 1 or inf");
}

bool Params::strong_coupling_regime() const {
  if (gamma < alpha) return false;
  return alpha <= 0.5 || gamma >= 2.0 * alpha - 1.0;
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> x(cells);
  for (std::size_t i = 0; i < cells; ++i) x[i] = center(i);
  return x;
}

void Grid1D::validate() const {
  if (!(x_max > x_min)) throw ParameterError("grid: x_max must exceed x_min");
  if (cells < 4) throw ParameterError("grid: at least 4 cells required");
  if (ghost < 2) throw ParameterError("grid: at least 2 ghost cells required");
  if (boundary == Boundary::Periodic && ghost > cells)
    throw ParameterError("grid: periodic padding wider than the domain");
}

double pressure(double rho, const Params& p) { return p.a * fast_pow(rho, p.gamma); }

double pressure_derivative(double rho, const Params& p) {
  return p.a * p.gamma * fast_pow(rho, p.gamma - 1.0);
}

double viscosity(double rho, const Params& p) {
  double v = p.mu * fast_pow(rho, p.alpha);
  if (p.n_reg.finite()) v += p.n_reg.inverse() * fast_pow(rho, p.theta);
  return v;
}

double viscosity_derivative(double rho, const Params& p) {
  double d = p.alpha == 0.0 ? 0.0 : p.mu * p.alpha * fast_pow(rho, p.alpha - 1.0);
  if (p.n_reg.finite() && p.theta != 0.0)
    d += p.n_reg.inverse() * p.theta * fast_pow(rho, p.theta - 1.0);
  return d;
}

double phi(double rho, const Params& p) {
  require_positive(rho, "phi");
  double v = power_primitive(p.mu, p.alpha - 1.0, rho);
  if (p.n_reg.finite()) v += power_primitive(p.n_reg.inverse(), p.theta - 1.0, rho);
  return v;
}

double phi1(double rho, const Params& p) {
  require_positive(rho, "phi1");
  double v = power_primitive(p.mu, p.alpha, rho);
  if (p.n_reg.finite()) v += power_primitive(p.n_reg.inverse(), p.theta, rho);
  return v;
}

double phi2(double rho, const Params& p) {
  if (p.alpha == 0.5) throw ParameterError("phi2 requires alpha != 1/2");
  require_positive(rho, "phi2");
  double v = power_primitive(p.mu, p.alpha - 0.5, rho);
  if (p.n_reg.finite()) v += power_primitive(p.n_reg.inverse(), p.theta - 0.5, rho);
  return v;
}

double phi1_inverse(double value, const Params& p) {
  if (p.alpha == 0.0) return std::exp(value / p.mu);
  const double base = p.alpha * value / p.mu;
  if (!(base > 0.0)) throw DomainError("phi1_inverse: value outside the range of phi1");
  return fast_pow(base, 1.0 / p.alpha);
}

double pi_rel(double rho, const Params& p) {
  if (rho < 0.0) throw DomainError("pi_rel: negative density");
  // a rho_bar^gamma / (gamma-1) * (x^gamma - 1 - gamma (x-1)), x = rho/rho_bar
  const double scale = p.a * fast_pow(p.rho_bar, p.gamma) / (p.gamma - 1.0);
  const double h = rho / p.rho_bar - 1.0;
  double bracket = 0.0;
  if (std::abs(h) < 1e-2) {
    // binomial series from the quadratic term on
    double coeff = p.gamma;
    double hk = h;
    for (int k = 2; k <= 9; ++k) {
      coeff *= (p.gamma - (k - 1)) / k;
      hk *= h;
      bracket += coeff * hk;
    }
  } else {
    bracket = fast_pow(1.0 + h, p.gamma) - 1.0 - p.gamma * h;
  }
  return std::max(0.0, scale * bracket);
}

double sound_speed(double rho, const Params& p) { return std::sqrt(pressure_derivative(rho, p)); }

double relaxation_rate(double rho, const Params& p) {
  return p.a * p.gamma * fast_pow(rho, p.gamma) / viscosity(rho, p);
}

void check_density(std::span<const double> rho, const char* where) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0) || !std::isfinite(rho[i])) {
      std::ostringstream os;
      os << where << ": vacuum guard violated at cell " << i << " (rho=" << rho[i] << ")";
      throw StateError(os.str());
    }
  }
}

std::vector<double> with_ghosts(std::span<const double> field, const Grid1D& g, double far_value) {
  const std::size_t n = field.size();
  const std::size_t G = g.ghost;
  std::vector<double> ext(n + 2 * G, far_value);
  std::copy(field.begin(), field.end(), ext.begin() + static_cast<std::ptrdiff_t>(G));
  if (g.boundary == Boundary::Periodic) {
    for (std::size_t k = 0; k < G; ++k) {
      ext[G - 1 - k] = field[(n - 1 - k % n)];
      ext[G + n + k] = field[k % n];
    }
  }
  return ext;
}

std::vector<double> centered_gradient(std::span<const double> field, const Grid1D& g,
                                      double far_value) {
  const std::size_t n = field.size();
  const auto ext = with_ghosts(field, g, far_value);
  const double inv2dx = 1.0 / (2.0 * g.dx());
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i + g.ghost;
    d[i] = (ext[k + 1] - ext[k - 1]) * inv2dx;
  }
  return d;
}

std::vector<double> effective_velocity(const State& s, const Grid1D& g, const Params& p) {
  check_density(s.rho, "effective_velocity");
  const auto dphi = gradient_of(s.rho, g, p, [](double r, const Params& q) { return phi(r, q); });
  std::vector<double> v(s.rho.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.m[i] / s.rho[i] + dphi[i];
  return v;
}

EffectiveState to_effective(const State& s, const Grid1D& g, const Params& p) {
  check_density(s.rho, "to_effective");
  const auto dphi1 =
      gradient_of(s.rho, g, p, [](double r, const Params& q) { return phi1(r, q); });
  EffectiveState e{s.rho, std::vector<double>(s.m.size()), s.t};
  for (std::size_t i = 0; i < e.w.size(); ++i) e.w[i] = s.m[i] + dphi1[i];
  return e;
}

State from_effective(const EffectiveState& e, const Grid1D& g, const Params& p) {
  check_density(e.rho, "from_effective");
  const auto dphi1 =
      gradient_of(e.rho, g, p, [](double r, const Params& q) { return phi1(r, q); });
  State s{e.rho, std::vector<double>(e.w.size()), e.t};
  for (std::size_t i = 0; i < s.m.size(); ++i) s.m[i] = e.w[i] - dphi1[i];
  return s;
}

}  // namespace bdflow
