#include "bdflow/manufactured.hpp"

#include <cmath>

namespace bdflow {

namespace {

// Pointwise values and first/second space derivatives of the wave.
struct Jet {
  double r, rx, rxx, rt, rtx;
  double u, ux, uxx, ut;
};

Jet jet(const ManufacturedSolution& ms, double x, double t) {
  const double xi = x - ms.speed * t;
  const double s = std::sin(xi);
  const double c = std::cos(xi);
  const double A = ms.rho_amplitude;
  const double B = ms.u_amplitude;
  return {1.0 + A * s, A * c,          -A * s, -ms.speed * A * c, ms.speed * A * s,
          B * c,       -B * s,         -B * c, ms.speed * B * s};
}

}  // namespace

double ManufacturedSolution::rho(double x, double t) const {
  return 1.0 + rho_amplitude * std::sin(x - speed * t);
}

double ManufacturedSolution::u(double x, double t) const {
  return u_amplitude * std::cos(x - speed * t);
}

double ManufacturedSolution::effective_momentum(double x, double t, const Params& p) const {
  const Jet j = jet(*this, x, t);
  return j.r * j.u + viscosity(j.r, p) / j.r * j.rx;
}

std::pair<double, double> ManufacturedSolution::primitive_source(double x, double t,
                                                                 const Params& p) const {
  const Jet j = jet(*this, x, t);
  const double mx = j.rx * j.u + j.r * j.ux;
  const double mt = j.rt * j.u + j.r * j.ut;
  const double conv = j.rx * j.u * j.u + 2.0 * j.r * j.u * j.ux;
  const double px = pressure_derivative(j.r, p) * j.rx;
  const double visc = viscosity_derivative(j.r, p) * j.rx * j.ux + viscosity(j.r, p) * j.uxx;
  return {j.rt + mx, mt + conv + px - visc};
}

std::pair<double, double> ManufacturedSolution::effective_source(double x, double t,
                                                                 const Params& p) const {
  const Jet j = jet(*this, x, t);
  const auto [s_rho, s_m] = primitive_source(x, t, p);
  const double mxx = j.rxx * j.u + 2.0 * j.rx * j.ux + j.r * j.uxx;
  const double s_rho_x = j.rtx + mxx;
  const double mu = viscosity(j.r, p);
  const double coef = mu / j.r;
  const double coef_x = (viscosity_derivative(j.r, p) * j.r - mu) / (j.r * j.r) * j.rx;
  return {s_rho, s_m + coef_x * s_rho + coef * s_rho_x};
}

Forcing ManufacturedSolution::forcing(Formulation f, const Params& p) const {
  const ManufacturedSolution ms = *this;
  if (f == Formulation::Primitive)
    return [ms, p](double x, double t) { return ms.primitive_source(x, t, p); };
  return [ms, p](double x, double t) { return ms.effective_source(x, t, p); };
}

State ManufacturedSolution::state(const Grid1D& g, double t) const {
  State s{std::vector<double>(g.cells), std::vector<double>(g.cells), t};
  for (std::size_t i = 0; i < g.cells; ++i) {
    const double x = g.center(i);
    s.rho[i] = rho(x, t);
    s.m[i] = momentum(x, t);
  }
  return s;
}

EffectiveState ManufacturedSolution::effective_state(const Grid1D& g, const Params& p,
                                                     double t) const {
  EffectiveState e{std::vector<double>(g.cells), std::vector<double>(g.cells), t};
  for (std::size_t i = 0; i < g.cells; ++i) {
    const double x = g.center(i);
    e.rho[i] = rho(x, t);
    e.w[i] = effective_momentum(x, t, p);
  }
  return e;
}

}  // namespace bdflow
