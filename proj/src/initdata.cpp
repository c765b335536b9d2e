#include "bdflow/initdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bdflow {

namespace {

constexpr double kTruncationSigmas = 8.0;

std::string join(const std::vector<std::string>& parts) {
  std::string out = "scenario validation failed";
  for (const auto& p : parts) out += "; " + p;
  return out;
}

Params without_regularization(Params p) {
  p.n_reg = RegIndex::infinity();
  return p;
}

double l1_norm(std::span<const double> f, double dx) {
  double s = 0.0;
  for (double v : f) s += std::abs(v);
  return s * dx;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::StrongCoupling: return "theo1-strong-coupling";
    case ScenarioKind::WeakCoupling: return "corbis-weak-coupling";
    case ScenarioKind::ConstantViscosity: return "theo2-constant-visc";
    case ScenarioKind::HoffL2Velocity: return "hoff-L2-velocity";
    case ScenarioKind::Custom: return "custom";
  }
  return "custom";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (auto k : {ScenarioKind::StrongCoupling, ScenarioKind::WeakCoupling,
                 ScenarioKind::ConstantViscosity, ScenarioKind::HoffL2Velocity,
                 ScenarioKind::Custom}) {
    if (name == to_string(k)) return k;
  }
  if (name == "theo1") return ScenarioKind::StrongCoupling;
  if (name == "corbis") return ScenarioKind::WeakCoupling;
  if (name == "theo2") return ScenarioKind::ConstantViscosity;
  if (name == "hoff") return ScenarioKind::HoffL2Velocity;
  throw ParameterError("unknown scenario kind '" + std::string(name) + "'");
}

double Profile::operator()(double x) const {
  switch (shape) {
    case Shape::Zero: return 0.0;
    case Shape::Gaussian: {
      const double z = (x - center) / width;
      return amplitude * std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

double DensityProfile::operator()(double x) const {
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  const auto k = static_cast<std::size_t>(it - breaks.begin());
  return values[k] + bump(x);
}

double ScenarioSpec::resolved_tau(const Grid1D& g) const {
  if (mollify_sigma_cells) {
    const double sigma = *mollify_sigma_cells * g.dx();
    return 0.5 * sigma * sigma;
  }
  return mollify_tau.value_or(0.0);
}

void ScenarioSpec::validate() const {
  std::vector<std::string> bad;
  const auto& p = params;
  try {
    p.validate();
  } catch (const ParameterError& e) {
    bad.emplace_back(e.what());
  }

  if (density.values.size() != density.breaks.size() + 1)
    bad.emplace_back("density profile needs exactly one more value than breakpoints");
  if (!std::is_sorted(density.breaks.begin(), density.breaks.end()) ||
      std::adjacent_find(density.breaks.begin(), density.breaks.end()) != density.breaks.end())
    bad.emplace_back("density breakpoints must be strictly increasing");
  for (double v : density.values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      bad.emplace_back("density values must satisfy 0 < c <= rho0 <= C < inf");
      break;
    }
  }
  if (density.bump.shape == Profile::Shape::Gaussian && !(density.bump.width > 0.0))
    bad.emplace_back("density bump width must be positive");

  const bool has_atoms = !momentum_atoms.empty();
  const bool has_tau = mollify_tau.has_value() || mollify_sigma_cells.has_value();
  if (mollify_tau && !(*mollify_tau > 0.0)) bad.emplace_back("mollify_tau must be positive");
  if (mollify_sigma_cells && !(*mollify_sigma_cells > 0.0))
    bad.emplace_back("mollify_sigma_cells must be positive");
  if (has_atoms && !has_tau)
    bad.emplace_back("momentum atoms require a positive mollification time");
  if (!(eps0 > 0.0)) bad.emplace_back("eps0 must be positive");

  switch (kind) {
    case ScenarioKind::StrongCoupling:
      if (!(p.alpha > 0.0)) bad.emplace_back("strong coupling requires alpha > 0");
      if (p.alpha == 0.5) bad.emplace_back("strong coupling requires alpha != 1/2");
      if (p.gamma < p.alpha) bad.emplace_back("strong coupling requires gamma >= alpha");
      if (p.alpha > 0.5 && p.gamma < 2.0 * p.alpha - 1.0)
        bad.emplace_back("strong coupling requires gamma >= 2 alpha - 1 when alpha > 1/2");
      if (has_atoms)
        bad.emplace_back("strong coupling requires v0 in L^2: momentum atoms are not allowed");
      if (!u0.is_zero()) bad.emplace_back("strong coupling prescribes v0, not u0");
      break;
    case ScenarioKind::WeakCoupling:
      if (!(p.alpha > 0.0)) bad.emplace_back("weak coupling requires alpha > 0");
      if (p.gamma < p.alpha) bad.emplace_back("weak coupling requires gamma >= alpha");
      if (!v0.is_zero()) bad.emplace_back("weak coupling prescribes u0, not v0");
      break;
    case ScenarioKind::ConstantViscosity:
      if (p.alpha != 0.0) bad.emplace_back("constant viscosity requires alpha = 0");
      if (has_atoms)
        bad.emplace_back("constant viscosity requires v0 in L^2: momentum atoms are not allowed");
      if (!u0.is_zero()) bad.emplace_back("constant viscosity prescribes v0, not u0");
      break;
    case ScenarioKind::HoffL2Velocity:
      if (has_atoms) bad.emplace_back("Hoff regime requires u0 in L^2: no momentum atoms");
      if (!v0.is_zero()) bad.emplace_back("Hoff regime prescribes u0, not v0");
      break;
    case ScenarioKind::Custom: break;
  }

  if (!bad.empty()) throw ValidationError(std::move(bad));
}

MollifyResult heat_mollify(std::span<const double> field, double tau, const Grid1D& g,
                           double exterior) {
  if (!(tau > 0.0)) throw ParameterError("heat_mollify: tau must be positive");
  const std::size_t n = field.size();
  const double dx = g.dx();
  const double sigma = std::sqrt(2.0 * tau);
  const auto K = static_cast<std::ptrdiff_t>(std::ceil(kTruncationSigmas * sigma / dx));

  std::vector<double> weights(static_cast<std::size_t>(2 * K + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -K; k <= K; ++k) {
    const double x = static_cast<double>(k) * dx;
    const double wk = std::exp(-x * x / (4.0 * tau));
    weights[static_cast<std::size_t>(k + K)] = wk;
    total += wk;
  }
  for (double& wk : weights) wk /= total;

  MollifyResult out{std::vector<double>(n, exterior), false};
  const auto N = static_cast<std::ptrdiff_t>(n);
  const bool periodic = g.boundary == Boundary::Periodic;
  double peak = 0.0;
  for (double v : field) peak = std::max(peak, std::abs(v - (periodic ? 0.0 : exterior)));
  for (std::ptrdiff_t j = 0; j < N; ++j) {
    const double f = field[static_cast<std::size_t>(j)] - (periodic ? 0.0 : exterior);
    if (f == 0.0) continue;
    // tails below this fraction of the peak do not count as truncated support
    if (!periodic && (j - K < 0 || j + K >= N) && std::abs(f) > 1e-12 * peak)
      out.support_warning = true;
    for (std::ptrdiff_t k = -K; k <= K; ++k) {
      std::ptrdiff_t i = j + k;
      if (periodic) {
        i %= N;
        if (i < 0) i += N;
      } else if (i < 0 || i >= N) {
        continue;
      }
      out.field[static_cast<std::size_t>(i)] += f * weights[static_cast<std::size_t>(k + K)];
    }
  }
  if (periodic) {
    for (double& v : out.field) v -= exterior;
  }
  return out;
}

MollifyResult heat_mollify(std::span<const Atom> atoms, double tau, const Grid1D& g) {
  if (!(tau > 0.0)) throw ParameterError("heat_mollify: tau must be positive");
  const std::size_t n = g.cells;
  const double dx = g.dx();
  const double sigma = std::sqrt(2.0 * tau);
  const double reach = kTruncationSigmas * sigma;
  const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * tau);
  const double L = g.length();

  MollifyResult out{std::vector<double>(n, 0.0), false};
  for (const auto& atom : atoms) {
    if (atom.x - reach < g.x_min || atom.x + reach > g.x_max) out.support_warning = true;
    // offset measured in cell units so that shifting an atom by k dx shifts the samples by k
    const double s = (atom.x - g.x_min) / dx;
    for (std::size_t i = 0; i < n; ++i) {
      double r = (static_cast<double>(i) + 0.5 - s) * dx;
      if (g.boundary == Boundary::Periodic) r -= L * std::round(r / L);
      if (std::abs(r) > reach) continue;
      out.field[i] += atom.mass * norm * std::exp(-r * r / (4.0 * tau));
    }
  }
  return out;
}

std::vector<double> make_shock_density(double rho_left, double rho_right, double x0,
                                       const Grid1D& g) {
  if (!(rho_left > 0.0) || !(rho_right > 0.0))
    throw ParameterError("make_shock_density: densities must be positive");
  std::vector<double> rho(g.cells);
  for (std::size_t i = 0; i < g.cells; ++i) rho[i] = g.center(i) < x0 ? rho_left : rho_right;
  return rho;
}

MollifyResult make_dirac_momentum(std::span<const Atom> atoms, double tau, const Grid1D& g) {
  return heat_mollify(atoms, tau, g);
}

BuiltScenario build_scenario(const ScenarioSpec& spec, const Grid1D& g) {
  spec.validate();
  g.validate();

  const Params& p = spec.params;
  // The data construction uses phi1 = (mu/alpha) rho^alpha; only the
  // dynamics see the (1/n) rho^theta part of the viscosity.
  const Params data_params = without_regularization(p);
  const std::size_t n = g.cells;
  const double dx = g.dx();
  const auto x = g.centers();
  const double tau = spec.resolved_tau(g);

  std::vector<double> rho0(n);
  for (std::size_t i = 0; i < n; ++i) rho0[i] = spec.density(x[i]);
  check_density(rho0, "build_scenario");

  const bool effective_data =
      spec.kind == ScenarioKind::StrongCoupling || spec.kind == ScenarioKind::ConstantViscosity ||
      (spec.kind == ScenarioKind::Custom && !spec.v0.is_zero());

  auto dphi1 = gradient_of(rho0, g, data_params,
                           [](double r, const Params& q) { return phi1(r, q); });

  std::vector<double> m0(n);
  for (std::size_t i = 0; i < n; ++i) {
    m0[i] = rho0[i] * (spec.u0(x[i]) + spec.v0(x[i]));
    if (effective_data) m0[i] -= dphi1[i];
  }

  BuiltScenario out;
  out.tau = tau;
  out.smallness.eps0 = spec.eps0;
  out.smallness.dphi1_norm = l1_norm(dphi1, dx);
  out.smallness.m0_norm = l1_norm(m0, dx);
  for (const auto& a : spec.momentum_atoms) out.smallness.m0_norm += std::abs(a.mass);

  std::vector<double> rho = rho0;
  std::vector<double> m = m0;
  if (tau > 0.0) {
    std::vector<double> f1(n);
    for (std::size_t i = 0; i < n; ++i) f1[i] = phi1(rho0[i], data_params);
    auto smooth_f1 = heat_mollify(f1, tau, g, phi1(p.rho_bar, data_params));
    for (std::size_t i = 0; i < n; ++i) rho[i] = phi1_inverse(smooth_f1.field[i], data_params);
    auto smooth_m = heat_mollify(m0, tau, g, 0.0);
    m = std::move(smooth_m.field);
    out.support_warning = smooth_f1.support_warning || smooth_m.support_warning;
    if (!spec.momentum_atoms.empty()) {
      auto atoms = make_dirac_momentum(spec.momentum_atoms, tau, g);
      for (std::size_t i = 0; i < n; ++i) m[i] += atoms.field[i];
      out.support_warning = out.support_warning || atoms.support_warning;
    }
  }

  check_density(rho, "build_scenario");
  if (g.boundary == Boundary::FarField) {
    const double tol = 1e-8 * p.rho_bar;
    if (std::abs(rho.front() - p.rho_bar) > tol || std::abs(rho.back() - p.rho_bar) > tol)
      throw ValidationError({"initial density must match rho_bar at both domain edges"});
  }

  out.state = State{std::move(rho), std::move(m), 0.0};
  out.effective = to_effective(out.state, g, p);
  return out;
}

std::vector<std::string> scenario_preset_names() {
  return {"equilibrium", "theo1", "corbis", "theo2", "hoff", "acoustic"};
}

ScenarioSpec scenario_preset(std::string_view name) {
  ScenarioSpec s;
  // density plateau 1 -> 2 on [0, 2), back to the far-field value 1
  DensityProfile plateau{{0.0, 2.0}, {1.0, 2.0, 1.0}, {}};

  if (name == "equilibrium") {
    s.kind = ScenarioKind::Custom;
    s.density = DensityProfile{{}, {1.0}, {}};
  } else if (name == "theo1") {
    s.kind = ScenarioKind::StrongCoupling;
    s.density = plateau;
    s.mollify_sigma_cells = 2.0;
  } else if (name == "corbis") {
    s.kind = ScenarioKind::WeakCoupling;
    s.density = plateau;
    s.momentum_atoms = {Atom{0.0, 0.1}};
    s.mollify_sigma_cells = 2.0;
  } else if (name == "theo2") {
    s.kind = ScenarioKind::ConstantViscosity;
    s.params.alpha = 0.0;
    s.density = plateau;
    s.mollify_sigma_cells = 2.0;
  } else if (name == "hoff") {
    s.kind = ScenarioKind::HoffL2Velocity;
    s.params.alpha = 0.0;
    s.density = plateau;
    s.u0 = Profile{Profile::Shape::Gaussian, 0.5, -1.0, 0.5};
    s.mollify_sigma_cells = 2.0;
  } else if (name == "acoustic") {
    // right-moving simple wave: rho = 1 + eps f, u = c eps f with c = sqrt(a gamma)
    constexpr double eps = 1e-3;
    s.kind = ScenarioKind::Custom;
    s.density = DensityProfile{{}, {1.0}, Profile{Profile::Shape::Gaussian, eps, -10.0, 1.0}};
    s.u0 = Profile{Profile::Shape::Gaussian, std::sqrt(2.0) * eps, -10.0, 1.0};
  } else {
    throw ParameterError("unknown scenario preset '" + std::string(name) + "'");
  }
  return s;
}

}  // namespace bdflow
