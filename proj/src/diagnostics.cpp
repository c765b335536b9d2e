#include "bdflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdflow/solver.hpp"

namespace bdflow {

double mass(const State& s, const Grid1D& g) {
  long double sum = 0.0L;
  for (double r : s.rho) sum += r;
  return static_cast<double>(sum) * g.dx();
}

MomentumNorms l1_momenta(const State& s, const Grid1D& g, const Params& p) {
  const auto e = to_effective(s, g, p);
  MomentumNorms out;
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    out.rhou += std::abs(s.m[i]);
    out.rhov += std::abs(e.w[i]);
  }
  out.rhou *= g.dx();
  out.rhov *= g.dx();
  return out;
}

double bd_entropy(const State& s, const Grid1D& g, const Params& p) {
  const auto e = to_effective(s, g, p);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    sum += 0.5 * e.w[i] * e.w[i] / s.rho[i] + pi_rel(s.rho[i], p);
  return sum * g.dx();
}

double energy(const State& s, const Grid1D& g, const Params& p) {
  check_density(s.rho, "energy");
  double sum = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    sum += 0.5 * s.m[i] * s.m[i] / s.rho[i] + pi_rel(s.rho[i], p);
  return sum * g.dx();
}

double total_variation(std::span<const double> field) {
  double tv = 0.0;
  for (std::size_t i = 1; i < field.size(); ++i) tv += std::abs(field[i] - field[i - 1]);
  return tv;
}

double h1_phi1(const State& s, const Grid1D& g, const Params& p) {
  check_density(s.rho, "h1_phi1");
  const double dx = g.dx();
  double sum = 0.0;
  double prev = phi1(s.rho.front(), p);
  for (std::size_t i = 1; i < s.rho.size(); ++i) {
    const double cur = phi1(s.rho[i], p);
    const double d = (cur - prev) / dx;
    sum += d * d;
    prev = cur;
  }
  return std::sqrt(sum * dx);
}

double jump_amplitude(std::span<const double> rho, const Grid1D& g, double x0,
                      std::size_t window) {
  if (window < 4) throw ParameterError("jump_amplitude: window must span at least 4 cells");
  const double pos = std::floor((x0 - g.x_min) / g.dx());
  const double lo = pos - static_cast<double>(window / 2);
  const double hi = lo + static_cast<double>(window);
  if (lo < 0.0 || hi > static_cast<double>(rho.size()))
    throw ParameterError("jump_amplitude: window extends outside the domain");
  const auto first = static_cast<std::size_t>(lo);
  const auto last = static_cast<std::size_t>(hi);
  double amp = 0.0;
  for (std::size_t i = first; i + 1 < last; ++i)
    amp = std::max(amp, std::abs(rho[i + 1] - rho[i]));
  return amp;
}

double m2_l2(const State& s, const Grid1D& g, const Params& p) {
  const auto dphi2 = gradient_of(s.rho, g, p, [](double r, const Params& q) { return phi2(r, q); });
  double sum = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    const double m2 = s.m[i] / std::sqrt(s.rho[i]) + dphi2[i];
    sum += m2 * m2;
  }
  return std::sqrt(sum * g.dx());
}

DeviationNorms deviation_norms(std::span<const double> rho, const Grid1D& g, const Params& p) {
  double near = 0.0;
  double far = 0.0;
  for (double r : rho) {
    const double d = std::abs(r - p.rho_bar);
    if (d <= 0.5 * p.rho_bar)
      near += d * d;
    else
      far += std::pow(d, p.gamma);
  }
  return {std::sqrt(near * g.dx()), std::pow(far * g.dx(), 1.0 / p.gamma)};
}

double gronwall_rate(double rho_min, double rho_max, const Params& p) {
  const double k = p.a * p.gamma;
  double rate = k / p.mu * std::max(std::pow(rho_min, p.gamma - p.alpha),
                                    std::pow(rho_max, p.gamma - p.alpha));
  if (p.n_reg.finite())
    rate += k * p.n_reg.inverse() *
            std::max(std::pow(rho_min, p.gamma - p.theta), std::pow(rho_max, p.gamma - p.theta));
  return rate;
}

double dissipation_rate(std::span<const double> rho, const Grid1D& g, const Params& p) {
  const auto ext = with_ghosts(rho, g, p.rho_bar);
  const double dx = g.dx();
  const auto faces_sum = [&](double beta) {
    double sum = 0.0;
    double prev = fast_pow(ext.front(), beta);
    for (std::size_t k = 1; k < ext.size(); ++k) {
      const double cur = fast_pow(ext[k], beta);
      const double d = (cur - prev) / dx;
      sum += d * d;
      prev = cur;
    }
    return sum * dx;
  };
  const double e_main = p.gamma + p.alpha - 1.0;
  double rate = 4.0 * p.a * p.gamma * p.mu / (e_main * e_main) * faces_sum(0.5 * e_main);
  if (p.n_reg.finite()) {
    const double e_reg = p.gamma + p.theta - 1.0;
    rate += 4.0 * p.a * p.gamma * p.n_reg.inverse() / (e_reg * e_reg) * faces_sum(0.5 * e_reg);
  }
  return rate;
}

DiagnosticsRecord make_record(const State& s, const Grid1D& g, const Params& p,
                              const DiagnosticsOptions& opts, double gronwall_rhs,
                              double dissipation) {
  check_density(s.rho, "make_record");
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = mass(s, g);

  const auto e = to_effective(s, g, p);
  const double dx = g.dx();
  double rhou = 0.0, rhov = 0.0, bd = 0.0, en = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    const double pot = pi_rel(s.rho[i], p);
    rhou += std::abs(s.m[i]);
    rhov += std::abs(e.w[i]);
    bd += 0.5 * e.w[i] * e.w[i] / s.rho[i] + pot;
    en += 0.5 * s.m[i] * s.m[i] / s.rho[i] + pot;
  }
  r.l1_rhou = rhou * dx;
  r.l1_rhov = rhov * dx;
  r.bd_entropy = bd * dx;
  r.energy = en * dx;
  r.tv_rho = total_variation(s.rho);
  const auto [mn, mx] = std::minmax_element(s.rho.begin(), s.rho.end());
  r.rho_min = *mn;
  r.rho_max = *mx;
  r.h1_phi1 = h1_phi1(s, g, p);
  r.jump_amp = jump_amplitude(s.rho, g, opts.jump_x0, opts.jump_window);
  r.gronwall_rhs = gronwall_rhs;
  r.dissipation_bd = dissipation;
  r.m2_l2 = opts.m2_norm ? m2_l2(s, g, p) : std::numeric_limits<double>::quiet_NaN();
  const auto dev = deviation_norms(s.rho, g, p);
  r.dev_l2_near = dev.l2_near;
  r.dev_lgamma_far = dev.lgamma_far;
  return r;
}

std::vector<double> restrict_by_two(std::span<const double> field) {
  std::vector<double> out(field.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (field[2 * i] + field[2 * i + 1]);
  return out;
}

GronwallReport gronwall_envelope(const Trajectory& traj, const Params& p, double tol) {
  GronwallReport out;
  const auto& snaps = traj.snapshots;
  if (snaps.empty()) return out;
  const auto& r0 = snaps.front().record;
  const double start = r0.l1_rhou + r0.l1_rhov;
  double integral = 0.0;
  double prev_rate = gronwall_rate(r0.rho_min, r0.rho_max, p);
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const auto& r = snaps[k].record;
    if (k > 0) {
      const double rate = gronwall_rate(r.rho_min, r.rho_max, p);
      integral += 0.5 * (prev_rate + rate) * (r.t - snaps[k - 1].record.t);
      prev_rate = rate;
    }
    const double env = start * std::exp(3.0 * integral);
    const double meas = r.l1_rhou + r.l1_rhov;
    out.envelope.push_back(env);
    out.measured.push_back(meas);
    if (env > 0.0) out.max_ratio = std::max(out.max_ratio, meas / env);
    if (meas > env * (1.0 + tol)) out.verdict = false;
  }
  return out;
}

DissipationReport dissipation_budget(const Trajectory& traj) {
  DissipationReport out;
  if (traj.snapshots.empty()) return out;
  const double bd0 = traj.snapshots.front().record.bd_entropy;
  out.max_residual = -std::numeric_limits<double>::infinity();
  for (const auto& snap : traj.snapshots) {
    const auto& r = snap.record;
    const double res = r.bd_entropy + r.dissipation_bd - bd0;
    out.dissipation.push_back(r.dissipation_bd);
    out.residual.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

EntropyReport entropy_decay(const Trajectory& traj, double tol) {
  EntropyReport out;
  if (traj.snapshots.empty()) return out;
  const double bd0 = traj.snapshots.front().record.bd_entropy;
  for (const auto& snap : traj.snapshots) {
    const double excess = snap.record.bd_entropy - bd0;
    if (excess <= 0.0) continue;
    const double rel = bd0 > 0.0 ? excess / bd0 : std::numeric_limits<double>::infinity();
    out.max_violation = std::max(out.max_violation, rel);
  }
  out.verdict = out.max_violation <= tol;
  return out;
}

}  // namespace bdflow
