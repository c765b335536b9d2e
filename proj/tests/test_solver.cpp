#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bdflow/initdata.hpp"
#include "bdflow/manufactured.hpp"
#include "bdflow/solver.hpp"
#include "oracles.hpp"

using namespace bdflow;

namespace {

Grid1D grid(std::size_t cells, double lo, double hi, Boundary b = Boundary::FarField) {
  Grid1D g;
  g.x_min = lo;
  g.x_max = hi;
  g.cells = cells;
  g.boundary = b;
  return g;
}

State constant(const Grid1D& g, double rho, double u) {
  return State{std::vector<double>(g.cells, rho), std::vector<double>(g.cells, rho * u), 0.0};
}

// Smooth bump data with random amplitudes; vanishes near the edges.
State random_bump(const Grid1D& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double ar = 0.5 * u(rng), am = 0.3 * u(rng), c = 0.5 * u(rng);
  State s = constant(g, 1.0, 0.0);
  for (std::size_t i = 0; i < g.cells; ++i) {
    const double x = g.center(i);
    s.rho[i] = 1.0 + std::abs(ar) * std::exp(-(x - c) * (x - c));
    s.m[i] = am * (x - c) * std::exp(-(x - c) * (x - c));
  }
  return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("cfl_dt") {
  Params p;
  p.gamma = 2.0;
  SchemeConfig cfg;
  const Grid1D g = grid(1000, 0.0, 10.0);
  CHECK(cfl_dt(constant(g, 1.0, 0.0), g, p, cfg) == doctest::Approx(2e-5).epsilon(1e-12));

  // on a coarse grid the advective bound is active, so compare the two bounds separately
  const Grid1D g2 = grid(50, 0.0, 10.0);
  const Grid1D g4 = grid(25, 0.0, 10.0);
  const double adv2 = cfg.cfl_safety * g2.dx() / sound_speed(1.0, p);
  const double adv4 = cfg.cfl_safety * g4.dx() / sound_speed(1.0, p);
  CHECK(adv4 == doctest::Approx(2.0 * adv2));
  const Grid1D g1 = grid(500, 0.0, 10.0);
  CHECK(cfl_dt(constant(g1, 1.0, 0.0), g1, p, cfg) ==
        doctest::Approx(4.0 * cfl_dt(constant(g, 1.0, 0.0), g, p, cfg)));

  State bad = constant(g, 1.0, 0.0);
  bad.m[3] = std::nan("");
  CHECK_THROWS_AS(cfl_dt(bad, g, p, cfg), StateError);
  bad = constant(g, 1.0, 0.0);
  bad.rho[3] = -1.0;
  CHECK_THROWS_AS(cfl_dt(bad, g, p, cfg), StateError);
}

TEST_CASE("equilibrium is a fixed point") {
  Params p;
  const Grid1D g = grid(200, -5.0, 5.0);
  for (auto flux : {FluxKind::Rusanov, FluxKind::Upwind}) {
    SchemeConfig cfg;
    cfg.flux = flux;
    const State s = constant(g, 1.0, 0.0);
    const double dt = cfl_dt(s, g, p, cfg);
    const State out = step_primitive(s, dt, g, p, cfg);
    CHECK(max_diff(out.rho, s.rho) == 0.0);
    CHECK(max_diff(out.m, s.m) == 0.0);
    const EffectiveState e = to_effective(s, g, p);
    const EffectiveState eo = step_effective(e, dt, g, p, cfg);
    CHECK(max_diff(eo.rho, e.rho) == 0.0);
    CHECK(max_diff(eo.w, e.w) == 0.0);
  }
}

TEST_CASE("mirror symmetry") {
  Params p;
  p.gamma = 1.4;
  p.alpha = 0.8;
  const Grid1D g = grid(300, -6.0, 6.0);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const State s = random_bump(g, rng);
    State r = s;
    std::reverse(r.rho.begin(), r.rho.end());
    std::reverse(r.m.begin(), r.m.end());
    for (double& m : r.m) m = -m;
    SchemeConfig cfg;
    const double dt = cfl_dt(s, g, p, cfg);
    State a = step_primitive(s, dt, g, p, cfg);
    const State b = step_primitive(r, dt, g, p, cfg);
    std::reverse(a.rho.begin(), a.rho.end());
    std::reverse(a.m.begin(), a.m.end());
    for (double& m : a.m) m = -m;
    CHECK(max_diff(a.rho, b.rho) < 1e-14);
    CHECK(max_diff(a.m, b.m) < 1e-14);

    cfg.formulation = Formulation::Effective;
    EffectiveState ea = step_effective(to_effective(s, g, p), dt, g, p, cfg);
    const EffectiveState eb = step_effective(to_effective(r, g, p), dt, g, p, cfg);
    std::reverse(ea.rho.begin(), ea.rho.end());
    std::reverse(ea.w.begin(), ea.w.end());
    for (double& w : ea.w) w = -w;
    CHECK(max_diff(ea.rho, eb.rho) < 1e-14);
    CHECK(max_diff(ea.w, eb.w) < 1e-14);
  }
}

TEST_CASE("constant density with v = u = U is transported unchanged") {
  Params p;
  const Grid1D g = grid(128, 0.0, 2.0 * std::numbers::pi, Boundary::Periodic);
  SchemeConfig cfg;
  cfg.formulation = Formulation::Effective;
  EffectiveState e{std::vector<double>(g.cells, 1.3), std::vector<double>(g.cells, 1.3 * 0.7), 0.0};
  const EffectiveState start = e;
  EffectiveStepper stepper(g, p, cfg);
  for (int k = 0; k < 50; ++k) stepper.step(e, cfl_dt(e, g, p, cfg));
  CHECK(max_diff(e.rho, start.rho) < 1e-14);
  CHECK(max_diff(e.w, start.w) < 1e-14);
}

TEST_CASE("relaxation drives v towards the frozen u") {
  // the pressure constant a only enters through the relaxation rate, so a
  // vanishing a isolates the transport part of the step
  Params p;
  p.gamma = 1.6;
  Params frozen = p;
  frozen.a = 1e-300;
  const Grid1D g = grid(200, -5.0, 5.0);
  SchemeConfig cfg;
  cfg.formulation = Formulation::Effective;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const State s = random_bump(g, rng);
    const EffectiveState e = to_effective(s, g, p);
    const double dt = cfl_dt(e, g, p, cfg);
    const EffectiveState transported = step_effective(e, dt, g, frozen, cfg);
    const EffectiveState relaxed = step_effective(e, dt, g, p, cfg);
    const State prim = from_effective(e, g, p);
    for (std::size_t i = 0; i < g.cells; ++i) {
      const double u = prim.m[i] / prim.rho[i];
      const double r = relaxed.rho[i];
      CHECK(transported.rho[i] == r);
      CHECK(std::abs(relaxed.w[i] / r - u) <= std::abs(transported.w[i] / r - u) + 1e-15);
    }
  }
}

TEST_CASE("mass balance is exact") {
  Params p;
  p.alpha = 0.7;
  const Grid1D g = grid(200, -3.0, 3.0);
  std::mt19937_64 rng(23);
  for (auto f : {Formulation::Primitive, Formulation::Effective}) {
    SchemeConfig cfg;
    cfg.formulation = f;
    for (int trial = 0; trial < 4; ++trial) {
      const State s = random_bump(g, rng);
      const auto traj = run(s, 0.05, g, p, cfg, 0.01);
      CHECK(traj.status == RunStatus::Completed);
      CHECK(traj.mass_balance.max_step_rel_error < 1e-13);
      CHECK(traj.mass_balance.accumulated_rel_error < 1e-12);
    }
  }
}

TEST_CASE("manufactured sources match the residual of the equations") {
  Params p;
  p.gamma = 1.4;
  p.alpha = 0.8;
  p.n_reg = RegIndex(10);
  const ManufacturedSolution ms;
  const double h = 1e-4;
  for (double x : {0.1, 1.3, 2.9, 4.4}) {
    for (double t : {0.0, 0.07}) {
      auto rho = [&](double y, double s) { return ms.rho(y, s); };
      auto u = [&](double y, double s) { return ms.u(y, s); };
      const double rho_t = oracle::derivative([&](double s) { return rho(x, s); }, t, h);
      const double flux_x = oracle::derivative([&](double y) { return rho(y, t) * u(y, t); }, x, h);
      const double m_t =
          oracle::derivative([&](double s) { return rho(x, s) * u(x, s); }, t, h);
      auto momentum_flux = [&](double y) {
        const double r = rho(y, t);
        const double ux = oracle::derivative([&](double z) { return u(z, t); }, y, h);
        return r * u(y, t) * u(y, t) + pressure(r, p) - viscosity(r, p) * ux;
      };
      const double mflux_x = oracle::derivative(momentum_flux, x, h);
      const auto [s_rho, s_m] = ms.primitive_source(x, t, p);
      CHECK(s_rho == doctest::Approx(rho_t + flux_x).epsilon(1e-6));
      CHECK(s_m == doctest::Approx(m_t + mflux_x).epsilon(1e-6));

      // effective system: rho_t - (phi1(rho))_xx + (rho v)_x = S_rho,
      // (rho v)_t + (rho u v)_x + rate rho (v - u) = S_w
      auto w = [&](double y, double s) { return ms.effective_momentum(y, s, p); };
      const double phi1_xx = oracle::derivative(
          [&](double y) {
            return oracle::derivative([&](double z) { return phi1(rho(z, t), p); }, y, h);
          },
          x, h);
      const double w_x = oracle::derivative([&](double y) { return w(y, t); }, x, h);
      const double w_t = oracle::derivative([&](double s) { return w(x, s); }, t, h);
      const double uvr_x = oracle::derivative(
          [&](double y) { return u(y, t) * w(y, t); }, x, h);
      const double r = rho(x, t);
      const double relax = relaxation_rate(r, p) * (w(x, t) - r * u(x, t));
      const auto [e_rho, e_w] = ms.effective_source(x, t, p);
      CHECK(e_rho == doctest::Approx(rho_t - phi1_xx + w_x).epsilon(1e-5));
      CHECK(e_w == doctest::Approx(w_t + uvr_x + relax).epsilon(1e-5));
    }
  }
}

TEST_CASE("run") {
  Params p;
  const Grid1D g = grid(100, -5.0, 5.0);
  SchemeConfig cfg;

  SUBCASE("t_end = 0 gives one snapshot") {
    const auto traj = run(constant(g, 1.0, 0.0), 0.0, g, p, cfg, 0.1);
    REQUIRE(traj.snapshots.size() == 1);
    CHECK(traj.snapshots[0].record.t == 0.0);
    CHECK(traj.steps == 0);
  }
  SUBCASE("equilibrium stays put to t = 1") {
    const State s = constant(g, 1.0, 0.0);
    for (auto f : {Formulation::Primitive, Formulation::Effective}) {
      cfg.formulation = f;
      const auto traj = run(s, 1.0, g, p, cfg, 0.25);
      CHECK(traj.status == RunStatus::Completed);
      REQUIRE(traj.snapshots.size() == 5);
      for (const auto& snap : traj.snapshots) {
        CHECK(max_diff(snap.state.rho, s.rho) <= 1e-12);
        CHECK(max_diff(snap.state.m, s.m) <= 1e-12);
      }
      CHECK(traj.snapshots.back().record.t == 1.0);
    }
  }
  SUBCASE("snapshot times follow the cadence") {
    std::mt19937_64 rng(3);
    const auto traj = run(random_bump(g, rng), 0.013, g, p, cfg, 0.005);
    std::vector<double> times;
    for (const auto& s : traj.snapshots) times.push_back(s.record.t);
    REQUIRE(times.size() == 4);
    CHECK(times[0] == 0.0);
    CHECK(times[1] == doctest::Approx(0.005));
    CHECK(times[2] == doctest::Approx(0.010));
    CHECK(times[3] == 0.013);
    CHECK(traj.min_dt > 0.0);
  }
  SUBCASE("vacuum breach stops the run") {
    State s = constant(g, 1.0, 0.0);
    for (std::size_t i = 0; i < g.cells; ++i) s.m[i] = g.center(i) < 0.0 ? -2.0 : 2.0;
    cfg.vacuum_floor = 0.9;
    const auto traj = run(s, 1.0, g, p, cfg, 0.1);
    CHECK(traj.status == RunStatus::VacuumBreach);
    CHECK_FALSE(traj.message.empty());
    const auto& last = traj.snapshots.back().state;
    CHECK(*std::min_element(last.rho.begin(), last.rho.end()) >= 0.9);
    CHECK_THROWS_AS(step_primitive(last, cfl_dt(last, g, p, cfg), g, p, cfg), StateError);
  }
  SUBCASE("step budget") {
    std::mt19937_64 rng(4);
    cfg.max_steps = 3;
    const auto traj = run(random_bump(g, rng), 1.0, g, p, cfg, 0.1);
    CHECK(traj.status == RunStatus::StepBudgetExhausted);
    CHECK(traj.steps == 3);
  }
  SUBCASE("names round trip") {
    CHECK(formulation_from_string(to_string(Formulation::Effective)) == Formulation::Effective);
    CHECK(flux_from_string(to_string(FluxKind::Upwind)) == FluxKind::Upwind);
    CHECK_THROWS_AS(flux_from_string("roe"), ParameterError);
  }
}

TEST_CASE("theo1 run stays positive with finite steps") {
  ScenarioSpec spec = scenario_preset("theo1");
  Grid1D g;
  g.cells = 2560;  // dx = 1/64
  const auto built = build_scenario(spec, g);
  SchemeConfig cfg;
  const auto traj = run(built.state, 0.05, g, spec.params, cfg, 0.01);
  CHECK(traj.status == RunStatus::Completed);
  CHECK(traj.min_dt > 0.0);
  CHECK(std::isfinite(traj.min_dt));
  for (const auto& snap : traj.snapshots) CHECK(snap.record.rho_min > cfg.floor(spec.params));
}
