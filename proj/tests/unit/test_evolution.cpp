#include <doctest.h>

#include "beachlab/evolution.hpp"

#include <cmath>

using namespace beachlab;

namespace {

constexpr double g = 9.81;

SimulationConfig beach_config(double dt, double T) {
  SimulationConfig c;
  c.dt = dt;
  c.T = T;
  c.monitors.omega_max = 0.75;
  return c;
}

SurfaceSnapshot still_snapshot(const CornerDomain& d, double t) {
  return make_snapshot(t, d, std::vector<Vec2>(d.mesh.num_vertices(), Vec2::Zero()), VecX::Zero(d.mesh.num_vertices()), g);
}

}  // namespace

TEST_CASE("still water has zero energy and stays at rest") {
  auto beach = build_beach(kPi / 5, std::nullopt, 0.1);
  auto cfg = beach_config(1e-2, 0.1);
  cfg.save_every = 5;
  Simulator sim(beach, cfg);
  auto st0 = sim.initial_state(VecX::Zero(beach.surface_nodes.size()));
  auto r = sim.run(st0);
  REQUIRE_FALSE(r.halt);
  REQUIRE(r.energy.size() >= 2);
  for (const auto& e : r.energy) {
    CHECK(std::abs(e.E1) < 1e-10);
    CHECK(std::abs(e.E2) < 1e-10);
    CHECK(std::abs(e.E3) < 1e-10);
    CHECK(std::abs(e.residual_norm) < 1e-10);
    CHECK(e.a_min == doctest::Approx(g).epsilon(1e-9));
  }
  const auto& last = r.saved.back();
  CHECK(last.surface.eta.cwiseAbs().maxCoeff() < 1e-8 * g * cfg.dt);
  CHECK(last.psi.cwiseAbs().maxCoeff() < 1e-8 * g * cfg.dt);
  CHECK(r.gronwall.status == "pass");
  CHECK(r.gronwall.degree == 0);
}

TEST_CASE("a zero time step is the identity") {
  auto beach = build_beach(kPi / 5, std::nullopt, 0.1);
  Simulator sim(beach, beach_config(1e-2, 0.1));
  auto st = sim.initial_state(eta_from_normal_displacement(beach, 0.01 * mode_shape(beach, 1)));
  auto same = sim.step(st, 0.0);
  CHECK((same.surface.eta - st.surface.eta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((same.psi - st.psi).cwiseAbs().maxCoeff() == 0.0);
  CHECK(same.t == st.t);
}

TEST_CASE("energy is invariant under translation") {
  auto beach = build_beach(kPi / 5, std::nullopt, 0.1);
  Simulator sim(beach, beach_config(1e-2, 0.1));
  auto st = sim.initial_state(eta_from_normal_displacement(beach, 0.02 * mode_shape(beach, 1)));
  st = sim.step(st, 1e-2);
  auto snap = sim.snapshot(st);
  auto moved = make_snapshot(snap.t, translate(snap.domain, Vec2(3.7, -1.2)), snap.v, snap.mu, g);
  auto e1 = assemble_energy(snap, cascade(snap.domain, snap.v, snap.pressure, g), 2.5);
  auto e2 = assemble_energy(moved, cascade(moved.domain, moved.v, moved.pressure, g), 2.5);
  CHECK(e1.E > 0);
  CHECK(std::abs(e1.E - e2.E) < 1e-10 * e1.E);
  CHECK(std::abs(e1.E1 - e2.E1) < 1e-10 * e1.E1);
  CHECK(std::abs(e1.E2 - e2.E2) < 1e-10 * e1.E2);
}

TEST_CASE("vorticity energy at s = 2 is the H1 form") {
  auto box = build_box(1, 0.5, 0.125);
  VecX mu(box.mesh.num_vertices());
  for (int i = 0; i < mu.size(); ++i) mu[i] = std::sin(3 * box.mesh.vertices[i].x()) + box.mesh.vertices[i].y();
  const double ref = mu.dot(assemble_mass(box.mesh) * mu) + mu.dot(assemble_stiffness(box.mesh) * mu);
  CHECK(volume_sobolev_norm_sq(box, mu, 1.0) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(volume_sobolev_norm_sq(box, VecX::Zero(mu.size()), 1.0) == 0.0);
}

TEST_CASE("E2 dominates a_min times the fractional norm") {
  auto beach = build_beach(kPi / 5, std::nullopt, 0.1);
  DtNOperator N(beach);
  VecX a(N.size());
  for (int i = 0; i < a.size(); ++i) a[i] = 2.0 + std::cos(0.7 * i);
  const VecX w = N.fractional_power(1.5, a);
  const double lower = a.minCoeff() * std::pow(N.l2_norm(w), 2);
  CHECK(weighted_square_integral(beach, a, w) >= lower * (1 - 1e-12));
  // Constant weight reduces to the plain L2 norm.
  VecX one = VecX::Constant(a.size(), 1.0);
  CHECK(weighted_square_integral(beach, one, w) == doctest::Approx(std::pow(N.l2_norm(w), 2)).epsilon(1e-12));
}

TEST_CASE("gronwall classification") {
  std::vector<double> t, flat, grow, bad;
  for (int k = 0; k <= 10; ++k) {
    t.push_back(0.1 * k);
    flat.push_back(1.0);
    grow.push_back(1.0 + 0.5 * t.back());
    bad.push_back(k == 5 ? std::nan("") : 1.0);
  }
  auto r0 = gronwall_check(t, flat);
  CHECK(r0.status == "pass");
  CHECK(r0.degree == 0);
  auto r1 = gronwall_check(t, grow);
  CHECK(r1.status == "pass");
  CHECK(r1.degree == 1);
  CHECK(gronwall_check(t, bad).status == "fail");
  CHECK(gronwall_check(t, grow, false).status == "skipped");
}

TEST_CASE("material finite difference on analytic data") {
  auto box = build_box(1, 1, 0.1);
  auto s0 = still_snapshot(box, 0.9), s1 = still_snapshot(box, 1.0), s2 = still_snapshot(box, 1.2);
  const int n = static_cast<int>(box.surface_nodes.size());
  auto profile = [&](double t) {
    VecX f(n);
    const auto c = box.surface_curve();
    for (int i = 0; i < n; ++i) f[i] = (1 + c[i].x()) * (3 * t * t - t);
    return f;
  };
  auto md = material_fd(s0, s1, s2, profile(0.9), profile(1.0), profile(1.2));
  const auto c = box.surface_curve();
  for (int i = 0; i < n; ++i) {
    CHECK(md.first[i] == doctest::Approx((1 + c[i].x()) * 5.0).epsilon(1e-10));
    CHECK(md.second[i] == doctest::Approx((1 + c[i].x()) * 6.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(material_fd(s1, s0, s2, profile(0.9), profile(1.0), profile(1.2)), LabError);
}

TEST_CASE("time reversal error is third order") {
  auto box = build_box(1, 1, 0.1);
  SimulationConfig cfg;
  cfg.check_regularity = false;
  Simulator sim(box, cfg);
  auto st = sim.initial_state(eta_from_normal_displacement(box, 0.01 * mode_shape(box, 1)));
  double prev = 0;
  for (double dt : {4e-3, 2e-3}) {
    auto back = sim.step(sim.step(st, dt), -dt);
    const double err = (back.surface.eta - st.surface.eta).cwiseAbs().maxCoeff();
    if (prev > 0) CHECK(prev / err > 6.0);
    prev = err;
  }
}

TEST_CASE("box sloshing frequency matches the DtN eigenvalue") {
  auto box = build_box(1, 1, 0.1);
  SimulationConfig cfg;
  cfg.check_regularity = false;
  cfg.monitors.omega_max = kPi / 2 + 0.1;
  cfg.dt = 4e-3;
  cfg.T = 2.0;
  cfg.energy = false;
  cfg.save_every = 1000000;
  Simulator sim(box, cfg);
  auto r = sim.run(sim.initial_state(eta_from_normal_displacement(box, 1e-3 * mode_shape(box, 1))));
  REQUIRE_FALSE(r.halt);
  auto st = sim.initial_state(eta_from_normal_displacement(box, 1e-3 * mode_shape(box, 1)));
  std::vector<double> t, x;
  for (int k = 0; k <= 500; ++k) {
    t.push_back(st.t);
    x.push_back(st.surface.eta[0]);
    st = sim.step(st, cfg.dt);
  }
  DtNOperator N(box);
  const double w = zero_crossing_frequency(t, x);
  CHECK(w == doctest::Approx(std::sqrt(g * N.eigenvalues()[1])).epsilon(0.02));
  CHECK(r.wave_energy_drift() < 0.01);
  CHECK(r.area_drift() < 1e-3);
  CHECK(r.vorticity_sup() < 1e-6);
}

TEST_CASE("monitors halt runs") {
  auto beach = build_beach(kPi / 5, std::nullopt, 0.1);
  auto cfg = beach_config(1e-2, 0.1);
  cfg.monitors.a0 = 2 * g;
  Simulator sim(beach, cfg);
  auto r = sim.run(sim.initial_state(VecX::Zero(beach.surface_nodes.size())));
  REQUIRE(r.halt);
  CHECK(r.halt->cause == "taylor_condition");
  CHECK(r.gronwall.status != "pass");

  auto bad = beach_config(1e-2, 0.1);
  bad.monitors.omega_max = kPi / 2 - 0.05;  // s = 2.5 exceeds the regularity ceiling
  CHECK_THROWS_AS(Simulator(beach, bad).run(sim.initial_state(VecX::Zero(beach.surface_nodes.size()))), LabError);
  bad = beach_config(-1, 0.1);
  CHECK_THROWS_AS(validate(bad), LabError);
}

TEST_CASE("a uniform rise gives a smooth surface up to the contact points") {
  // Fourth differences of a smooth curve scale like h^4; a kink at the contact would not shrink.
  std::vector<double> d4;
  for (double h : {0.02, 0.01}) {
    auto beach = build_beach(kPi / 5, std::nullopt, h);
    auto g2 = *beach.graph;
    g2.eta = eta_from_normal_displacement(beach, VecX::Constant(beach.surface_nodes.size(), 0.02));
    const auto c = g2.curve();
    double worst = 0.0;
    for (size_t i = 2; i + 2 < c.size(); ++i)
      worst = std::max(worst, std::abs(c[i - 2].y() - 4 * c[i - 1].y() + 6 * c[i].y() - 4 * c[i + 1].y() + c[i + 2].y()));
    d4.push_back(worst);
    CHECK(g2.position(0).y() == doctest::Approx(beach.bottom->project(g2.position(0)).point.y()).epsilon(1e-12));
  }
  MESSAGE("max |d4 y|: ", d4[0], " -> ", d4[1]);
  CHECK(d4[1] < 0.25 * d4[0]);
}
