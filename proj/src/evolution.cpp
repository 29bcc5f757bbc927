#include "beachlab/evolution.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace beachlab {

namespace {

// Arclength derivative of nodal data on an open curve, second order everywhere.
VecX arclength_derivative(const std::vector<Vec2>& c, const VecX& f) {
  const int n = static_cast<int>(c.size());
  if (n < 3) throw LabError(ErrorKind::InvalidInput, "surface needs at least 3 nodes");
  std::vector<double> s(n, 0.0);
  for (int i = 1; i < n; ++i) s[i] = s[i - 1] + (c[i] - c[i - 1]).norm();
  VecX d(n);
  for (int i = 1; i + 1 < n; ++i) {
    const double h1 = s[i] - s[i - 1], h2 = s[i + 1] - s[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
  }
  double h1 = s[1] - s[0], h2 = s[2] - s[1];
  d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
  h1 = s[n - 2] - s[n - 3];
  h2 = s[n - 1] - s[n - 2];
  d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] + (2 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
  return d;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void validate(const SimulationConfig& c) {
  auto bad = [](const std::string& m) { throw LabError(ErrorKind::Config, m); };
  if (!(c.dt > 0)) bad("dt must be positive");
  if (!(c.T > 0)) bad("T must be positive");
  if (!(c.g > 0)) bad("gravity must be positive");
  if (!(c.monitors.a0 > 0)) bad("a0 must be positive");
  if (!(c.monitors.omega_min < c.monitors.omega_max)) bad("omega_min must be below omega_max");
  if (c.save_every < 1) bad("save_every must be at least 1");
  if (c.remesh_every < 1) bad("remesh_every must be at least 1");
  if (c.check_regularity) {
    auto r = validate_config(c.s, c.monitors.omega_max);
    if (!r.valid) bad("s is outside the admissible window: " + r.message);
  }
}

double potential_energy(const Mesh& m, double g) {
  double e = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    e += m.signed_area(t) * (m.vertices[tri[0]].y() + m.vertices[tri[1]].y() + m.vertices[tri[2]].y()) / 3.0;
  }
  return g * e;
}

double min_angle(const Mesh& m) {
  double best = kPi;
  for (const auto& tri : m.triangles)
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = m.vertices[tri[(k + 1) % 3]] - m.vertices[tri[k]];
      const Vec2 b = m.vertices[tri[(k + 2) % 3]] - m.vertices[tri[k]];
      best = std::min(best, std::atan2(std::abs(cross(a, b)), a.dot(b)));
    }
  return best;
}

Simulator::Simulator(const CornerDomain& rest, SimulationConfig cfg) : cfg_(cfg), motion_(rest) {
  if (!rest.graph) throw LabError(ErrorKind::InvalidInput, "the stepper needs a box or beach domain");
  rest_potential_ = potential_energy(rest.mesh, cfg_.g);
  rest_min_quality_ = min_angle(rest.mesh);
}

FlowState Simulator::initial_state(const VecX& eta, const VecX& psi) const {
  const int ns = static_cast<int>(rest().surface_nodes.size());
  if (eta.size() != ns) throw LabError(ErrorKind::InvalidInput, "eta has the wrong size");
  FlowState s;
  s.surface = *rest().graph;
  s.surface.eta = eta;
  s.psi = psi.size() == 0 ? VecX::Zero(ns) : psi;
  if (s.psi.size() != ns) throw LabError(ErrorKind::InvalidInput, "psi has the wrong size");
  s.mu = VecX::Zero(rest().mesh.num_vertices());
  return s;
}

StageEval Simulator::evaluate(const FlowState& s) const {
  StageEval e;
  e.domain = motion_.deform(s.surface);
  const CornerDomain& d = e.domain;
  const int ns = s.surface.size();
  MixedSolver S(d);
  auto data = BoundaryDataTriple::zeros(d.mesh.num_vertices());
  for (int i = 0; i < ns; ++i) data.f[d.surface_nodes[i]] = s.psi[i];
  e.phi = S.solve(data);
  const VecX wN = S.surface_flux(e.phi, S.load(data));

  const auto curve = d.surface_curve();
  const auto tau = d.surface_tangents();
  const auto N = d.surface_normals();
  const VecX psi_s = arclength_derivative(curve, s.psi);
  e.v_surface.resize(ns);
  e.eta_t.resize(ns);
  e.psi_t.resize(ns);
  for (int i = 0; i < ns; ++i) {
    const Vec2 v = psi_s[i] * tau[i] + wN[i] * N[i];
    const Vec2 chart = s.surface.chart_derivative(i);
    const double den = chart.dot(N[i]);
    if (std::abs(den) < 1e-8) throw LabError(ErrorKind::MonitorHalt, "collar chart is tangent to the surface");
    e.v_surface[i] = v;
    e.eta_t[i] = v.dot(N[i]) / den;
    e.psi_t[i] = -0.5 * v.squaredNorm() - cfg_.g * curve[i].y() + v.dot(chart) * e.eta_t[i];
  }
  e.kinetic = 0.5 * e.phi.dot(S.stiffness() * e.phi);
  e.potential = potential_energy(d.mesh, cfg_.g);
  return e;
}

std::vector<Vec2> Simulator::nodal_velocity(const StageEval& e) const {
  const CornerDomain& d = e.domain;
  auto v = PatchRecovery(d.mesh).gradient(e.phi);
  for (int b : d.bottom_nodes) {
    const Vec2 nu = d.bottom->project(d.mesh.vertices[b]).normal;
    v[b] -= v[b].dot(nu) * nu;
  }
  for (size_t i = 0; i < d.surface_nodes.size(); ++i) v[d.surface_nodes[i]] = e.v_surface[i];
  return v;
}

double Simulator::irrotational_defect(const StageEval& e) const {
  const Mesh& m = e.domain.mesh;
  return discrete_curl(e.domain, element_gradients(m, element_geometry(m), e.phi)).cwiseAbs().maxCoeff();
}

FlowState Simulator::step(const FlowState& s, double dt) const { return step(s, evaluate(s), dt); }

FlowState Simulator::step(const FlowState& s, const StageEval& k1, double dt) const {
  FlowState mid = s;
  mid.surface.eta = s.surface.eta + 0.5 * dt * k1.eta_t;
  mid.psi = s.psi + 0.5 * dt * k1.psi_t;
  StageEval k2 = evaluate(mid);
  FlowState out = s;
  out.t = s.t + dt;
  out.surface.eta = s.surface.eta + dt * k2.eta_t;
  out.psi = s.psi + dt * k2.psi_t;
  if (dt != 0.0 && s.mu.size() > 0 && s.mu.cwiseAbs().maxCoeff() > 0.0) {
    // Transport relative to the moving mesh.
    const CornerDomain next = motion_.deform(out.surface);
    auto v = nodal_velocity(k1);
    for (int i = 0; i < k1.domain.mesh.num_vertices(); ++i)
      v[i] -= (next.mesh.vertices[i] - k1.domain.mesh.vertices[i]) / dt;
    out.mu = vorticity_step(k1.domain, s.mu, v, dt).mu;
  }
  return out;
}

SurfaceSnapshot Simulator::snapshot(const FlowState& s) const { return snapshot(s, evaluate(s)); }

SurfaceSnapshot Simulator::snapshot(const FlowState& s, const StageEval& e) const {
  return make_snapshot(s.t, e.domain, nodal_velocity(e), s.mu, cfg_.g);
}

double RunResult::wave_energy_drift() const {
  if (flow_energy.empty()) return 0.0;
  const double wave = flow_energy.front() - rest_energy;
  double drift = 0.0;
  for (double e : flow_energy) drift = std::max(drift, std::abs(e - flow_energy.front()));
  return wave != 0.0 ? drift / std::abs(wave) : drift;
}

double RunResult::raw_energy_drift() const {
  if (flow_energy.empty()) return 0.0;
  double drift = 0.0;
  for (double e : flow_energy) drift = std::max(drift, std::abs(e - flow_energy.front()));
  return drift / std::max(std::abs(flow_energy.front()), std::numeric_limits<double>::min());
}

double RunResult::area_drift() const {
  if (area.empty()) return 0.0;
  double drift = 0.0;
  for (double a : area) drift = std::max(drift, std::abs(a - area.front()));
  return drift / area.front();
}

double RunResult::vorticity_sup() const {
  double v = 0.0;
  for (double x : vorticity) v = std::max(v, x);
  return v;
}

RunResult Simulator::run(const FlowState& initial) const {
  validate(cfg_);
  const int se = cfg_.save_every;
  const long nsteps = std::max(1L, std::lround(cfg_.T / cfg_.dt));
  RunResult r;
  r.rest_energy = rest_potential_;
  const double delta = rest().graph->ref->delta;

  std::map<long, SurfaceSnapshot> snaps;
  std::vector<long> pending;  // saved steps still waiting for an energy report
  auto needs_snapshot = [&](long n) {
    if (!cfg_.energy) return false;
    const long k = n % se;
    return n <= 2 || k == 0 || k == 1 || k == se - 1;
  };
  auto finish_report = [&](long k, bool allow_missing) {
    const SurfaceSnapshot& cur = snaps.at(k);
    Cascade c = cascade(cur.domain, cur.v, cur.pressure, cfg_.g);
    DtNOperator dtn(cur.domain);
    EnergyReport rep = assemble_energy(cur, c, cfg_.s, &dtn);
    const long a = k == 0 ? 0 : k - 1;
    if (snaps.count(a) && snaps.count(a + 1) && snaps.count(a + 2)) {
      rep.residual_norm = k == 0 ? quasilinear_residual_at(snaps.at(0), snaps.at(1), snaps.at(2), cfg_.s).residual
                                 : quasilinear_residual_at(snaps.at(a), cur, snaps.at(a + 2), cfg_.s, &dtn).residual;
    } else {
      if (!allow_missing) throw LabError(ErrorKind::InvalidInput, "internal: residual stencil missing");
      rep.residual_norm = std::numeric_limits<double>::quiet_NaN();
    }
    r.energy.push_back(rep);
  };
  auto halt = [&](long n, double t, const std::string& cause, const std::string& detail) {
    r.halt = MonitorEvent{t, static_cast<int>(n), cause, detail};
  };

  FlowState cur = initial;
  for (long n = 0; n <= nsteps + 1; ++n) {
    const bool diagnostic_only = n == nsteps + 1;
    if (diagnostic_only && pending.empty()) break;
    StageEval ev;
    try {
      ev = evaluate(cur);
    } catch (const LabError& e) {
      halt(n, cur.t, e.kind() == ErrorKind::MonitorHalt ? "collar_overflow" : "mesh_quality", e.what());
      break;
    }
    const auto angles = ev.domain.measured_contact_angles();
    if (!diagnostic_only) {
      r.times.push_back(cur.t);
      r.flow_energy.push_back(ev.kinetic + ev.potential);
      r.area.push_back(ev.domain.mesh.area());
      r.vorticity.push_back(std::max(cur.mu.size() ? cur.mu.cwiseAbs().maxCoeff() : 0.0, irrotational_defect(ev)));
      for (double w : angles)
        if (w < cfg_.monitors.omega_min || w > cfg_.monitors.omega_max) {
          halt(n, cur.t, "contact_angle", "measured angle " + fmt(w));
          break;
        }
      if (!r.halt && cur.surface.eta.cwiseAbs().maxCoeff() > delta)
        halt(n, cur.t, "collar_overflow", "max |eta| " + fmt(cur.surface.eta.cwiseAbs().maxCoeff()));
      if (!r.halt && n % cfg_.remesh_every == 0) {
        const double q = min_angle(ev.domain.mesh);
        if (q < 0.25 * rest_min_quality_) halt(n, cur.t, "mesh_quality", "minimum angle " + fmt(q));
      }
    }
    if (!r.halt && (needs_snapshot(n) || diagnostic_only)) {
      try {
        snaps.emplace(n, snapshot(cur, ev));
      } catch (const LabError& e) {
        halt(n, cur.t, "solver_failure", e.what());
      }
      if (!r.halt && !diagnostic_only && snaps.at(n).pressure.a_min < cfg_.monitors.a0)
        halt(n, cur.t, "taylor_condition", "a_min " + fmt(snaps.at(n).pressure.a_min));
    }
    if (!diagnostic_only && n % se == 0 && (!r.halt || r.halt->step == n)) {
      r.saved.push_back(cur);
      if (cfg_.energy && snaps.count(n)) pending.push_back(n);
    }
    // Reports whose residual stencil is complete.
    while (!pending.empty()) {
      const long k = pending.front();
      const long need = k == 0 ? 2 : k + 1;
      if (!snaps.count(need)) break;
      finish_report(k, false);
      pending.erase(pending.begin());
    }
    for (auto it = snaps.begin(); it != snaps.end();) {
      const bool keep = it->first >= n - 1 || (!pending.empty() && it->first >= pending.front() - 1) || it->first <= 2;
      it = keep ? std::next(it) : snaps.erase(it);
    }
    if (r.halt || diagnostic_only) break;
    if (n == nsteps && pending.empty()) break;
    try {
      cur = step(cur, ev, cfg_.dt);
    } catch (const LabError& e) {
      halt(n + 1, cur.t + cfg_.dt, e.kind() == ErrorKind::MonitorHalt ? "collar_overflow" : "mesh_quality", e.what());
      break;
    }
  }
  for (long k : pending) finish_report(k, true);

  std::vector<double> t, E;
  for (const auto& rep : r.energy) { t.push_back(rep.t); E.push_back(rep.E); }
  if (t.size() >= 2) r.gronwall = gronwall_check(t, E, !r.halt);
  else r.gronwall = GronwallResult{"skipped", -1, 0.0, 0.0, "fewer than two energy samples"};
  return r;
}

VecX mode_shape(const CornerDomain& rest, int k) {
  DtNOperator N(rest);
  if (k < 0 || k >= N.size()) throw LabError(ErrorKind::InvalidInput, "mode index out of range");
  VecX m = N.eigenvectors().col(k);
  return m / m.cwiseAbs().maxCoeff();
}

VecX eta_from_normal_displacement(const CornerDomain& rest, const VecX& zeta) {
  if (!rest.graph || zeta.size() != rest.graph->size()) throw LabError(ErrorKind::InvalidInput, "displacement has the wrong size");
  const auto N = rest.surface_normals();
  VecX eta(zeta.size());
  for (int i = 0; i < zeta.size(); ++i) eta[i] = zeta[i] / rest.graph->chart_derivative(i).dot(N[i]);
  return eta;
}

double zero_crossing_frequency(const std::vector<double>& t, const std::vector<double>& x) {
  std::vector<double> zc;
  for (size_t i = 1; i < x.size(); ++i)
    if ((x[i - 1] < 0) != (x[i] < 0)) zc.push_back(t[i - 1] + (t[i] - t[i - 1]) * x[i - 1] / (x[i - 1] - x[i]));
  if (zc.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const double half_period = (zc.back() - zc.front()) / static_cast<double>(zc.size() - 1);
  return kPi / half_period;
}

std::string state_to_json(const FlowState& s, const CornerDomain& d) {
  nlohmann::ordered_json j;
  j["t"] = s.t;
  j["eta"] = std::vector<double>(s.surface.eta.data(), s.surface.eta.data() + s.surface.eta.size());
  j["psi"] = std::vector<double>(s.psi.data(), s.psi.data() + s.psi.size());
  auto c = s.surface.curve();
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& p : c) pts.push_back({p.x(), p.y()});
  j["surface"] = pts;
  j["mu_max"] = s.mu.size() ? s.mu.cwiseAbs().maxCoeff() : 0.0;
  j["domain_kind"] = d.kind;
  return j.dump();
}

}  // namespace beachlab
