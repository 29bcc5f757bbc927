#include "beachlab/lab.hpp"

#include "beachlab/dtn.hpp"
#include "beachlab/elliptic.hpp"
#include "beachlab/hydro.hpp"
#include "beachlab/sector.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <future>
#include <set>
#include <sstream>

namespace beachlab::lab {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw LabError(ErrorKind::Config, field + ": " + msg);
}

// Schema helper: rejects unknown keys and checks value types.
class Reader {
 public:
  Reader(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "config" : path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) config_error(field(it.key()), "unknown field");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  double num(const std::string& k, std::optional<double> def = std::nullopt) const {
    if (!has(k)) {
      if (!def) config_error(field(k), "required");
      return *def;
    }
    if (!j_.at(k).is_number()) config_error(field(k), "expected a number");
    const double v = j_.at(k).get<double>();
    if (!std::isfinite(v)) config_error(field(k), "must be finite");
    return v;
  }
  double positive(const std::string& k, std::optional<double> def = std::nullopt) const {
    const double v = num(k, def);
    if (!(v > 0)) config_error(field(k), "must be positive");
    return v;
  }
  int integer(const std::string& k, std::optional<int> def = std::nullopt) const {
    if (!has(k)) {
      if (!def) config_error(field(k), "required");
      return *def;
    }
    if (!j_.at(k).is_number_integer()) config_error(field(k), "expected an integer");
    return j_.at(k).get<int>();
  }
  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) config_error(field(k), "expected true or false");
    return j_.at(k).get<bool>();
  }
  std::string str(const std::string& k, std::optional<std::string> def = std::nullopt) const {
    if (!has(k)) {
      if (!def) config_error(field(k), "required");
      return *def;
    }
    if (!j_.at(k).is_string()) config_error(field(k), "expected a string");
    return j_.at(k).get<std::string>();
  }
  std::vector<double> numbers(const std::string& k) const {
    if (!has(k)) config_error(field(k), "required");
    const json& a = j_.at(k);
    if (!a.is_array() || a.empty()) config_error(field(k), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : a) {
      if (!x.is_number()) config_error(field(k), "expected a non-empty array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  const json& sub(const std::string& k) const {
    if (!has(k)) config_error(field(k), "required");
    return j_.at(k);
  }
  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

 private:
  const json& j_;
  std::string path_;
};

std::string csv_join(const std::vector<std::string>& cols) {
  std::string s;
  for (size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s + "\n";
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

BoundaryPair parse_bc(const std::string& field, const std::string& s) {
  try {
    return parse_boundary_pair(s);
  } catch (const LabError&) {
    config_error(field, "expected one of dn, nn, dd");
  }
}

SectorProblem sector_problem_from_json(const json& j) {
  Reader r(j, "problem", {"omega", "bc", "k", "radius"});
  SectorProblem p;
  p.omega = r.positive("omega");
  p.bc = parse_bc("problem.bc", r.str("bc", "dn"));
  p.k = r.integer("k", 0);
  p.radius = r.positive("radius", 1.0);
  if (p.omega >= kPi) config_error("problem.omega", "must be below pi");
  if (p.k < 0) config_error("problem.k", "must be >= 0");
  return p;
}

// Velocity fields for the taylor subcommand.
std::vector<Vec2> velocity_from_json(const json& j, const CornerDomain& d) {
  Reader r(j, "velocity", {"type", "gradient", "mode", "amplitude"});
  const std::string type = r.str("type");
  const int nv = d.mesh.num_vertices();
  if (type == "rest") return std::vector<Vec2>(nv, Vec2::Zero());
  if (type == "linear") {
    const json& gj = r.sub("gradient");
    if (!gj.is_array() || gj.size() != 4) config_error("velocity.gradient", "expected [gxx, gxy, gyx, gyy]");
    Mat2 G;
    G << gj[0].get<double>(), gj[1].get<double>(), gj[2].get<double>(), gj[3].get<double>();
    std::vector<Vec2> v(nv);
    for (int i = 0; i < nv; ++i) v[i] = G * d.mesh.vertices[i];
    return v;
  }
  if (type == "potential_mode") {
    if (!d.graph) config_error("velocity.type", "potential_mode needs a box or beach domain");
    SimulationConfig c;
    c.check_regularity = false;
    Simulator sim(d, c);
    const VecX psi = r.num("amplitude", 0.1) * mode_shape(d, r.integer("mode", 1));
    auto st = sim.initial_state(VecX::Zero(d.surface_nodes.size()), psi);
    return sim.nodal_velocity(sim.evaluate(st));
  }
  config_error("velocity.type", "expected rest, linear or potential_mode");
}

struct SimulationSetup {
  CornerDomain rest;
  SimulationConfig cfg;
  VecX eta, psi;
};

SimulationSetup simulation_setup(const json& cfg) {
  Reader r(cfg, "", {"domain", "simulation", "initial", "description"});
  SimulationSetup s{domain_from_json(r.sub("domain")), simulation_from_json(r.has("simulation") ? r.sub("simulation") : json::object()), {}, {}};
  if (!s.rest.graph) config_error("domain.kind", "simulations need a box or beach domain");
  validate(s.cfg);
  std::tie(s.eta, s.psi) = initial_data_from_json(r.has("initial") ? r.sub("initial") : json::object(), s.rest);
  return s;
}

}  // namespace

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kConfigError;
    case ErrorKind::InvalidInput: return kInvalidInput;
    case ErrorKind::SolverFailure: return kSolverFailure;
    case ErrorKind::MonitorHalt: return kMonitorHalt;
    case ErrorKind::Io: return kIoError;
  }
  return kInternalError;
}

std::string error_json(const std::string& kind, const std::string& message, int code) {
  ojson j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  return j.dump() + "\n";
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CornerDomain domain_from_json(const json& j) {
  Reader kind_reader(j, "domain", {"kind", "width", "depth", "h", "delta", "omega", "length", "radius", "grading"});
  const std::string kind = kind_reader.str("kind");
  if (kind == "box") {
    Reader r(j, "domain", {"kind", "width", "depth", "h", "delta"});
    return build_box(r.positive("width", 1.0), r.positive("depth", 1.0), r.positive("h"), r.positive("delta", 0.1));
  }
  if (kind == "beach") {
    Reader r(j, "domain", {"kind", "omega", "h", "length", "delta"});
    BeachOptions o;
    o.length = r.positive("length", 2.0);
    o.delta = r.positive("delta", 0.1);
    const double om = r.positive("omega");
    if (om >= kPi / 2) config_error("domain.omega", "beach angles must be below pi/2");
    return build_beach(om, std::nullopt, r.positive("h"), o);
  }
  if (kind == "sector") {
    Reader r(j, "domain", {"kind", "omega", "h", "radius", "grading"});
    const double om = r.positive("omega");
    if (om >= kPi) config_error("domain.omega", "must be below pi");
    return build_sector(om, r.positive("radius", 1.0), r.positive("h"), r.positive("grading", 1.0));
  }
  config_error("domain.kind", "expected box, beach or sector");
}

SimulationConfig simulation_from_json(const json& j) {
  Reader r(j, "simulation", {"dt", "T", "g", "s", "monitors", "remesh_every", "save_every", "energy", "check_regularity"});
  SimulationConfig c;
  c.dt = r.num("dt", c.dt);
  c.T = r.num("T", c.T);
  c.g = r.num("g", c.g);
  c.s = r.num("s", c.s);
  c.remesh_every = r.integer("remesh_every", c.remesh_every);
  c.save_every = r.integer("save_every", c.save_every);
  c.energy = r.boolean("energy", c.energy);
  c.check_regularity = r.boolean("check_regularity", c.check_regularity);
  if (r.has("monitors")) {
    Reader m(r.sub("monitors"), "simulation.monitors", {"a0", "omega_min", "omega_max"});
    c.monitors.a0 = m.num("a0", c.monitors.a0);
    c.monitors.omega_min = m.num("omega_min", c.monitors.omega_min);
    c.monitors.omega_max = m.num("omega_max", c.monitors.omega_max);
  }
  validate(c);
  return c;
}

Tolerances tolerances_from_json(const json& j, Tolerances base) {
  Reader r(j, "tolerances", {"solver_rel", "root", "compat", "cg_threshold", "dense_eig_max"});
  base.solver_rel = r.positive("solver_rel", base.solver_rel);
  base.root = r.positive("root", base.root);
  base.compat = r.positive("compat", base.compat);
  base.cg_threshold = r.integer("cg_threshold", base.cg_threshold);
  base.dense_eig_max = r.positive("dense_eig_max", base.dense_eig_max);
  return base;
}

std::pair<VecX, VecX> initial_data_from_json(const json& j, const CornerDomain& rest) {
  Reader r(j, "initial", {"mode", "amplitude", "potential_amplitude"});
  const int n = static_cast<int>(rest.surface_nodes.size());
  const int k = r.integer("mode", 1);
  if (k < 1 || k >= n) config_error("initial.mode", "must be between 1 and the number of surface nodes - 1");
  const double A = r.num("amplitude", 0.0), B = r.num("potential_amplitude", 0.0);
  if (A == 0.0 && B == 0.0) return {VecX::Zero(n), VecX::Zero(n)};
  const VecX m = mode_shape(rest, k);
  return {eta_from_normal_displacement(rest, A * m), B * m};
}

ExponentsOptions exponents_from_json(const json& j) {
  Reader r(j, "", {"bc", "omegas", "count", "description"});
  ExponentsOptions o;
  if (r.has("bc")) {
    const json& b = r.sub("bc");
    o.bcs.clear();
    if (b.is_string()) o.bcs.push_back(b.get<std::string>());
    else if (b.is_array())
      for (const auto& x : b) {
        if (!x.is_string()) config_error("bc", "expected strings");
        o.bcs.push_back(x.get<std::string>());
      }
    else config_error("bc", "expected a string or an array of strings");
  }
  o.omegas = r.numbers("omegas");
  o.count = r.integer("count", o.count);
  return o;
}

Artifacts run_exponents(const ExponentsOptions& o, int jobs) {
  if (o.count < 1) config_error("count", "must be >= 1");
  for (const auto& b : o.bcs) parse_bc("bc", b);
  for (double om : o.omegas)
    if (!(om > 0 && om < kPi)) config_error("omegas", "angles must lie in (0, pi)");
  struct Task {
    BoundaryPair bc;
    double omega;
  };
  std::vector<Task> tasks;
  for (const auto& b : o.bcs)
    for (double om : o.omegas) tasks.push_back({parse_boundary_pair(b), om});

  auto work = [&](const Task& t) {
    const auto formula = singular_exponents(t.bc, t.omega, o.count);
    auto num = pencil_exponents_numeric(OperatorPencil{t.omega, Mat2::Identity(), t.bc}, 0.0, formula.back() + 0.1);
    if (!num.failures.empty()) throw LabError(ErrorKind::SolverFailure, "pencil root search: " + num.failures.front());
    if (num.roots.size() != formula.size())
      throw LabError(ErrorKind::SolverFailure, "pencil root search found " + std::to_string(num.roots.size()) +
                                                   " roots, expected " + std::to_string(formula.size()));
    std::string rows;
    const int k0 = t.bc == BoundaryPair::DirichletNeumann ? 0 : 1;
    for (size_t k = 0; k < formula.size(); ++k)
      rows += csv_join({to_string(t.bc), fmt(t.omega), std::to_string(k0 + static_cast<int>(k)), fmt(formula[k]),
                        fmt(num.roots[k]), fmt(std::abs(formula[k] - num.roots[k]))});
    return rows;
  };
  // Fixed output order regardless of the worker count.
  std::vector<std::string> rows(tasks.size());
  const size_t w = static_cast<size_t>(std::max(1, jobs));
  for (size_t start = 0; start < tasks.size(); start += w) {
    std::vector<std::future<std::string>> fut;
    for (size_t i = start; i < std::min(tasks.size(), start + w); ++i)
      fut.push_back(std::async(w == 1 ? std::launch::deferred : std::launch::async, work, tasks[i]));
    for (size_t i = 0; i < fut.size(); ++i) rows[start + i] = fut[i].get();
  }
  std::string csv = csv_join({"bc", "omega", "k", "lambda_formula", "lambda_numeric", "abs_diff"});
  for (const auto& r : rows) csv += r;
  return {{"exponents.csv", csv}};
}

Artifacts run_solve(const json& cfg) {
  Reader r(cfg, "", {"problem", "h", "grading", "description"});
  const SectorProblem p = sector_problem_from_json(r.sub("problem"));
  if (p.bc == BoundaryPair::NeumannNeumann) config_error("problem.bc", "solve supports dn and dd");
  auto d = build_sector(p.omega, p.radius, r.positive("h"), r.positive("grading", 1.0));
  auto sf = singular_function(p.bc, p.omega, p.bc == BoundaryPair::DirichletNeumann ? p.k : std::max(1, p.k));
  const int nv = d.mesh.num_vertices();
  auto data = BoundaryDataTriple::zeros(nv);
  for (int v = 0; v < nv; ++v) data.f[v] = sf.value(d.mesh.vertices[v]);
  MixedSolver S(d, p.bc == BoundaryPair::DirichletNeumann ? DirichletPart::SurfaceAndArc : DirichletPart::WholeBoundary);
  const VecX u = S.solve(data);
  auto err = p1_errors(d.mesh, u, [&](const Vec2& x) { return sf.value(x); }, [&](const Vec2& x) { return sf.gradient(x); },
                       Vec2::Zero());

  ojson out;
  out["exact"] = sf.description();
  out["lambda"] = sf.lambda;
  out["L2_error"] = err.l2;
  out["H1_error"] = err.h1;
  out["galerkin_residual"] = S.galerkin_residual(u, S.load(data));
  ojson field = ojson::object();
  for (int v = 0; v < nv; ++v) field[std::to_string(v)] = u[v];
  out["u"] = field;
  return {{"solution.json", dump(out)}, {"domain.json", domain_to_json(d) + "\n"}};
}

Artifacts run_convergence(const json& cfg) {
  Reader r(cfg, "", {"problem", "hs", "grading", "description"});
  const SectorProblem p = sector_problem_from_json(r.sub("problem"));
  auto st = convergence_study(p, r.numbers("hs"), r.positive("grading", 1.0));
  std::string csv = csv_join({"h", "L2_error", "H1_error", "order_L2", "order_H1"});
  for (size_t i = 0; i < st.h.size(); ++i)
    csv += csv_join({fmt(st.h[i]), fmt(st.l2[i]), fmt(st.h1[i]), i ? fmt(st.order_l2[i - 1]) : "",
                     i ? fmt(st.order_h1[i - 1]) : ""});
  ojson s;
  s["mean_order_L2"] = st.mean_order_l2();
  s["mean_order_H1"] = st.mean_order_h1();
  s["valid"] = st.valid;
  s["message"] = st.message;
  s["regularity_threshold"] = regularity_threshold(p.bc, p.omega);
  return {{"convergence.csv", csv}, {"convergence_summary.json", dump(s)}};
}

Artifacts run_dtn(const json& cfg) {
  Reader r(cfg, "", {"domain", "count", "write_matrix", "description"});
  const json& dj = r.sub("domain");
  auto d = domain_from_json(dj);
  if (d.kind == "sector") config_error("domain.kind", "dtn needs a box or beach domain");
  DtNOperator N(d);
  const int count = std::min(N.size(), r.integer("count", N.size()));
  const bool box = d.kind == "box";
  const double width = box ? dj.value("width", 1.0) : 0.0, depth = box ? dj.value("depth", 1.0) : 0.0;

  std::string csv = csv_join({"k", "lambda", "oracle_lambda_if_box", "rel_err"});
  for (int k = 0; k < count; ++k) {
    const double lam = N.eigenvalues()[k];
    std::string oracle, rel;
    if (box) {
      const double o = box_dtn_eigenvalue(k, width, depth);
      oracle = fmt(o);
      rel = k == 0 ? fmt(std::abs(lam)) : fmt(std::abs(lam - o) / o);
    }
    csv += csv_join({std::to_string(k), fmt(lam), oracle, rel});
  }
  ojson s;
  s["surface_nodes"] = N.size();
  s["self_adjoint_defect"] = N.self_adjoint_defect();
  s["constant_kernel"] = N.apply(VecX::Ones(N.size())).cwiseAbs().maxCoeff();
  s["min_eigenvalue"] = N.eigenvalues().minCoeff();
  s["orthonormality_error"] = N.orthonormality_error();
  Artifacts out{{"dtn.csv", csv}, {"dtn_summary.json", dump(s)}};
  if (r.boolean("write_matrix", false)) {
    const MatX K = 0.5 * (N.stiffness() + N.stiffness().transpose());
    std::string bin(static_cast<size_t>(K.size()) * sizeof(double), '\0');
    size_t pos = 0;
    for (int i = 0; i < K.rows(); ++i)
      for (int j = 0; j < K.cols(); ++j, pos += sizeof(double)) {
        const double x = K(i, j);
        std::memcpy(&bin[pos], &x, sizeof x);
      }
    ojson side;
    side["rows"] = K.rows();
    side["cols"] = K.cols();
    side["dtype"] = "float64";
    side["byte_order"] = "native";
    side["layout"] = "row-major";
    side["matrix"] = "symmetric weak form K; N = M^{-1} K with M the surface mass";
    out.push_back({"dtn_matrix.bin", bin});
    out.push_back({"dtn_matrix.json", dump(side)});
  }
  return out;
}

Artifacts run_taylor(const json& cfg) {
  Reader r(cfg, "", {"domain", "velocity", "g", "description"});
  auto d = domain_from_json(r.sub("domain"));
  const double g = r.num("g", 9.81);
  auto v = velocity_from_json(r.has("velocity") ? r.sub("velocity") : json{{"type", "rest"}}, d);
  auto ps = solve_pressure(d, v, g);
  const auto c = d.surface_curve();
  std::string csv = csv_join({"node", "x", "y", "a"});
  for (size_t i = 0; i < c.size(); ++i)
    csv += csv_join({std::to_string(d.surface_nodes[i]), fmt(c[i].x()), fmt(c[i].y()), fmt(ps.a[i])});
  std::string corners = csv_join({"contact", "x", "y", "a_field", "a_corner_formula", "rel_diff"});
  std::vector<double> tc;
  try {
    tc = taylor_corner(d, v, g);
  } catch (const LabError&) {
    // Right-angle corners: the formula is singular, only the field value is reported.
  }
  for (size_t k = 0; k < d.contact_nodes.size(); ++k) {
    const double field = k == 0 ? ps.a[0] : ps.a[ps.a.size() - 1];
    const Vec2 x = d.mesh.vertices[d.contact_nodes[k]];
    std::string formula, rel;
    if (k < tc.size()) {
      formula = fmt(tc[k]);
      rel = fmt(std::abs(field - tc[k]) / std::abs(tc[k]));
    }
    corners += csv_join({std::to_string(k), fmt(x.x()), fmt(x.y()), fmt(field), formula, rel});
  }
  return {{"taylor.csv", csv}, {"taylor_corners.csv", corners}};
}

std::string energy_csv(const RunResult& r, bool with_tolerance) {
  std::vector<std::string> cols{"t", "E1", "E2", "E3", "E", "a_min", "omega_left", "omega_right", "neighborhood_distance",
                                "residual_norm"};
  if (with_tolerance) cols.push_back("tolerance");
  std::string csv = csv_join(cols);
  for (const auto& e : r.energy) {
    std::vector<std::string> row{fmt(e.t), fmt(e.E1), fmt(e.E2), fmt(e.E3), fmt(e.E), fmt(e.a_min),
                                 fmt(e.omega_left), fmt(e.omega_right), fmt(e.neighborhood_distance), fmt(e.residual_norm)};
    if (with_tolerance) row.push_back(fmt(1e-10));
    csv += csv_join(row);
  }
  return csv;
}

json run_summary(const RunResult& r) {
  json s;
  s["steps"] = r.times.empty() ? 0 : static_cast<int>(r.times.size()) - 1;
  s["t_end"] = r.times.empty() ? 0.0 : r.times.back();
  s["wave_energy_drift"] = r.wave_energy_drift();
  s["raw_energy_drift"] = r.raw_energy_drift();
  s["area_drift"] = r.area_drift();
  s["vorticity_sup"] = r.vorticity_sup();
  s["gronwall"] = {{"status", r.gronwall.status},
                   {"degree", r.gronwall.degree},
                   {"coefficient", r.gronwall.coefficient},
                   {"blowup_time", std::isfinite(r.gronwall.blowup_time) ? json(r.gronwall.blowup_time) : json("inf")},
                   {"message", r.gronwall.message}};
  if (r.halt)
    s["halt"] = {{"t", r.halt->t}, {"step", r.halt->step}, {"cause", r.halt->cause}, {"detail", r.halt->detail}};
  else
    s["halt"] = nullptr;
  return s;
}

RunOutput run_energy(const json& cfg) {
  auto s = simulation_setup(cfg);
  s.cfg.energy = true;
  Simulator sim(s.rest, s.cfg);
  auto r = sim.run(sim.initial_state(s.eta, s.psi));
  return {{{"energy.csv", energy_csv(r, false)}, {"energy_summary.json", run_summary(r).dump(2) + "\n"}}, r.halt};
}

RunOutput run_simulate(const json& cfg) {
  auto s = simulation_setup(cfg);
  Simulator sim(s.rest, s.cfg);
  auto r = sim.run(sim.initial_state(s.eta, s.psi));
  RunOutput out;
  for (size_t k = 0; k < r.saved.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "states/state_%06zu.json", k);
    out.files.push_back({name, state_to_json(r.saved[k], s.rest) + "\n"});
  }
  out.files.push_back({"energy.csv", energy_csv(r, true)});
  std::string series = csv_join({"t", "flow_energy", "area", "vorticity"});
  for (size_t k = 0; k < r.times.size(); ++k)
    series += csv_join({fmt(r.times[k]), fmt(r.flow_energy[k]), fmt(r.area[k]), fmt(r.vorticity[k])});
  out.files.push_back({"monitor.csv", series});
  out.files.push_back({"run_summary.json", run_summary(r).dump(2) + "\n"});
  out.halt = r.halt;
  return out;
}

}  // namespace beachlab::lab
