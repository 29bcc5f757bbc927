#include "beachlab/hydro.hpp"

#include <algorithm>
#include <cmath>

namespace beachlab {

namespace {

Mat2 element_jacobian(const ElementGeometry& g, const std::array<int, 3>& tri, const std::vector<Vec2>& v) {
  Mat2 J = Mat2::Zero();
  for (int k = 0; k < 3; ++k) J += v[tri[k]] * g.grad.row(k);  // (Dv)_{ij} = d v_i / d x_j
  return J;
}

// int_e X . grad(lambda_i) for piecewise-constant X.
VecX divergence_load(const Mesh& m, const std::vector<ElementGeometry>& geo, const std::vector<Vec2>& X) {
  VecX F = VecX::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) F[m.triangles[t][k]] += geo[t].area * X[t].dot(geo[t].grad.row(k));
  return F;
}

std::vector<Vec2> outward_surface_normals(const CornerDomain& d) { return d.surface_normals(); }

}  // namespace

std::pair<BottomFrame, BottomFrame> bottom_edge_frames(const CornerDomain& d, const BoundaryEdge& e) {
  const Vec2 &a = d.mesh.vertices[e.a], &b = d.mesh.vertices[e.b];
  return {d.bottom->project(a + 1e-7 * (b - a)), d.bottom->project(b + 1e-7 * (a - b))};
}

VelocityField make_velocity(const CornerDomain& d, std::vector<Vec2> v) {
  VelocityField f;
  PatchRecovery rec(d.mesh);
  auto J = rec.jacobian(v);
  VecX lm = lumped_mass(d.mesh);
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += lm[i] * J[i].trace() * J[i].trace();
  f.divergence_residual = std::sqrt(s);
  for (int b : d.bottom_nodes)
    f.bottom_flux_residual = std::max(f.bottom_flux_residual, std::abs(v[b].dot(d.bottom->project(d.mesh.vertices[b]).normal)));
  f.v = std::move(v);
  return f;
}

PressureState solve_pressure(const CornerDomain& d, const std::vector<Vec2>& v, double g) {
  const Mesh& m = d.mesh;
  const int nv = m.num_vertices();
  if (static_cast<int>(v.size()) != nv) throw LabError(ErrorKind::InvalidInput, "velocity size mismatch");
  auto geo = element_geometry(m);
  MixedSolver S(d);

  VecX F = VecX::Zero(nv);
  for (int t = 0; t < m.num_triangles(); ++t) {
    Mat2 J = element_jacobian(geo[t], m.triangles[t], v);
    const double src = (J * J).trace();  // -Delta p
    for (int k : m.triangles[t]) F[k] += geo[t].area / 3.0 * src;
  }
  BoundaryDataTriple bd = BoundaryDataTriple::zeros(nv);
  bd.h_edges.assign(m.boundary.size(), {0.0, 0.0});
  for (size_t k = 0; k < m.boundary.size(); ++k) {
    const auto& e = m.boundary[k];
    if (e.tag != EdgeTag::Bottom) continue;
    auto [fa, fb] = bottom_edge_frames(d, e);
    // Gravity uses the chord normal, so a linear hydrostatic pressure is reproduced exactly.
    const Vec2 t = (m.vertices[e.b] - m.vertices[e.a]).normalized();
    const double chord_ny = -t.x();
    auto datum = [&](const BottomFrame& f, int vert) {
      const double u = v[vert].dot(f.tangent);
      return f.curvature * u * u - g * chord_ny;
    };
    bd.h_edges[k] = {datum(fa, e.a), datum(fb, e.b)};
  }
  F += bottom_load(m, bd, SpMat());

  PressureState ps;
  ps.p = S.solve_load(F, VecX::Zero(nv));
  ps.grad_p = element_gradients(m, geo, ps.p);
  ps.grad_p_nodal = PatchRecovery(m).gradient(ps.p);
  ps.a = -S.surface_flux(ps.p, F);
  ps.a_min = ps.a.minCoeff();
  return ps;
}

std::vector<double> taylor_corner(const CornerDomain& d, const std::vector<Vec2>& v, double g) {
  std::vector<double> out;
  for (size_t c = 0; c < d.contact_nodes.size(); ++c) {
    const int node = d.contact_nodes[c];
    const double nN = d.nu_dot_N(static_cast<int>(c));
    if (std::abs(nN) < 1e-8) throw LabError(ErrorKind::InvalidInput, "surface and bottom normals are orthogonal");
    // <nu, Dv v> = -kappa u^2 along B; a recovered Jacobian is too inaccurate at the corner.
    const BottomFrame fr = d.bottom->project(d.mesh.vertices[node]);
    const double u = v[node].dot(fr.tangent);
    out.push_back((g * fr.normal.y() - fr.curvature * u * u) / nN);
  }
  return out;
}

Cascade cascade(const CornerDomain& d, const std::vector<Vec2>& v, const PressureState& ps, double g,
                BetaGravity form) {
  const Mesh& m = d.mesh;
  const int nv = m.num_vertices();
  auto geo = element_geometry(m);
  PatchRecovery rec(m);
  MixedSolver S(d);
  const SpMat& M = S.mass();

  std::vector<Vec2> Z(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t)
    Z[t] = element_jacobian(geo[t], m.triangles[t], v).transpose() * ps.grad_p[t];

  auto Dv = rec.jacobian(v);
  auto H = rec.hessian(ps.p);
  VecX tr_hd(nv), src_beta(nv);
  for (int i = 0; i < nv; ++i) {
    tr_hd[i] = (Dv[i] * H[i]).trace();
    src_beta[i] = 4.0 * tr_hd[i] + 2.0 * (Dv[i] * Dv[i] * Dv[i]).trace();
  }

  VecX Fa = divergence_load(m, geo, Z) + M * tr_hd;

  BoundaryDataTriple bd = BoundaryDataTriple::zeros(nv);
  bd.h_edges.assign(m.boundary.size(), {0.0, 0.0});
  const double cg = form == BetaGravity::Consistent ? 3.0 : 1.0;
  for (size_t k = 0; k < m.boundary.size(); ++k) {
    const auto& e = m.boundary[k];
    if (e.tag != EdgeTag::Bottom) continue;
    auto [fa, fb] = bottom_edge_frames(d, e);
    auto datum = [&](const BottomFrame& f, int vert) {
      const double u = v[vert].dot(f.tangent);
      const double pt = ps.grad_p_nodal[vert].dot(f.tangent);
      return f.dcurvature * u * u * u - 3.0 * f.curvature * u * pt - cg * g * f.curvature * u * f.tangent.y();
    };
    bd.h_edges[k] = {datum(fa, e.a), datum(fb, e.b)};
  }
  Cascade c;
  c.beta_bottom_load = bottom_load(m, bd, SpMat());
  VecX Fb = -(M * src_beta) + c.beta_bottom_load;

  c.alpha = S.solve_load(Fa, VecX::Zero(nv));
  c.beta = S.solve_load(Fb, VecX::Zero(nv));
  // The alpha flux is <grad alpha - Z, N>, so the sum is <D_t grad p, N>.
  c.Dt_a = -(S.surface_flux(c.alpha, Fa) + S.surface_flux(c.beta, Fb));

  auto ga = rec.gradient(c.alpha), gb = rec.gradient(c.beta);
  c.Dt_grad_p.resize(nv);
  for (int i = 0; i < nv; ++i) c.Dt_grad_p[i] = -(Dv[i].transpose() * ps.grad_p_nodal[i]) + ga[i] + gb[i];
  auto N = outward_surface_normals(d);
  for (size_t i = 0; i < d.surface_nodes.size(); ++i) {
    Vec2& w = c.Dt_grad_p[d.surface_nodes[i]];
    w += (-c.Dt_a[i] - w.dot(N[i])) * N[i];
  }
  return c;
}

std::vector<Vec2> sample_elementwise(const Mesh& m, const std::function<Vec2(const Vec2&)>& f) {
  std::vector<Vec2> X(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    X[t] = f((m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0);
  }
  return X;
}

HodgeResult hodge_project(const CornerDomain& d, const std::vector<Vec2>& X) {
  const Mesh& m = d.mesh;
  if (static_cast<int>(X.size()) != m.num_triangles())
    throw LabError(ErrorKind::InvalidInput, "Hodge input must be elementwise");
  auto geo = element_geometry(m);
  MixedSolver S(d);
  HodgeResult r;
  r.phi = S.solve_load(divergence_load(m, geo, X), VecX::Zero(m.num_vertices()));
  r.grad_phi = element_gradients(m, geo, r.phi);
  r.w.resize(X.size());
  double ip = 0, nw = 0, ng = 0;
  for (size_t t = 0; t < X.size(); ++t) {
    r.w[t] = X[t] - r.grad_phi[t];
    ip += geo[t].area * r.w[t].dot(r.grad_phi[t]);
    nw += geo[t].area * r.w[t].squaredNorm();
    ng += geo[t].area * r.grad_phi[t].squaredNorm();
  }
  r.orthogonality_defect = (nw > 0 && ng > 0) ? std::abs(ip) / std::sqrt(nw * ng) : 0.0;
  return r;
}

DivCurlResult div_curl_solve(const CornerDomain& d, const VecX& g, const VecX& mu, const VecX& f_surface,
                             const std::function<double(const Vec2&, const Vec2&)>& h_bottom) {
  const Mesh& m = d.mesh;
  const int nv = m.num_vertices();
  const int ns = static_cast<int>(d.surface_nodes.size());
  if (g.size() != nv || mu.size() != nv || f_surface.size() != ns)
    throw LabError(ErrorKind::InvalidInput, "div-curl data have the wrong size");
  auto geo = element_geometry(m);
  PatchRecovery rec(m);
  NeumannSolver NS(d);
  MixedSolver DD(d, DirichletPart::WholeBoundary);
  SpMat M = assemble_mass(m);
  SpMat MS = assemble_edge_mass(m, EdgeTag::Surface);

  VecX FB = VecX::Zero(nv);
  double scale_b = 0.0;
  for (const auto& e : m.boundary) {
    if (e.tag != EdgeTag::Bottom) continue;
    const Vec2 &a = m.vertices[e.a], &b = m.vertices[e.b];
    const Vec2 t = (b - a).normalized();
    const Vec2 nu(t.y(), -t.x());
    const double len = (b - a).norm(), ha = h_bottom(a, nu), hb = h_bottom(b, nu);
    FB[e.a] += len * (2 * ha + hb) / 6;
    FB[e.b] += len * (ha + 2 * hb) / 6;
    scale_b += 0.5 * len * (std::abs(ha) + std::abs(hb));
  }
  const VecX Fg = -(M * g);

  DivCurlResult out;
  out.psi = DD.solve_load(-(M * mu), VecX::Zero(nv));
  auto gpsi = rec.gradient(out.psi);

  auto curve = d.surface_curve();
  auto kappa = curvature(curve);
  auto tang = d.surface_tangents();
  std::vector<double> arc(ns, 0.0);
  for (int i = 1; i < ns; ++i) arc[i] = arc[i - 1] + (curve[i] - curve[i - 1]).norm();
  const double total = arc.back();

  VecX vt = VecX::Zero(ns), wN_prev = VecX::Constant(ns, 1e300);
  std::vector<Vec2> v(nv);
  for (int it = 0; it < 50; ++it) {
    // d_tau (v.N) = f + kappa v_tau, integrated along S.
    VecX integrand(ns), W(ns);
    for (int i = 0; i < ns; ++i) integrand[i] = f_surface[i] + kappa[i] * vt[i];
    W[0] = 0.0;
    for (int i = 1; i < ns; ++i) W[i] = W[i - 1] + 0.5 * (integrand[i] + integrand[i - 1]) * (arc[i] - arc[i - 1]);
    VecX Wn = VecX::Zero(nv);
    for (int i = 0; i < ns; ++i) Wn[d.surface_nodes[i]] = W[i];
    const double C = -(Fg.sum() + (MS * Wn).sum() + FB.sum()) / total;
    for (int i = 0; i < ns; ++i) Wn[d.surface_nodes[i]] += C;
    const double scale = (M * g.cwiseAbs()).sum() + (MS * Wn.cwiseAbs()).sum() + scale_b;
    auto sol = NS.solve_load(Fg + MS * Wn + FB, scale);
    out.phi = sol.u;
    auto gphi = rec.gradient(out.phi);
    for (int i = 0; i < nv; ++i) v[i] = gphi[i] + Vec2(-gpsi[i].y(), gpsi[i].x());
    double change = 0.0;
    for (int i = 0; i < ns; ++i) {
      change = std::max(change, std::abs(Wn[d.surface_nodes[i]] - wN_prev[i]));
      wN_prev[i] = Wn[d.surface_nodes[i]];
      vt[i] = v[d.surface_nodes[i]].dot(tang[i]);
    }
    out.iterations = it + 1;
    if (change < 1e-12 * (1.0 + wN_prev.cwiseAbs().maxCoeff())) break;
  }
  auto ge = element_gradients(m, geo, out.phi);
  auto gs = element_gradients(m, geo, out.psi);
  out.v_elem.resize(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) out.v_elem[t] = ge[t] + Vec2(-gs[t].y(), gs[t].x());
  out.field = make_velocity(d, v);
  return out;
}

VecX discrete_curl(const CornerDomain& d, const std::vector<Vec2>& v_elem) {
  const Mesh& m = d.mesh;
  auto geo = element_geometry(m);
  VecX b = VecX::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      const Vec2 gl = geo[t].grad.row(k);
      b[m.triangles[t][k]] -= geo[t].area * v_elem[t].dot(Vec2(-gl.y(), gl.x()));
    }
  VecX lm = lumped_mass(m);
  auto tags = m.node_tags();
  VecX c = VecX::Zero(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i)
    if (tags[i] == NodeTag::Interior) c[i] = b[i] / lm[i];
  return c;
}

VorticityStep vorticity_step(const CornerDomain& d, const VecX& mu, const std::vector<Vec2>& v, double dt) {
  const Mesh& m = d.mesh;
  const int nv = m.num_vertices();
  VorticityStep out;
  if (dt == 0.0 || mu.size() == 0) { out.mu = mu; return out; }
  PointLocator loc(m);
  struct Departure { std::optional<PointLocator::Hit> hit; Vec2 x; };
  auto departures = [&](double h) {
    std::vector<Departure> dep(nv);
    for (int i = 0; i < nv; ++i) {
      const Vec2 x = m.vertices[i];
      const Vec2 mid = x - 0.5 * h * v[i];
      const Vec2 xd = x - h * loc.interpolate(v, mid);
      dep[i] = {loc.locate(xd), xd};
    }
    return dep;
  };
  auto fwd = departures(dt), bwd = departures(-dt);
  for (const auto& p : fwd) out.clamped += p.hit ? 0 : 1;
  auto advect = [&](const std::vector<Departure>& dep, const VecX& f, bool limit) {
    VecX r(nv);
    for (int i = 0; i < nv; ++i) {
      if (!dep[i].hit) { r[i] = f[loc.nearest_vertex(dep[i].x)]; continue; }
      const auto& tri = m.triangles[dep[i].hit->triangle];
      const auto& w = dep[i].hit->bary;
      r[i] = w[0] * f[tri[0]] + w[1] * f[tri[1]] + w[2] * f[tri[2]];
      if (limit) {
        double lo = std::min({mu[tri[0]], mu[tri[1]], mu[tri[2]]});
        double hi = std::max({mu[tri[0]], mu[tri[1]], mu[tri[2]]});
        r[i] = std::clamp(r[i], lo, hi);
      }
    }
    return r;
  };
  VecX there = advect(fwd, mu, false);
  VecX back = advect(bwd, there, false);
  VecX corrected = mu + 0.5 * (mu - back);
  out.mu = advect(fwd, corrected, true);
  return out;
}

}  // namespace beachlab
