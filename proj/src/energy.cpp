#include "beachlab/energy.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace beachlab {

std::vector<Vec2> SurfaceSnapshot::surface_velocity() const {
  std::vector<Vec2> out;
  out.reserve(domain.surface_nodes.size());
  for (int s : domain.surface_nodes) out.push_back(v[s]);
  return out;
}

std::vector<Vec2> SurfaceSnapshot::surface_acceleration() const {
  auto N = domain.surface_normals();
  std::vector<Vec2> out(N.size());
  for (size_t i = 0; i < N.size(); ++i) out[i] = pressure.a[i] * N[i] - Vec2(0.0, g);
  return out;
}

SurfaceSnapshot make_snapshot(double t, CornerDomain d, std::vector<Vec2> v, VecX mu, double g) {
  SurfaceSnapshot s;
  s.t = t;
  s.g = g;
  s.pressure = solve_pressure(d, v, g);
  if (mu.size() == 0) mu = VecX::Zero(d.mesh.num_vertices());
  s.domain = std::move(d);
  s.v = std::move(v);
  s.mu = std::move(mu);
  return s;
}

double weighted_square_integral(const CornerDomain& d, const VecX& a, const VecX& w) {
  const auto c = d.surface_curve();
  double sum = 0.0;
  for (size_t i = 0; i + 1 < c.size(); ++i) {
    const double len = (c[i + 1] - c[i]).norm();
    const double a0 = a[i], a1 = a[i + 1], w0 = w[i], w1 = w[i + 1];
    sum += len * (a0 * (3 * w0 * w0 + 2 * w0 * w1 + w1 * w1) + a1 * (w0 * w0 + 2 * w0 * w1 + 3 * w1 * w1)) / 12.0;
  }
  return sum;
}

double volume_sobolev_norm_sq(const CornerDomain& d, const VecX& mu, double sigma) {
  if (mu.size() != d.mesh.num_vertices()) throw LabError(ErrorKind::InvalidInput, "vorticity size mismatch");
  if (mu.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  if (d.mesh.num_vertices() > tolerances().dense_eig_max)
    throw LabError(ErrorKind::SolverFailure, "mesh too large for the dense volume eigensolve");
  MatX A = MatX(assemble_stiffness(d.mesh)), M = MatX(assemble_mass(d.mesh));
  Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es(A, M);
  if (es.info() != Eigen::Success) throw LabError(ErrorKind::SolverFailure, "volume eigensolve failed");
  VecX c = es.eigenvectors().transpose() * (M * mu);
  double sum = 0.0;
  for (int k = 0; k < c.size(); ++k) sum += std::pow(1.0 + std::max(0.0, es.eigenvalues()[k]), sigma) * c[k] * c[k];
  return sum;
}

EnergyReport assemble_energy(const SurfaceSnapshot& snap, const Cascade& c, double s, const DtNOperator* dtn) {
  std::optional<DtNOperator> own;
  if (!dtn) { own.emplace(snap.domain); dtn = &*own; }
  const VecX& a = snap.pressure.a;
  EnergyReport r;
  r.t = snap.t;
  const double e1 = dtn->l2_norm(dtn->fractional_power(s - 1.5, c.Dt_a));
  r.E1 = e1 * e1;
  r.E2 = weighted_square_integral(snap.domain, a, dtn->fractional_power(s - 1.0, a));
  r.E3 = volume_sobolev_norm_sq(snap.domain, snap.mu, s - 1.0);
  r.E = r.E1 + r.E2 + r.E3;
  r.a_min = snap.pressure.a_min;
  r.taylor_violation = r.a_min <= 0.0;
  auto ang = snap.domain.measured_contact_angles();
  if (!ang.empty()) { r.omega_left = ang.front(); r.omega_right = ang.back(); }
  if (snap.domain.graph) r.neighborhood_distance = neighborhood_distance(*snap.domain.graph, s);
  return r;
}

double surface_interpolate(const CornerDomain& d, const VecX& f, const Vec2& x) {
  const auto c = d.surface_curve();
  const int n = static_cast<int>(c.size());
  if (n < 4 || f.size() != n) throw LabError(ErrorKind::InvalidInput, "surface interpolation needs 4 nodes");
  std::vector<double> arc(n, 0.0);
  for (int i = 1; i < n; ++i) arc[i] = arc[i - 1] + (c[i] - c[i - 1]).norm();
  double best = std::numeric_limits<double>::infinity(), s = 0.0;
  int seg = 0;
  for (int i = 0; i + 1 < n; ++i) {
    const Vec2 e = c[i + 1] - c[i];
    const double u = std::clamp((x - c[i]).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const double dist = (c[i] + u * e - x).squaredNorm();
    if (dist < best) { best = dist; seg = i; s = arc[i] + u * (arc[i + 1] - arc[i]); }
  }
  const int i0 = std::clamp(seg - 1, 0, n - 4);
  double val = 0.0;
  for (int j = i0; j < i0 + 4; ++j) {
    double w = 1.0;
    for (int k = i0; k < i0 + 4; ++k)
      if (k != j) w *= (s - arc[k]) / (arc[j] - arc[k]);
    val += w * f[j];
  }
  return val;
}

MaterialDerivatives material_fd(const SurfaceSnapshot& prev, const SurfaceSnapshot& cur, const SurfaceSnapshot& next,
                                const VecX& f_prev, const VecX& f_cur, const VecX& f_next) {
  const double h1 = cur.t - prev.t, h2 = next.t - cur.t;
  if (!(h1 > 0 && h2 > 0)) throw LabError(ErrorKind::InvalidInput, "snapshots must be in increasing time");
  const auto x = cur.domain.surface_curve();
  const auto v = cur.surface_velocity();
  const auto A = cur.surface_acceleration();
  const int n = static_cast<int>(x.size());
  MaterialDerivatives out{VecX(n), VecX(n)};
  for (int i = 0; i < n; ++i) {
    const double fm = surface_interpolate(prev.domain, f_prev, x[i] - h1 * v[i] + 0.5 * h1 * h1 * A[i]);
    const double fp = surface_interpolate(next.domain, f_next, x[i] + h2 * v[i] + 0.5 * h2 * h2 * A[i]);
    const double f0 = f_cur[i];
    out.first[i] = -h2 / (h1 * (h1 + h2)) * fm + (h2 - h1) / (h1 * h2) * f0 + h1 / (h2 * (h1 + h2)) * fp;
    out.second[i] = 2.0 * (fm / (h1 * (h1 + h2)) - f0 / (h1 * h2) + fp / (h2 * (h1 + h2)));
  }
  return out;
}

ResidualSample quasilinear_residual_at(const SurfaceSnapshot& prev, const SurfaceSnapshot& cur,
                                       const SurfaceSnapshot& next, double s, const DtNOperator* dtn) {
  std::optional<DtNOperator> own;
  if (!dtn) { own.emplace(cur.domain); dtn = &*own; }
  const VecX& a = cur.pressure.a;
  auto md = material_fd(prev, cur, next, prev.pressure.a, a, next.pressure.a);
  VecX aNa = a.cwiseProduct(dtn->apply(a));
  ResidualSample r;
  r.t = cur.t;
  r.residual = dtn->sobolev_norm(md.second + aNa, s - 1.5);
  r.principal = dtn->sobolev_norm(aNa, s - 1.5);
  return r;
}

std::vector<ResidualSample> quasilinear_residual(const std::vector<SurfaceSnapshot>& traj, double s) {
  if (traj.size() < 3) throw LabError(ErrorKind::InvalidInput, "the residual needs at least 3 states");
  std::vector<ResidualSample> out;
  for (size_t k = 1; k + 1 < traj.size(); ++k) out.push_back(quasilinear_residual_at(traj[k - 1], traj[k], traj[k + 1], s));
  return out;
}

GronwallResult gronwall_check(const std::vector<double>& t, const std::vector<double>& E, bool monitors_ok) {
  GronwallResult r;
  if (!monitors_ok) {
    r.status = "skipped";
    r.message = "a monitor was violated inside the window";
    return r;
  }
  if (t.size() != E.size() || t.size() < 2) throw LabError(ErrorKind::InvalidInput, "Gronwall check needs matching series of length >= 2");
  for (size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(E[k]) || !std::isfinite(t[k])) {
      r.status = "fail";
      r.message = "non-finite energy sample";
      return r;
    }
    if (k > 0 && !(t[k] > t[k - 1])) throw LabError(ErrorKind::InvalidInput, "times must increase");
  }
  const double scale = std::max(1.0, *std::max_element(E.begin(), E.end()));
  const double tol = 1e-12 * scale;
  const double span = t.back() - t.front();
  bool grows = false;
  for (double e : E) grows = grows || e > E[0] + tol;
  if (!grows) {
    r.status = "pass";
    r.degree = 0;
    r.blowup_time = std::numeric_limits<double>::infinity();
    r.message = "non-increasing series, F = 0";
    return r;
  }
  for (int d = 1; d <= 6; ++d) {
    double integral = 0.0, c = 0.0;
    bool finite = true;
    for (size_t k = 1; k < t.size(); ++k) {
      integral += 0.5 * (t[k] - t[k - 1]) * (std::pow(std::max(E[k], 0.0), d) + std::pow(std::max(E[k - 1], 0.0), d));
      const double rise = E[k] - E[0];
      if (rise <= tol) continue;
      if (integral <= 0.0) { finite = false; break; }
      c = std::max(c, rise / integral);
    }
    if (!finite) continue;
    const double y0 = std::max(E[0], 0.0);
    const double blowup = (d == 1 || y0 == 0.0) ? std::numeric_limits<double>::infinity()
                                                : std::pow(y0, 1.0 - d) / (c * (d - 1));
    if (blowup > span) {
      r.status = "pass";
      r.degree = d;
      r.coefficient = c;
      r.blowup_time = blowup;
      r.message = "envelope holds at every sample";
      return r;
    }
  }
  r.status = "fail";
  r.message = "no dictionary element bounds the series on the window";
  return r;
}

}  // namespace beachlab
