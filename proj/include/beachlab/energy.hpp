#pragma once

// Energy functional, quasilinear residual and Gronwall envelope.

#include "beachlab/dtn.hpp"
#include "beachlab/hydro.hpp"

#include <string>
#include <vector>

namespace beachlab {

// Everything the energy needs from one instant: the deformed domain, nodal velocity,
// vorticity and the pressure solve.
struct SurfaceSnapshot {
  double t = 0.0;
  double g = 9.81;
  CornerDomain domain;
  std::vector<Vec2> v;
  VecX mu;
  PressureState pressure;

  std::vector<Vec2> surface_velocity() const;
  // D_t v = -grad p - g e_y = a N - g e_y on S.
  std::vector<Vec2> surface_acceleration() const;
};

SurfaceSnapshot make_snapshot(double t, CornerDomain d, std::vector<Vec2> v, VecX mu, double g);

struct EnergyReport {
  double t = 0.0;
  double E1 = 0.0, E2 = 0.0, E3 = 0.0, E = 0.0;
  double a_min = 0.0;
  double omega_left = 0.0, omega_right = 0.0;
  double neighborhood_distance = 0.0;
  double residual_norm = 0.0;
  bool taylor_violation = false;  // a_min <= 0; E2 is still reported
};

// E1 = |N^{s-3/2} D_t a|^2, E2 = int a |N^{s-1} a|^2, E3 = |mu|^2 in the spectral H^{s-1}(Omega) norm.
// Pass `dtn` to reuse a decomposition of the same domain.
EnergyReport assemble_energy(const SurfaceSnapshot& snap, const Cascade& c, double s,
                             const DtNOperator* dtn = nullptr);

// int_S a w^2 dS for piecewise linear a and w (exact on each edge).
double weighted_square_integral(const CornerDomain& d, const VecX& a, const VecX& w);

// sum_k (1 + lambda_k)^sigma <mu, e_k>^2 over the Neumann Laplacian eigenpairs of the mesh.
double volume_sobolev_norm_sq(const CornerDomain& d, const VecX& mu, double sigma);

// Material derivatives of a surface field along particle paths, from three snapshots.
// Particles at the middle snapshot are pushed to the neighbours by a second-order Taylor step
// and the field is read there by cubic interpolation in arclength.
struct MaterialDerivatives {
  VecX first, second;
};
MaterialDerivatives material_fd(const SurfaceSnapshot& prev, const SurfaceSnapshot& cur, const SurfaceSnapshot& next,
                                const VecX& f_prev, const VecX& f_cur, const VecX& f_next);

// Reads a surface field at x, projecting onto the surface polyline of d.
double surface_interpolate(const CornerDomain& d, const VecX& f, const Vec2& x);

struct ResidualSample {
  double t = 0.0;
  double residual = 0.0;   // |D_t^2 a + a N a| in the discrete H^{s-3/2}(S) norm
  double principal = 0.0;  // |a N a| in the same norm
};
ResidualSample quasilinear_residual_at(const SurfaceSnapshot& prev, const SurfaceSnapshot& cur,
                                       const SurfaceSnapshot& next, double s, const DtNOperator* dtn = nullptr);
// One sample per interior element of a trajectory of consecutive snapshots.
std::vector<ResidualSample> quasilinear_residual(const std::vector<SurfaceSnapshot>& traj, double s);

struct GronwallResult {
  std::string status;  // "pass", "fail" or "skipped"
  int degree = -1;     // F(E) = c E^degree; 0 means F = 0
  double coefficient = 0.0;
  double blowup_time = 0.0;  // of the comparison ODE y' = F(y), infinite when degree <= 1
  std::string message;
};

// Looks for the lowest degree d in 0..6 such that E(t) <= E(0) + int_0^t c E^d holds at every
// sample with a comparison ODE that stays finite on the window.
GronwallResult gronwall_check(const std::vector<double>& t, const std::vector<double>& E, bool monitors_ok = true);

}  // namespace beachlab
