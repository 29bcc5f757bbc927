#pragma once

// Pressure, Taylor coefficient, Hodge and div-curl solves, the alpha/beta cascade
// for the material derivative of the Taylor coefficient, and vorticity transport.

#include "beachlab/elliptic.hpp"
#include "beachlab/recovery.hpp"

#include <functional>
#include <vector>

namespace beachlab {

struct VelocityField {
  std::vector<Vec2> v;       // nodal
  double divergence_residual = 0.0;   // L2 norm of the nodal divergence
  double bottom_flux_residual = 0.0;  // max |<v, nu>| over bottom nodes
};

// Fills the two diagnostics of a nodal field.
VelocityField make_velocity(const CornerDomain& d, std::vector<Vec2> v);

struct PressureState {
  VecX p;                       // nodal, zero on S
  std::vector<Vec2> grad_p;     // elementwise
  std::vector<Vec2> grad_p_nodal;
  VecX a;                       // Taylor coefficient per surface node (surface_nodes order)
  double a_min = 0.0;
};

// Delta p = -tr((Dv)^2), p = 0 on S, d_nu p = kappa_B <v,tau>^2 - g nu_y on B.
PressureState solve_pressure(const CornerDomain& d, const std::vector<Vec2>& v, double g);

// a = (g nu_y - kappa_B u^2) / <nu, N> at each contact node, u = <v, tau_B>.
std::vector<double> taylor_corner(const CornerDomain& d, const std::vector<Vec2>& v, double g);

struct Cascade {
  VecX alpha, beta;               // nodal, zero on S
  std::vector<Vec2> Dt_grad_p;    // nodal
  VecX Dt_a;                      // per surface node
  VecX beta_bottom_load;          // assembled bottom Neumann load of beta
};

// Gravity term in the bottom datum of beta: the consistent derivation gives -3 g kappa u tau_y,
// the literal variant keeps a single -g kappa u tau_y (diagnostic only).
enum class BetaGravity { Consistent, Literal };

Cascade cascade(const CornerDomain& d, const std::vector<Vec2>& v, const PressureState& ps, double g,
                BetaGravity form = BetaGravity::Consistent);

struct HodgeResult {
  VecX phi;                     // nodal, zero on S
  std::vector<Vec2> grad_phi;   // elementwise
  std::vector<Vec2> w;          // elementwise, X - grad phi
  double orthogonality_defect = 0.0;  // |int w . grad phi| / (|w| |grad phi|)
};

// X = w + grad phi with phi = 0 on S and d_nu phi = <X, nu> on B; X given per element.
HodgeResult hodge_project(const CornerDomain& d, const std::vector<Vec2>& X);
std::vector<Vec2> sample_elementwise(const Mesh& m, const std::function<Vec2(const Vec2&)>& f);

struct DivCurlResult {
  VelocityField field;
  std::vector<Vec2> v_elem;  // elementwise grad phi + J grad psi
  VecX phi, psi;
  int iterations = 0;
};

// div v = g, curl v = mu, <v, nu> = h on B, <d_tau v, N> = f on S.
// h is evaluated at bottom edge endpoints with the edge's outward normal.
DivCurlResult div_curl_solve(const CornerDomain& d, const VecX& g, const VecX& mu, const VecX& f_surface,
                             const std::function<double(const Vec2& x, const Vec2& nu)>& h_bottom);

// Weak curl of an elementwise field at interior vertices (boundary vertices are 0).
VecX discrete_curl(const CornerDomain& d, const std::vector<Vec2>& v_elem);

struct VorticityStep {
  VecX mu;
  int clamped = 0;  // departure points that left the domain
};
// Semi-Lagrangian transport D_t mu = 0 with BFECC correction.
VorticityStep vorticity_step(const CornerDomain& d, const VecX& mu, const std::vector<Vec2>& v, double dt);

// Per-edge bottom frames evaluated just inside each endpoint (so polyline corners use the edge's own segment).
std::pair<BottomFrame, BottomFrame> bottom_edge_frames(const CornerDomain& d, const BoundaryEdge& e);

}  // namespace beachlab
