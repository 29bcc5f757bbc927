#pragma once

// Mixed Laplace problems  Delta u = g,  u = f on S,  d_nu u = h on B.

#include "beachlab/fem.hpp"
#include "beachlab/geometry.hpp"
#include "beachlab/sector.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace beachlab {

// All three fields are per vertex; f is read on Dirichlet nodes, h on bottom edges, g everywhere.
struct BoundaryDataTriple {
  VecX f, g, h;
  // Optional per-edge endpoint values of h (aligned with mesh.boundary); used instead of h
  // when non-empty, so the data may jump at bottom corners.
  std::vector<std::array<double, 2>> h_edges;
  static BoundaryDataTriple zeros(int nv);
};

enum class DirichletPart { SurfaceAndArc, WholeBoundary };

class MixedSolver {
 public:
  explicit MixedSolver(const CornerDomain& d, DirichletPart part = DirichletPart::SurfaceAndArc);
  VecX solve(const BoundaryDataTriple& data) const;
  // Solve with an already assembled load and Dirichlet values (read on fixed nodes).
  VecX solve_load(const VecX& load, const VecX& fixed_values) const;
  // Load vector F = -M g + M_B h of the weak form  a(u, psi) = F(psi).
  VecX load(const BoundaryDataTriple& data) const;
  // Weak normal derivative d_N u at surface nodes (ordered as surface_nodes), from r = A u - F.
  VecX surface_flux(const VecX& u, const VecX& load) const;
  // Largest residual of the weak form over free test functions, relative to |F|.
  double galerkin_residual(const VecX& u, const VecX& load) const;
  const std::vector<char>& dirichlet_mask() const { return fixed_; }
  const SpMat& stiffness() const { return A_; }
  const SpMat& mass() const { return M_; }
  const CornerDomain& domain() const { return *d_; }

 private:
  std::shared_ptr<const CornerDomain> d_;
  SpMat A_, M_, MB_;
  std::vector<char> fixed_;
  std::shared_ptr<ConstrainedSolver> solver_;
  struct SurfaceMass;
  std::shared_ptr<SurfaceMass> ms_;
};

VecX solve_mixed(const CornerDomain& d, const BoundaryDataTriple& data);
VecX harmonic_extension(const CornerDomain& d, const VecX& f);
VecX bottom_load(const Mesh& m, const BoundaryDataTriple& data, const SpMat& bottom_mass);

// Zero Dirichlet data on S (and Arc), source g, bottom flux h.
VecX poisson_dirichlet(const CornerDomain& d, const VecX& g, const VecX& h);
// Dirichlet data f on the whole boundary.
VecX solve_dirichlet_dirichlet(const CornerDomain& d, const VecX& g, const VecX& f);

// Pure Neumann problem with d_nu u = h_S on S and Arc edges, h_B on B edges.
// Mean-zero representative through one Lagrange multiplier row.
class NeumannSolver {
 public:
  explicit NeumannSolver(const CornerDomain& d);
  struct Result {
    VecX u;
    double compatibility_residual = 0.0;  // |int g - int h dS| / (int |g| + int |h| dS)
  };
  Result solve(const VecX& g, const VecX& h_S, const VecX& h_B) const;
  // Assembled load F(psi) = -int g psi + int h psi dS; `scale` normalizes the compatibility residual.
  Result solve_load(const VecX& load, double scale) const;
  const SpMat& stiffness() const { return A_; }
  const SpMat& mass() const { return M_; }

 private:
  SpMat A_, M_, MS_, MB_;
  VecX mass_row_;
  double h_ = 0.0;
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

NeumannSolver::Result solve_neumann_neumann(const CornerDomain& d, const VecX& g, const VecX& h_S, const VecX& h_B);

// Smallest eigenvalue of the Dirichlet-constrained stiffness (dense; small meshes only).
double constrained_min_eigenvalue(const MixedSolver& s);

struct ConvergenceStudy {
  std::vector<double> h, l2, h1, order_l2, order_h1;  // orders: log2-type ratios between consecutive meshes
  bool valid = true;
  std::string message;
  double mean_order_h1() const;  // least-squares slope of log(h1) against log(h)
  double mean_order_l2() const;
};

// Sector problem with exact solution given by the first singular function of `bc`
// (DN: Dirichlet on S and arc, Neumann on B; DD: Dirichlet everywhere).
struct SectorProblem {
  double omega = 3 * kPi / 4;
  BoundaryPair bc = BoundaryPair::DirichletNeumann;
  int k = 0;
  double radius = 1.0;
};
ConvergenceStudy convergence_study(const SectorProblem& p, const std::vector<double>& hs, double grading);

}  // namespace beachlab
