#pragma once

// Discrete Dirichlet-to-Neumann operator on the free surface (zero flux on the bottom).

#include "beachlab/geometry.hpp"

#include <Eigen/Cholesky>

namespace beachlab {

class DtNOperator {
 public:
  explicit DtNOperator(const CornerDomain& d);

  int size() const { return static_cast<int>(K_.rows()); }
  // Energy form of harmonic extensions, f^T K g = int grad Hf . grad Hg (symmetrized).
  const MatX& stiffness() const { return K_; }
  const MatX& mass() const { return M_; }
  // ||K - K^T|| / ||K|| of the Schur complement before symmetrization.
  double self_adjoint_defect() const { return defect_; }

  VecX apply(const VecX& f) const;  // N f = M^{-1} K f
  const VecX& eigenvalues() const { return lambda_; }
  const MatX& eigenvectors() const { return phi_; }  // M-orthonormal columns
  double orthonormality_error() const;

  // sum_k lambda_k^sigma <f, phi_k>_M phi_k  (sigma >= 0; lambda_0^0 = 1).
  VecX fractional_power(double sigma, const VecX& f) const;
  // ||(I + N)^sigma f||_{L2(S)}
  double sobolev_norm(const VecX& f, double sigma) const;
  double l2_norm(const VecX& f) const;
  VecX coefficients(const VecX& f) const;  // phi^T M f

 private:
  MatX K_, M_;
  VecX lambda_;
  MatX phi_;
  double defect_ = 0.0;
  Eigen::LLT<MatX> mass_llt_;
};

// Surface mass matrix in surface_nodes order.
MatX surface_mass(const CornerDomain& d);

// Eigenvalues k pi/W tanh(k pi D/W) of the box of width W and depth D.
double box_dtn_eigenvalue(int k, double width, double depth);

}  // namespace beachlab
