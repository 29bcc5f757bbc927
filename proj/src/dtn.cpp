#include "beachlab/dtn.hpp"

#include "beachlab/fem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace beachlab {

MatX surface_mass(const CornerDomain& d) {
  const Mesh& m = d.mesh;
  const int ns = static_cast<int>(d.surface_nodes.size());
  std::vector<int> local(m.num_vertices(), -1);
  for (int i = 0; i < ns; ++i) local[d.surface_nodes[i]] = i;
  MatX M = MatX::Zero(ns, ns);
  for (const auto& e : m.boundary) {
    if (e.tag != EdgeTag::Surface) continue;
    const int a = local[e.a], b = local[e.b];
    const double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    M(a, a) += len / 3;
    M(b, b) += len / 3;
    M(a, b) += len / 6;
    M(b, a) += len / 6;
  }
  return M;
}

DtNOperator::DtNOperator(const CornerDomain& d) {
  const Mesh& m = d.mesh;
  const int nv = m.num_vertices();
  const int ns = static_cast<int>(d.surface_nodes.size());
  if (ns > tolerances().dense_eig_max) throw LabError(ErrorKind::InvalidInput, "surface too large for dense DtN");
  std::vector<int> slot(nv, -1), inner;
  for (int i = 0; i < ns; ++i) slot[d.surface_nodes[i]] = i;
  for (const auto& e : m.boundary)
    if (e.tag != EdgeTag::Bottom && (slot[e.a] < 0 || slot[e.b] < 0))
      throw LabError(ErrorKind::InvalidInput, "DtN needs a domain whose Dirichlet part is exactly the surface");
  std::vector<int> islot(nv, -1);
  for (int v = 0; v < nv; ++v)
    if (slot[v] < 0) { islot[v] = static_cast<int>(inner.size()); inner.push_back(v); }
  const int ni = static_cast<int>(inner.size());

  SpMat A = assemble_stiffness(m);
  std::vector<Eigen::Triplet<double>> tii, tis;
  MatX Ass = MatX::Zero(ns, ns);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (slot[r] >= 0 && slot[c] >= 0) Ass(slot[r], slot[c]) += it.value();
      else if (slot[r] < 0 && slot[c] < 0) tii.emplace_back(islot[r], islot[c], it.value());
      else if (slot[r] < 0) tis.emplace_back(islot[r], slot[c], it.value());
    }
  SpMat Aii(ni, ni), Ais(ni, ns);
  Aii.setFromTriplets(tii.begin(), tii.end());
  Ais.setFromTriplets(tis.begin(), tis.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(Aii);
  if (ldlt.info() != Eigen::Success) throw LabError(ErrorKind::SolverFailure, "interior factorization failed");
  MatX X = ldlt.solve(MatX(Ais));
  MatX Kraw = Ass - MatX(Ais.transpose()) * X;
  defect_ = (Kraw - Kraw.transpose()).norm() / Kraw.norm();
  K_ = 0.5 * (Kraw + Kraw.transpose());
  M_ = surface_mass(d);
  mass_llt_.compute(M_);
  if (mass_llt_.info() != Eigen::Success) throw LabError(ErrorKind::SolverFailure, "surface mass is not SPD");

  Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es(K_, M_);
  if (es.info() != Eigen::Success) throw LabError(ErrorKind::SolverFailure, "DtN eigensolve failed");
  lambda_ = es.eigenvalues();
  phi_ = es.eigenvectors();
  // Fix the sign of each eigenvector for reproducible output.
  for (int k = 0; k < phi_.cols(); ++k) {
    Eigen::Index imax;
    phi_.col(k).cwiseAbs().maxCoeff(&imax);
    if (phi_(imax, k) < 0) phi_.col(k) *= -1.0;
  }
}

VecX DtNOperator::apply(const VecX& f) const { return mass_llt_.solve(K_ * f); }

double DtNOperator::orthonormality_error() const {
  return (phi_.transpose() * M_ * phi_ - MatX::Identity(size(), size())).cwiseAbs().maxCoeff();
}

VecX DtNOperator::coefficients(const VecX& f) const { return phi_.transpose() * (M_ * f); }

VecX DtNOperator::fractional_power(double sigma, const VecX& f) const {
  if (sigma < 0) throw LabError(ErrorKind::InvalidInput, "fractional power needs sigma >= 0");
  VecX c = coefficients(f);
  for (int k = 0; k < c.size(); ++k) {
    const double l = std::max(0.0, lambda_[k]);
    c[k] *= (sigma == 0.0) ? 1.0 : std::pow(l, sigma);
  }
  return phi_ * c;
}

double DtNOperator::sobolev_norm(const VecX& f, double sigma) const {
  VecX c = coefficients(f);
  double s = 0.0;
  for (int k = 0; k < c.size(); ++k) s += std::pow(1.0 + std::max(0.0, lambda_[k]), 2 * sigma) * c[k] * c[k];
  return std::sqrt(s);
}

double DtNOperator::l2_norm(const VecX& f) const { return std::sqrt(std::max(0.0, f.dot(M_ * f))); }

double box_dtn_eigenvalue(int k, double width, double depth) {
  const double xi = k * kPi / width;
  return xi * std::tanh(xi * depth);
}

}  // namespace beachlab
