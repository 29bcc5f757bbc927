#pragma once

// P1 finite element kernels shared by every module.

#include "beachlab/common.hpp"
#include "beachlab/geometry.hpp"

#include <functional>
#include <memory>

namespace beachlab {

struct ElementGeometry {
  double area = 0.0;
  Eigen::Matrix<double, 3, 2> grad;  // gradients of the barycentric coordinates
};

std::vector<ElementGeometry> element_geometry(const Mesh& m);

SpMat assemble_stiffness(const Mesh& m);
SpMat assemble_mass(const Mesh& m);
VecX lumped_mass(const Mesh& m);
// 1D mass matrix of the boundary edges carrying `tag` (size nv x nv).
SpMat assemble_edge_mass(const Mesh& m, EdgeTag tag);

// Elementwise-constant gradient of a P1 field.
std::vector<Vec2> element_gradients(const Mesh& m, const std::vector<ElementGeometry>& geo, const VecX& u);
// Area-weighted average of elementwise vectors at vertices.
std::vector<Vec2> average_to_vertices(const Mesh& m, const std::vector<ElementGeometry>& geo,
                                      const std::vector<Vec2>& elem);

// Symmetric system with some unknowns fixed (Dirichlet). Factorizes once.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const SpMat& A, const std::vector<char>& fixed);
  // Solves A u = load on free unknowns with u = fixed_values on fixed ones.
  VecX solve(const VecX& load, const VecX& fixed_values) const;
  int num_free() const { return static_cast<int>(free_.size()); }
  const SpMat& matrix() const { return A_; }

 private:
  SpMat A_;
  std::vector<int> free_, index_;
  SpMat Aff_, Afx_;
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Exact L2 and H1-seminorm errors against an analytic solution, using a degree-5 rule;
// elements touching `singular_point` are subdivided.
struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};
ErrorNorms p1_errors(const Mesh& m, const VecX& u, const std::function<double(const Vec2&)>& exact,
                     const std::function<Vec2(const Vec2&)>& exact_grad,
                     const std::optional<Vec2>& singular_point = std::nullopt);

}  // namespace beachlab
