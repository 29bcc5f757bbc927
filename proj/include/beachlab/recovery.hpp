#pragma once

// Nodal derivative recovery for P1 fields and point location on a mesh.

#include "beachlab/geometry.hpp"

#include <array>
#include <optional>
#include <vector>

namespace beachlab {

// Local quadratic least-squares fit over the two-ring of each vertex.
class PatchRecovery {
 public:
  explicit PatchRecovery(const Mesh& m);
  std::vector<Vec2> gradient(const VecX& u) const;
  std::vector<Mat2> hessian(const VecX& u) const;
  // Jacobian (Dv)_{ij} = d v_i / d x_j of a nodal vector field.
  std::vector<Mat2> jacobian(const std::vector<Vec2>& v) const;

 private:
  std::vector<std::vector<int>> patch_;
  std::vector<MatX> pinv_;  // 5 x k: rows d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2 (after centering)
  std::vector<double> scale_;
};

class PointLocator {
 public:
  explicit PointLocator(const Mesh& m);
  struct Hit {
    int triangle = -1;
    Eigen::Vector3d bary;
  };
  std::optional<Hit> locate(const Vec2& x) const;
  // P1 interpolation; points outside the mesh take the value of the closest vertex.
  double interpolate(const VecX& u, const Vec2& x, bool* inside = nullptr) const;
  Vec2 interpolate(const std::vector<Vec2>& v, const Vec2& x, bool* inside = nullptr) const;
  int nearest_vertex(const Vec2& x) const;

 private:
  const Mesh* m_;
  Vec2 lo_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace beachlab
