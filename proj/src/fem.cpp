#include "beachlab/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace beachlab {

std::vector<ElementGeometry> element_geometry(const Mesh& m) {
  std::vector<ElementGeometry> out(m.triangles.size());
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    const Vec2& p0 = m.vertices[tri[0]];
    const Vec2& p1 = m.vertices[tri[1]];
    const Vec2& p2 = m.vertices[tri[2]];
    double det = cross(p1 - p0, p2 - p0);
    if (det <= 0.0) throw LabError(ErrorKind::InvalidInput, "inverted or degenerate element " + std::to_string(t));
    ElementGeometry& g = out[t];
    g.area = 0.5 * det;
    // grad lambda_i = perp(opposite edge) / det, oriented inward.
    g.grad.row(0) = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    g.grad.row(1) = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    g.grad.row(2) = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  }
  return out;
}

SpMat assemble_stiffness(const Mesh& m) {
  auto geo = element_geometry(m);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * m.triangles.size());
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    Eigen::Matrix3d k = geo[t].area * geo[t].grad * geo[t].grad.transpose();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], k(i, j));
  }
  SpMat A(m.num_vertices(), m.num_vertices());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SpMat assemble_mass(const Mesh& m) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    double a = m.signed_area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], a * (i == j ? 2.0 : 1.0) / 12.0);
  }
  SpMat M(m.num_vertices(), m.num_vertices());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

VecX lumped_mass(const Mesh& m) {
  VecX d = VecX::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t) {
    double a = m.signed_area(t) / 3.0;
    for (int v : m.triangles[t]) d[v] += a;
  }
  return d;
}

SpMat assemble_edge_mass(const Mesh& m, EdgeTag tag) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : m.boundary) {
    if (e.tag != tag) continue;
    double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    trip.emplace_back(e.a, e.a, len / 3.0);
    trip.emplace_back(e.b, e.b, len / 3.0);
    trip.emplace_back(e.a, e.b, len / 6.0);
    trip.emplace_back(e.b, e.a, len / 6.0);
  }
  SpMat M(m.num_vertices(), m.num_vertices());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

std::vector<Vec2> element_gradients(const Mesh& m, const std::vector<ElementGeometry>& geo, const VecX& u) {
  std::vector<Vec2> g(m.triangles.size());
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    g[t] = geo[t].grad.transpose() * Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]);
  }
  return g;
}

std::vector<Vec2> average_to_vertices(const Mesh& m, const std::vector<ElementGeometry>& geo,
                                      const std::vector<Vec2>& elem) {
  std::vector<Vec2> acc(m.num_vertices(), Vec2::Zero());
  std::vector<double> w(m.num_vertices(), 0.0);
  for (size_t t = 0; t < m.triangles.size(); ++t)
    for (int v : m.triangles[t]) {
      acc[v] += geo[t].area * elem[t];
      w[v] += geo[t].area;
    }
  for (int v = 0; v < m.num_vertices(); ++v)
    if (w[v] > 0) acc[v] /= w[v];
  return acc;
}

// ---------------------------------------------------------------------------

struct ConstrainedSolver::Impl {
  bool iterative = false;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
};

ConstrainedSolver::ConstrainedSolver(const SpMat& A, const std::vector<char>& fixed) : A_(A) {
  const int n = static_cast<int>(A.rows());
  index_.assign(n, -1);
  std::vector<int> fix_index(n, -1);
  int nf = 0, nx = 0;
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) fix_index[i] = nx++;
    else { index_[i] = nf++; free_.push_back(i); }
  }
  std::vector<Eigen::Triplet<double>> tff, tfx;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (index_[r] < 0) continue;
      if (index_[c] >= 0) tff.emplace_back(index_[r], index_[c], it.value());
      else tfx.emplace_back(index_[r], fix_index[c], it.value());
    }
  Aff_.resize(nf, nf);
  Aff_.setFromTriplets(tff.begin(), tff.end());
  Afx_.resize(nf, nx);
  Afx_.setFromTriplets(tfx.begin(), tfx.end());
  impl_ = std::make_shared<Impl>();
  if (nf == 0) return;
  if (nf > tolerances().cg_threshold) {
    impl_->iterative = true;
    impl_->cg.setTolerance(tolerances().solver_rel);
    impl_->cg.setMaxIterations(20 * nf);
    impl_->cg.compute(Aff_);
  } else {
    impl_->ldlt.compute(Aff_);
    if (impl_->ldlt.info() != Eigen::Success)
      throw LabError(ErrorKind::SolverFailure, "factorization of the constrained stiffness failed");
    // Coercivity witness: LDLT pivots must be positive.
    if (impl_->ldlt.vectorD().minCoeff() <= 0.0)
      throw LabError(ErrorKind::SolverFailure, "constrained stiffness is not positive definite");
  }
}

VecX ConstrainedSolver::solve(const VecX& load, const VecX& fixed_values) const {
  const int n = static_cast<int>(A_.rows());
  VecX u = VecX::Zero(n);
  VecX xf(Afx_.cols());
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (index_[i] < 0) { u[i] = fixed_values[i]; xf[k++] = fixed_values[i]; }
  if (free_.empty()) return u;
  VecX rhs(free_.size());
  for (size_t j = 0; j < free_.size(); ++j) rhs[j] = load[free_[j]];
  if (Afx_.cols() > 0) rhs -= Afx_ * xf;
  VecX sol;
  if (impl_->iterative) {
    sol = impl_->cg.solve(rhs);
    if (impl_->cg.info() != Eigen::Success) throw LabError(ErrorKind::SolverFailure, "CG did not converge");
  } else {
    sol = impl_->ldlt.solve(rhs);
  }
  for (size_t j = 0; j < free_.size(); ++j) u[free_[j]] = sol[j];
  return u;
}

// ---------------------------------------------------------------------------

namespace {

// Degree-5 seven-point rule on the reference triangle (barycentric, weights sum to 1).
struct QuadPoint { double l0, l1, l2, w; };
const std::array<QuadPoint, 7>& rule7() {
  static const std::array<QuadPoint, 7> r = [] {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    return std::array<QuadPoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, w0},
                                     {a1, b1, b1, w1}, {b1, a1, b1, w1}, {b1, b1, a1, w1},
                                     {a2, b2, b2, w2}, {b2, a2, b2, w2}, {b2, b2, a2, w2}}};
  }();
  return r;
}

void accumulate(const Vec2& p0, const Vec2& p1, const Vec2& p2, double u0, double u1, double u2, const Vec2& grad,
                const std::function<double(const Vec2&)>& exact, const std::function<Vec2(const Vec2&)>& exact_grad,
                int depth, const std::optional<Vec2>& sing, ErrorNorms& acc) {
  bool touches = false;
  if (sing) {
    double tol = 1e-12 * (1.0 + sing->norm());
    touches = (p0 - *sing).norm() < tol || (p1 - *sing).norm() < tol || (p2 - *sing).norm() < tol;
  }
  if (touches && depth > 0) {
    Vec2 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m20 = 0.5 * (p2 + p0);
    double v01 = 0.5 * (u0 + u1), v12 = 0.5 * (u1 + u2), v20 = 0.5 * (u2 + u0);
    accumulate(p0, m01, m20, u0, v01, v20, grad, exact, exact_grad, depth - 1, sing, acc);
    accumulate(m01, p1, m12, v01, u1, v12, grad, exact, exact_grad, depth - 1, sing, acc);
    accumulate(m20, m12, p2, v20, v12, u2, grad, exact, exact_grad, depth - 1, sing, acc);
    accumulate(m12, m20, m01, v12, v20, v01, grad, exact, exact_grad, depth - 1, sing, acc);
    return;
  }
  double area = 0.5 * std::abs(cross(p1 - p0, p2 - p0));
  for (const auto& q : rule7()) {
    Vec2 x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
    double uh = q.l0 * u0 + q.l1 * u1 + q.l2 * u2;
    double e = exact(x) - uh;
    Vec2 ge = exact_grad(x) - grad;
    acc.l2 += q.w * area * e * e;
    acc.h1 += q.w * area * ge.squaredNorm();
  }
}

}  // namespace

ErrorNorms p1_errors(const Mesh& m, const VecX& u, const std::function<double(const Vec2&)>& exact,
                     const std::function<Vec2(const Vec2&)>& exact_grad, const std::optional<Vec2>& singular_point) {
  auto geo = element_geometry(m);
  auto grads = element_gradients(m, geo, u);
  ErrorNorms acc;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    accumulate(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]], u[tri[0]], u[tri[1]], u[tri[2]], grads[t],
               exact, exact_grad, 8, singular_point, acc);
  }
  acc.l2 = std::sqrt(acc.l2);
  acc.h1 = std::sqrt(acc.h1);
  return acc;
}

}  // namespace beachlab
