#include "beachlab/elliptic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace beachlab {

BoundaryDataTriple BoundaryDataTriple::zeros(int nv) {
  return {VecX::Zero(nv), VecX::Zero(nv), VecX::Zero(nv)};
}

namespace {

void check_sizes(const CornerDomain& d, const BoundaryDataTriple& b) {
  const auto nv = static_cast<Eigen::Index>(d.mesh.num_vertices());
  if (b.f.size() != nv || b.g.size() != nv || b.h.size() != nv)
    throw LabError(ErrorKind::InvalidInput, "boundary data must have one value per vertex");
  if (!b.f.allFinite() || !b.g.allFinite() || !b.h.allFinite())
    throw LabError(ErrorKind::InvalidInput, "boundary data contains non-finite values");
}

}  // namespace

struct MixedSolver::SurfaceMass {
  std::vector<int> nodes;
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

MixedSolver::MixedSolver(const CornerDomain& d, DirichletPart part)
    : d_(std::make_shared<CornerDomain>(d)) {
  const Mesh& m = d_->mesh;
  A_ = assemble_stiffness(m);
  M_ = assemble_mass(m);
  MB_ = assemble_edge_mass(m, EdgeTag::Bottom);
  fixed_.assign(m.num_vertices(), 0);
  for (const auto& e : m.boundary)
    if (part == DirichletPart::WholeBoundary || e.tag != EdgeTag::Bottom) fixed_[e.a] = fixed_[e.b] = 1;
  solver_ = std::make_shared<ConstrainedSolver>(A_, fixed_);

  ms_ = std::make_shared<SurfaceMass>();
  ms_->nodes = d_->surface_nodes;
  std::vector<int> local(m.num_vertices(), -1);
  for (size_t i = 0; i < ms_->nodes.size(); ++i) local[ms_->nodes[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& e : m.boundary) {
    if (e.tag != EdgeTag::Surface) continue;
    const int a = local[e.a], b = local[e.b];
    const double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    t.emplace_back(a, a, len / 3);
    t.emplace_back(b, b, len / 3);
    t.emplace_back(a, b, len / 6);
    t.emplace_back(b, a, len / 6);
  }
  const int ns = static_cast<int>(ms_->nodes.size());
  SpMat MS(ns, ns);
  MS.setFromTriplets(t.begin(), t.end());
  ms_->ldlt.compute(MS);
  if (ms_->ldlt.info() != Eigen::Success) throw LabError(ErrorKind::SolverFailure, "surface mass factorization failed");
}

VecX bottom_load(const Mesh& m, const BoundaryDataTriple& data, const SpMat& MB) {
  if (data.h_edges.empty()) return MB * data.h;
  if (data.h_edges.size() != m.boundary.size())
    throw LabError(ErrorKind::InvalidInput, "per-edge bottom data must match the boundary edge count");
  VecX F = VecX::Zero(m.num_vertices());
  for (size_t k = 0; k < m.boundary.size(); ++k) {
    const auto& e = m.boundary[k];
    if (e.tag != EdgeTag::Bottom) continue;
    const double len = (m.vertices[e.b] - m.vertices[e.a]).norm();
    const auto& v = data.h_edges[k];
    F[e.a] += len * (2 * v[0] + v[1]) / 6;
    F[e.b] += len * (v[0] + 2 * v[1]) / 6;
  }
  return F;
}

VecX MixedSolver::load(const BoundaryDataTriple& data) const {
  check_sizes(*d_, data);
  return -(M_ * data.g) + bottom_load(d_->mesh, data, MB_);
}

VecX MixedSolver::solve(const BoundaryDataTriple& data) const {
  VecX F = load(data);
  return solver_->solve(F, data.f);
}

VecX MixedSolver::solve_load(const VecX& load, const VecX& fixed_values) const {
  return solver_->solve(load, fixed_values);
}

VecX MixedSolver::surface_flux(const VecX& u, const VecX& load) const {
  VecX r = A_ * u - load;
  VecX rs(ms_->nodes.size());
  for (size_t i = 0; i < ms_->nodes.size(); ++i) rs[i] = r[ms_->nodes[i]];
  return ms_->ldlt.solve(rs);
}

double MixedSolver::galerkin_residual(const VecX& u, const VecX& load) const {
  VecX r = A_ * u - load;
  double worst = 0.0;
  for (int i = 0; i < r.size(); ++i)
    if (!fixed_[i]) worst = std::max(worst, std::abs(r[i]));
  double scale = std::max(load.cwiseAbs().maxCoeff(), (A_ * u).cwiseAbs().maxCoeff());
  return scale > 0 ? worst / scale : worst;
}

VecX solve_mixed(const CornerDomain& d, const BoundaryDataTriple& data) { return MixedSolver(d).solve(data); }

VecX harmonic_extension(const CornerDomain& d, const VecX& f) {
  auto data = BoundaryDataTriple::zeros(d.mesh.num_vertices());
  data.f = f;
  return solve_mixed(d, data);
}

VecX poisson_dirichlet(const CornerDomain& d, const VecX& g, const VecX& h) {
  auto data = BoundaryDataTriple::zeros(d.mesh.num_vertices());
  data.g = g;
  data.h = h;
  return solve_mixed(d, data);
}

VecX solve_dirichlet_dirichlet(const CornerDomain& d, const VecX& g, const VecX& f) {
  auto data = BoundaryDataTriple::zeros(d.mesh.num_vertices());
  data.g = g;
  data.f = f;
  return MixedSolver(d, DirichletPart::WholeBoundary).solve(data);
}

// ---------------------------------------------------------------------------

struct NeumannSolver::Impl {
  Eigen::SparseLU<SpMat> lu;
};

NeumannSolver::NeumannSolver(const CornerDomain& d) {
  const Mesh& m = d.mesh;
  const int n = m.num_vertices();
  A_ = assemble_stiffness(m);
  M_ = assemble_mass(m);
  MB_ = assemble_edge_mass(m, EdgeTag::Bottom);
  MS_ = assemble_edge_mass(m, EdgeTag::Surface) + assemble_edge_mass(m, EdgeTag::Arc);
  mass_row_ = M_ * VecX::Ones(n);
  h_ = m.max_edge_length();
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < A_.outerSize(); ++k)
    for (SpMat::InnerIterator it(A_, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, n, mass_row_[i]);
    t.emplace_back(n, i, mass_row_[i]);
  }
  SpMat K(n + 1, n + 1);
  K.setFromTriplets(t.begin(), t.end());
  impl_ = std::make_shared<Impl>();
  impl_->lu.analyzePattern(K);
  impl_->lu.factorize(K);
  if (impl_->lu.info() != Eigen::Success)
    throw LabError(ErrorKind::SolverFailure, "Neumann saddle-point factorization failed");
}

NeumannSolver::Result NeumannSolver::solve(const VecX& g, const VecX& h_S, const VecX& h_B) const {
  const int n = static_cast<int>(A_.rows());
  if (g.size() != n || h_S.size() != n || h_B.size() != n)
    throw LabError(ErrorKind::InvalidInput, "Neumann data must have one value per vertex");
  const double scale = (M_ * g.cwiseAbs()).sum() + (MS_ * h_S.cwiseAbs()).sum() + (MB_ * h_B.cwiseAbs()).sum();
  return solve_load(-(M_ * g) + MS_ * h_S + MB_ * h_B, scale);
}

NeumannSolver::Result NeumannSolver::solve_load(const VecX& load, double scale) const {
  const int n = static_cast<int>(A_.rows());
  if (load.size() != n) throw LabError(ErrorKind::InvalidInput, "Neumann load has the wrong size");
  Result res;
  res.compatibility_residual = scale > 0 ? std::abs(load.sum()) / scale : 0.0;
  // Nodal data carry an O(h^2) quadrature defect even when the continuous data are compatible.
  const double tol = std::max(tolerances().compat, 10.0 * h_ * h_);
  if (res.compatibility_residual > tol) {
    std::ostringstream os;
    os.precision(6);
    os << "incompatible Neumann data: relative residual " << res.compatibility_residual << " exceeds " << tol;
    throw LabError(ErrorKind::InvalidInput, os.str());
  }
  VecX rhs(n + 1);
  rhs.head(n) = load;
  rhs[n] = 0.0;
  VecX sol = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !sol.allFinite())
    throw LabError(ErrorKind::SolverFailure, "Neumann solve failed");
  res.u = sol.head(n);
  return res;
}

NeumannSolver::Result solve_neumann_neumann(const CornerDomain& d, const VecX& g, const VecX& h_S, const VecX& h_B) {
  return NeumannSolver(d).solve(g, h_S, h_B);
}

double constrained_min_eigenvalue(const MixedSolver& s) {
  const auto& fixed = s.dirichlet_mask();
  std::vector<int> free;
  for (size_t i = 0; i < fixed.size(); ++i)
    if (!fixed[i]) free.push_back(static_cast<int>(i));
  if (free.size() > static_cast<size_t>(tolerances().dense_eig_max))
    throw LabError(ErrorKind::InvalidInput, "mesh too large for a dense eigenvalue check");
  MatX A = MatX(s.stiffness());
  MatX Aff(free.size(), free.size());
  for (size_t i = 0; i < free.size(); ++i)
    for (size_t j = 0; j < free.size(); ++j) Aff(i, j) = A(free[i], free[j]);
  Eigen::SelfAdjointEigenSolver<MatX> es(Aff, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// ---------------------------------------------------------------------------

namespace {
double slope(const std::vector<double>& h, const std::vector<double>& e) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double x = std::log(h[i]), y = std::log(e[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

double ConvergenceStudy::mean_order_h1() const { return slope(h, h1); }
double ConvergenceStudy::mean_order_l2() const { return slope(h, l2); }

ConvergenceStudy convergence_study(const SectorProblem& p, const std::vector<double>& hs, double grading) {
  if (hs.size() < 3) throw LabError(ErrorKind::InvalidInput, "a convergence study needs at least 3 meshes");
  for (size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1])) throw LabError(ErrorKind::InvalidInput, "mesh sizes must be strictly decreasing");
  if (p.bc == BoundaryPair::NeumannNeumann)
    throw LabError(ErrorKind::InvalidInput, "convergence study supports the dn and dd sector problems");
  auto sf = singular_function(p.bc, p.omega, p.bc == BoundaryPair::DirichletNeumann ? p.k : std::max(1, p.k));
  auto exact = [&](const Vec2& x) { return sf.value(x); };
  auto grad = [&](const Vec2& x) { return sf.gradient(x); };

  ConvergenceStudy st;
  for (double h : hs) {
    auto d = build_sector(p.omega, p.radius, h, grading);
    const int nv = d.mesh.num_vertices();
    auto data = BoundaryDataTriple::zeros(nv);
    for (int v = 0; v < nv; ++v) data.f[v] = exact(d.mesh.vertices[v]);
    // Exact solution satisfies the homogeneous Neumann condition on B.
    VecX u = p.bc == BoundaryPair::DirichletNeumann ? MixedSolver(d).solve(data)
                                                    : MixedSolver(d, DirichletPart::WholeBoundary).solve(data);
    auto e = p1_errors(d.mesh, u, exact, grad, Vec2::Zero());
    st.h.push_back(h);
    st.l2.push_back(e.l2);
    st.h1.push_back(e.h1);
  }
  for (size_t i = 1; i < hs.size(); ++i) {
    const double r = std::log(st.h[i - 1] / st.h[i]);
    st.order_l2.push_back(std::log(st.l2[i - 1] / st.l2[i]) / r);
    st.order_h1.push_back(std::log(st.h1[i - 1] / st.h1[i]) / r);
    if (!(st.h1[i] < st.h1[i - 1]) || !(st.l2[i] < st.l2[i - 1])) {
      st.valid = false;
      st.message = "errors are not monotonically decreasing";
    }
  }
  return st;
}

}  // namespace beachlab
