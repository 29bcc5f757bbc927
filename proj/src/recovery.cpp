#include "beachlab/recovery.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace beachlab {

PatchRecovery::PatchRecovery(const Mesh& m) {
  const int nv = m.num_vertices();
  auto nb = m.vertex_neighbors();
  patch_.resize(nv);
  pinv_.resize(nv);
  scale_.resize(nv);
  for (int v = 0; v < nv; ++v) {
    std::vector<int> p{v};
    for (int a : nb[v]) {
      p.push_back(a);
      for (int b : nb[a]) p.push_back(b);
    }
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    double s = 0.0;
    for (int a : nb[v]) s = std::max(s, (m.vertices[a] - m.vertices[v]).norm());
    scale_[v] = s;
    const int k = static_cast<int>(p.size());
    MatX V(k, 6);
    for (int i = 0; i < k; ++i) {
      Vec2 d = (m.vertices[p[i]] - m.vertices[v]) / s;
      V.row(i) << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
    }
    MatX P = V.completeOrthogonalDecomposition().pseudoInverse();
    pinv_[v] = P.bottomRows(5);
    patch_[v] = std::move(p);
  }
}

std::vector<Vec2> PatchRecovery::gradient(const VecX& u) const {
  std::vector<Vec2> g(patch_.size());
  for (size_t v = 0; v < patch_.size(); ++v) {
    double gx = 0, gy = 0;
    for (size_t i = 0; i < patch_[v].size(); ++i) {
      gx += pinv_[v](0, i) * u[patch_[v][i]];
      gy += pinv_[v](1, i) * u[patch_[v][i]];
    }
    g[v] = Vec2(gx, gy) / scale_[v];
  }
  return g;
}

std::vector<Mat2> PatchRecovery::hessian(const VecX& u) const {
  std::vector<Mat2> H(patch_.size());
  for (size_t v = 0; v < patch_.size(); ++v) {
    double xx = 0, xy = 0, yy = 0;
    for (size_t i = 0; i < patch_[v].size(); ++i) {
      const double ui = u[patch_[v][i]];
      xx += pinv_[v](2, i) * ui;
      xy += pinv_[v](3, i) * ui;
      yy += pinv_[v](4, i) * ui;
    }
    const double s2 = scale_[v] * scale_[v];
    H[v] << xx / s2, xy / s2, xy / s2, yy / s2;
  }
  return H;
}

std::vector<Mat2> PatchRecovery::jacobian(const std::vector<Vec2>& v) const {
  VecX vx(v.size()), vy(v.size());
  for (size_t i = 0; i < v.size(); ++i) { vx[i] = v[i].x(); vy[i] = v[i].y(); }
  auto gx = gradient(vx), gy = gradient(vy);
  std::vector<Mat2> J(v.size());
  for (size_t i = 0; i < v.size(); ++i) J[i] << gx[i].x(), gx[i].y(), gy[i].x(), gy[i].y();
  return J;
}

// ---------------------------------------------------------------------------

PointLocator::PointLocator(const Mesh& m) : m_(&m) {
  Vec2 lo = m.vertices[0], hi = m.vertices[0];
  for (const auto& p : m.vertices) { lo = lo.cwiseMin(p); hi = hi.cwiseMax(p); }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  cell_ = std::max(span / std::sqrt(std::max(1, m.num_triangles())) * 2.0, 1e-12);
  lo_ = lo - Vec2::Constant(1e-9 * span);
  nx_ = static_cast<int>((hi.x() - lo_.x()) / cell_) + 1;
  ny_ = static_cast<int>((hi.y() - lo_.y()) / cell_) + 1;
  buckets_.assign(static_cast<size_t>(nx_) * ny_, {});
  for (int t = 0; t < m.num_triangles(); ++t) {
    Vec2 a = m.vertices[m.triangles[t][0]], b = a;
    for (int v : m.triangles[t]) { a = a.cwiseMin(m.vertices[v]); b = b.cwiseMax(m.vertices[v]); }
    int i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / cell_), 0, nx_ - 1);
    int i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / cell_), 0, nx_ - 1);
    int j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / cell_), 0, ny_ - 1);
    int j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / cell_), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) buckets_[static_cast<size_t>(j) * nx_ + i].push_back(t);
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Vec2& x) const {
  int i = static_cast<int>(std::floor((x.x() - lo_.x()) / cell_));
  int j = static_cast<int>(std::floor((x.y() - lo_.y()) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::nullopt;
  const double eps = -1e-12;
  for (int t : buckets_[static_cast<size_t>(j) * nx_ + i]) {
    const auto& tri = m_->triangles[t];
    const Vec2 &p0 = m_->vertices[tri[0]], &p1 = m_->vertices[tri[1]], &p2 = m_->vertices[tri[2]];
    const double det = cross(p1 - p0, p2 - p0);
    const double l1 = cross(x - p0, p2 - p0) / det;
    const double l2 = cross(p1 - p0, x - p0) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 >= eps && l1 >= eps && l2 >= eps) return Hit{t, Eigen::Vector3d(l0, l1, l2)};
  }
  return std::nullopt;
}

int PointLocator::nearest_vertex(const Vec2& x) const {
  int best = 0;
  double bd = 1e300;
  for (int v = 0; v < m_->num_vertices(); ++v) {
    double d = (m_->vertices[v] - x).squaredNorm();
    if (d < bd) { bd = d; best = v; }
  }
  return best;
}

double PointLocator::interpolate(const VecX& u, const Vec2& x, bool* inside) const {
  auto h = locate(x);
  if (inside) *inside = h.has_value();
  if (!h) return u[nearest_vertex(x)];
  const auto& tri = m_->triangles[h->triangle];
  return h->bary[0] * u[tri[0]] + h->bary[1] * u[tri[1]] + h->bary[2] * u[tri[2]];
}

Vec2 PointLocator::interpolate(const std::vector<Vec2>& v, const Vec2& x, bool* inside) const {
  auto h = locate(x);
  if (inside) *inside = h.has_value();
  if (!h) return v[nearest_vertex(x)];
  const auto& tri = m_->triangles[h->triangle];
  return h->bary[0] * v[tri[0]] + h->bary[1] * v[tri[1]] + h->bary[2] * v[tri[2]];
}

}  // namespace beachlab
