#include "beachlab/geometry.hpp"

#include "beachlab/fem.hpp"

#include <json.hpp>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace beachlab {

const char* to_string(EdgeTag t) {
  switch (t) {
    case EdgeTag::Surface: return "S";
    case EdgeTag::Bottom: return "B";
    case EdgeTag::Arc: return "A";
  }
  return "?";
}

const char* to_string(NodeTag t) {
  switch (t) {
    case NodeTag::Interior: return "I";
    case NodeTag::Surface: return "S";
    case NodeTag::Bottom: return "B";
    case NodeTag::Contact: return "L";
    case NodeTag::Arc: return "A";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Bottoms

namespace {
Vec2 outward_from_tangent(const Vec2& t) { return {t.y(), -t.x()}; }
}  // namespace

LineBottom::LineBottom(Vec2 origin, Vec2 dir, double length)
    : origin_(origin), dir_(dir.normalized()), length_(length) {}

BottomFrame LineBottom::at(double s) const {
  BottomFrame f;
  f.param = s;
  f.point = origin_ + s * dir_;
  f.tangent = dir_;
  f.normal = outward_from_tangent(dir_);
  return f;
}

BottomFrame LineBottom::project(const Vec2& x) const { return at((x - origin_).dot(dir_)); }

PolylineBottom::PolylineBottom(std::vector<Vec2> pts) : pts_(std::move(pts)) {
  if (pts_.size() < 2) throw LabError(ErrorKind::InvalidInput, "polyline bottom needs two points");
  cum_.push_back(0.0);
  for (size_t i = 1; i < pts_.size(); ++i) cum_.push_back(cum_.back() + (pts_[i] - pts_[i - 1]).norm());
}

BottomFrame PolylineBottom::at(double s) const {
  size_t seg = 0;
  while (seg + 2 < pts_.size() && s > cum_[seg + 1]) ++seg;
  Vec2 t = (pts_[seg + 1] - pts_[seg]).normalized();
  BottomFrame f;
  f.param = s;
  f.point = pts_[seg] + (s - cum_[seg]) * t;
  f.tangent = t;
  f.normal = outward_from_tangent(t);
  return f;
}

BottomFrame PolylineBottom::project(const Vec2& x) const {
  double best = 1e300, best_s = 0.0;
  for (size_t i = 0; i + 1 < pts_.size(); ++i) {
    Vec2 d = pts_[i + 1] - pts_[i];
    double len = d.norm();
    double u = std::clamp((x - pts_[i]).dot(d) / (len * len), 0.0, 1.0);
    double dist = (pts_[i] + u * d - x).norm();
    if (dist < best - 1e-15) { best = dist; best_s = cum_[i] + u * len; }
  }
  return at(best_s);
}

double PolylineBottom::sliding_length() const {
  double mn = 1e300;
  for (size_t i = 0; i + 1 < pts_.size(); ++i) mn = std::min(mn, cum_[i + 1] - cum_[i]);
  return 0.5 * mn;
}

ParabolaBottom::ParabolaBottom(double omega, double length, double x0)
    : c_(std::tan(omega) / length), length_(length), x0_(x0) {}

double ParabolaBottom::y(double x) const { return c_ * (x - x0_) * (x - x0_ - length_); }

BottomFrame ParabolaBottom::at(double x) const {
  const double b1 = c_ * (2.0 * (x - x0_) - length_);
  const double b2 = 2.0 * c_;
  const double n = std::sqrt(1.0 + b1 * b1);
  BottomFrame f;
  f.param = x;
  f.point = Vec2(x, y(x));
  f.tangent = Vec2(1.0, b1) / n;
  f.normal = Vec2(b1, -1.0) / n;
  f.curvature = b2 / (n * n * n);
  f.dcurvature = -3.0 * b1 * b2 * b2 / std::pow(n, 6);
  return f;
}

BottomFrame ParabolaBottom::project(const Vec2& p) const {
  // Newton on d/dx |(x, y(x)) - p|^2 = 0.
  double x = p.x();
  for (int it = 0; it < 50; ++it) {
    double b = y(x), b1 = c_ * (2.0 * (x - x0_) - length_), b2 = 2.0 * c_;
    double g = (x - p.x()) + (b - p.y()) * b1;
    double h = 1.0 + b1 * b1 + (b - p.y()) * b2;
    double dx = g / h;
    x -= dx;
    if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return at(x);
}

std::pair<double, double> ParabolaBottom::crossing(double yv) const {
  double disc = length_ * length_ / 4.0 + yv / c_;
  if (disc < 0) disc = 0;
  double r = std::sqrt(disc);
  return {x0_ + length_ / 2.0 - r, x0_ + length_ / 2.0 + r};
}

BottomFrame ShiftedBottom::at(double param) const {
  BottomFrame f = base_->at(param);
  f.point += shift_;
  return f;
}

BottomFrame ShiftedBottom::project(const Vec2& x) const {
  BottomFrame f = base_->project(x - shift_);
  f.point += shift_;
  return f;
}

// ---------------------------------------------------------------------------
// Reference surface and graphs

double ReferenceSurface::length() const {
  double l = 0.0;
  for (size_t i = 1; i < nodes.size(); ++i) l += (nodes[i] - nodes[i - 1]).norm();
  return l;
}

namespace {

// C-infinity transition: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

std::vector<Vec2> nodal_tangents(const std::vector<Vec2>& c) {
  const size_t n = c.size();
  std::vector<Vec2> t(n);
  for (size_t i = 0; i < n; ++i) {
    Vec2 d = (i == 0) ? c[1] - c[0] : (i + 1 == n) ? c[n - 1] - c[n - 2] : c[i + 1] - c[i - 1];
    t[i] = d.normalized();
  }
  return t;
}

}  // namespace

std::shared_ptr<ReferenceSurface> make_reference_surface(std::vector<Vec2> nodes,
                                                         std::shared_ptr<const BottomCurve> bottom, double delta,
                                                         double blend_fraction) {
  auto ref = std::make_shared<ReferenceSurface>();
  ref->nodes = std::move(nodes);
  ref->bottom = std::move(bottom);
  ref->delta = delta;
  const size_t n = ref->nodes.size();
  auto tang = nodal_tangents(ref->nodes);
  std::vector<double> arc(n, 0.0);
  for (size_t i = 1; i < n; ++i) arc[i] = arc[i - 1] + (ref->nodes[i] - ref->nodes[i - 1]).norm();
  const double len = arc.back();
  const double width = blend_fraction * len;

  auto end_field = [&](size_t i) {
    Vec2 N = perp(tang[i]);
    Vec2 t = ref->bottom->project(ref->nodes[i]).tangent;
    if (t.dot(N) < 0) t = -t;  // bottom tangent pointing out of the fluid
    return t;
  };
  Vec2 XL = end_field(0), XR = end_field(n - 1);
  ref->transversal.resize(n);
  ref->bend_left.assign(n, 0.0);
  ref->bend_right.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double bl = 1.0 - smooth_step(arc[i] / width);
    double br = 1.0 - smooth_step((len - arc[i]) / width);
    ref->bend_left[i] = bl;
    ref->bend_right[i] = br;
    Vec2 X = bl * XL + br * XR + std::max(0.0, 1.0 - bl - br) * perp(tang[i]);
    ref->transversal[i] = X.normalized();
  }
  return ref;
}

Vec2 ReferenceSurface::end_correction(int i, double e) const {
  const Vec2 p = nodes[i] + e * transversal[i];
  return bottom->project(p).point - p;
}

Vec2 SurfaceGraph::position(int i, double e) const {
  Vec2 p = ref->nodes[i] + e * ref->transversal[i];
  if (!ref->bottom) return p;
  if (i == 0 || i == size() - 1) return ref->bottom->project(p).point;
  if (!ref->bend_left.empty() && ref->bend_left[i] > 0) p += ref->bend_left[i] * ref->end_correction(0, e);
  if (!ref->bend_right.empty() && ref->bend_right[i] > 0) p += ref->bend_right[i] * ref->end_correction(size() - 1, e);
  return p;
}

Vec2 SurfaceGraph::chart_derivative(int i) const {
  const bool bent = !ref->bend_left.empty() && (ref->bend_left[i] > 0 || ref->bend_right[i] > 0);
  if ((i == 0 || i == size() - 1 || bent) && ref->bottom) {
    const double d = 1e-6;
    return (position(i, eta[i] + d) - position(i, eta[i] - d)) / (2.0 * d);
  }
  return ref->transversal[i];
}

std::vector<Vec2> SurfaceGraph::curve() const {
  std::vector<Vec2> c(size());
  for (int i = 0; i < size(); ++i) c[i] = position(i);
  return c;
}

SurfaceGraph flat_graph(std::shared_ptr<const ReferenceSurface> ref) {
  SurfaceGraph g;
  g.eta = VecX::Zero(static_cast<Eigen::Index>(ref->nodes.size()));
  g.ref = std::move(ref);
  return g;
}

// ---------------------------------------------------------------------------
// Mesh

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

double Mesh::area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += signed_area(t);
  return a;
}

double Mesh::boundary_length() const {
  double l = 0.0;
  for (const auto& e : boundary) l += (vertices[e.b] - vertices[e.a]).norm();
  return l;
}

double Mesh::min_signed_area() const {
  double a = 1e300;
  for (int t = 0; t < num_triangles(); ++t) a = std::min(a, signed_area(t));
  return a;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, (vertices[tri[k]] - vertices[tri[(k + 1) % 3]]).norm());
  return h;
}

std::vector<NodeTag> Mesh::node_tags() const {
  std::vector<NodeTag> tags(vertices.size(), NodeTag::Interior);
  std::vector<char> s(vertices.size(), 0), b(vertices.size(), 0), a(vertices.size(), 0);
  for (const auto& e : boundary) {
    char* arr = e.tag == EdgeTag::Surface ? s.data() : e.tag == EdgeTag::Bottom ? b.data() : a.data();
    arr[e.a] = arr[e.b] = 1;
  }
  for (size_t v = 0; v < vertices.size(); ++v) {
    if (s[v] && b[v]) tags[v] = NodeTag::Contact;
    else if (s[v]) tags[v] = NodeTag::Surface;
    else if (a[v]) tags[v] = NodeTag::Arc;
    else if (b[v]) tags[v] = NodeTag::Bottom;
  }
  return tags;
}

std::vector<std::vector<int>> Mesh::vertex_neighbors() const {
  std::vector<std::vector<int>> nb(vertices.size());
  for (const auto& tri : triangles)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) nb[tri[i]].push_back(tri[j]);
  for (auto& l : nb) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return nb;
}

// ---------------------------------------------------------------------------
// Corner domain helpers

std::vector<Vec2> CornerDomain::surface_curve() const {
  std::vector<Vec2> c;
  c.reserve(surface_nodes.size());
  for (int v : surface_nodes) c.push_back(mesh.vertices[v]);
  return c;
}

std::vector<Vec2> CornerDomain::surface_tangents() const { return nodal_tangents(surface_curve()); }

std::vector<Vec2> CornerDomain::surface_normals() const {
  auto t = surface_tangents();
  for (auto& v : t) v = perp(v);
  return t;
}

std::vector<Vec2> CornerDomain::contact_points() const {
  std::vector<Vec2> p;
  for (int c : contact_nodes) p.push_back(mesh.vertices[c]);
  return p;
}

double CornerDomain::nu_dot_N(int c) const {
  const int v = contact_nodes.at(c);
  auto curve = surface_curve();
  const size_t n = curve.size();
  Vec2 t;
  if (surface_nodes.front() == v) t = (curve[1] - curve[0]).normalized();
  else if (surface_nodes.back() == v) t = (curve[n - 1] - curve[n - 2]).normalized();
  else throw LabError(ErrorKind::InvalidInput, "contact node is not an end of the surface");
  Vec2 N = perp(t);
  Vec2 nu = bottom->project(mesh.vertices[v]).normal;
  return nu.dot(N);
}

std::vector<double> CornerDomain::measured_contact_angles() const {
  std::vector<double> w;
  for (size_t c = 0; c < contact_nodes.size(); ++c) w.push_back(std::acos(std::clamp(-nu_dot_N(c), -1.0, 1.0)));
  return w;
}

double default_grading(double omega) { return std::max(1.0, 2.0 / (kPi / (2.0 * omega))); }

// ---------------------------------------------------------------------------
// Strip triangulation between two chains of vertex ids ("zipper").

namespace {

void zip(const std::vector<Vec2>& V, const std::vector<int>& U, const std::vector<int>& L,
         std::vector<std::array<int, 3>>& tris) {
  auto area2 = [&](int a, int b, int c) { return cross(V[b] - V[a], V[c] - V[a]); };
  std::vector<int> P(U);
  P.insert(P.end(), L.rbegin(), L.rend());
  double poly = 0.0;
  for (size_t i = 0; i < P.size(); ++i) poly += cross(V[P[i]], V[P[(i + 1) % P.size()]]);
  const double sigma = poly < 0 ? 1.0 : -1.0;
  double scale = 0.0;
  for (int v : P) scale = std::max(scale, (V[v] - V[P[0]]).norm());
  const double tiny = 1e-12 * scale * scale;

  // 0: degenerate (shared vertex), 1: valid, -1: inverted
  auto classify = [&](int a, int b, int c) {
    if (a == b || b == c || a == c) return 0;
    return area2(a, b, c) * sigma > tiny ? 1 : -1;
  };
  auto emit = [&](int a, int b, int c) {
    if (area2(a, b, c) > 0) tris.push_back({a, b, c});
    else tris.push_back({a, c, b});
  };

  size_t i = 0, k = 0;
  const size_t m = U.size() - 1, n = L.size() - 1;
  while (i < m || k < n) {
    int cu = i < m ? classify(U[i], L[k], U[i + 1]) : -2;
    int cl = k < n ? classify(U[i], L[k], L[k + 1]) : -2;
    bool adv_u;
    if (cu == 0) adv_u = true;
    else if (cl == 0) adv_u = false;
    else if (cu == 1 && cl == 1)
      adv_u = (V[U[i + 1]] - V[L[k]]).norm() <= (V[U[i]] - V[L[k + 1]]).norm();
    else if (cu == 1) adv_u = true;
    else if (cl == 1) adv_u = false;
    else throw LabError(ErrorKind::InvalidInput, "mesh strip cannot be triangulated");
    if (adv_u) {
      if (cu == 1) emit(U[i], L[k], U[i + 1]);
      ++i;
    } else {
      if (cl == 1) emit(U[i], L[k], L[k + 1]);
      ++k;
    }
  }
}

int add_vertex(Mesh& m, const Vec2& p) {
  m.vertices.push_back(p);
  return m.num_vertices() - 1;
}

void chain_edges(Mesh& m, const std::vector<int>& ids, EdgeTag tag) {
  for (size_t i = 0; i + 1 < ids.size(); ++i) m.boundary.push_back({ids[i], ids[i + 1], tag});
}

}  // namespace

// ---------------------------------------------------------------------------
// Builders

CornerDomain build_sector(double angle, double radius, double h, double grading) {
  if (!(angle > 1e-3 && angle < kPi - 1e-3)) throw LabError(ErrorKind::InvalidInput, "sector angle must lie in (0, pi)");
  if (!(radius > 0) || !(h > 0) || h > radius) throw LabError(ErrorKind::InvalidInput, "sector radius and h must be positive, h <= radius");
  if (grading < 1.0) throw LabError(ErrorKind::InvalidInput, "grading exponent must be >= 1");

  CornerDomain d;
  d.kind = "sector";
  d.radius = radius;
  Mesh& m = d.mesh;
  m.h = h;
  m.grading = grading;
  const int n = static_cast<int>(std::ceil(radius / h - 1e-9));
  std::vector<double> r(n + 1);
  for (int j = 0; j <= n; ++j) r[j] = radius * std::pow(double(j) / n, grading);

  std::vector<std::vector<int>> rings(n + 1);
  rings[0].push_back(add_vertex(m, Vec2::Zero()));
  for (int j = 1; j <= n; ++j) {
    double dr = (j < n) ? 0.5 * (r[j + 1] - r[j - 1]) : r[n] - r[n - 1];
    int mj = std::max(1, static_cast<int>(std::ceil(angle * r[j] / dr - 1e-9)));
    for (int k = 0; k <= mj; ++k) {
      double th = angle * k / mj;
      rings[j].push_back(add_vertex(m, Vec2(r[j] * std::cos(th), r[j] * std::sin(th))));
    }
  }
  for (int j = 0; j < n; ++j) zip(m.vertices, rings[j], rings[j + 1], m.triangles);

  std::vector<int> s_edge, b_edge;
  for (int j = 0; j <= n; ++j) s_edge.push_back(rings[j].front());
  for (int j = n; j >= 0; --j) b_edge.push_back(rings[j].back());
  chain_edges(m, s_edge, EdgeTag::Surface);
  chain_edges(m, rings[n], EdgeTag::Arc);
  chain_edges(m, b_edge, EdgeTag::Bottom);

  d.surface_nodes.assign(s_edge.rbegin(), s_edge.rend());  // outer end -> corner, fluid on the right
  d.bottom_nodes = b_edge;
  d.contact_nodes = {rings[0][0]};
  const Vec2 dir(std::cos(angle), std::sin(angle));
  d.bottom = std::make_shared<LineBottom>(Vec2::Zero(), -dir, radius);
  d.contact_angles = {angle};
  return d;
}

CornerDomain build_box(double width, double depth, double h, double delta) {
  if (!(width > 0) || !(depth > 0) || !(h > 0)) throw LabError(ErrorKind::InvalidInput, "box dimensions and h must be positive");
  CornerDomain d;
  d.kind = "box";
  Mesh& m = d.mesh;
  m.h = h;
  const int nx = std::max(1, static_cast<int>(std::ceil(width / h - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(depth / h - 1e-9)));
  std::vector<std::vector<int>> layer(ny + 1);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) layer[j].push_back(add_vertex(m, Vec2(width * i / nx, -depth * j / ny)));
  for (int j = 0; j < ny; ++j) zip(m.vertices, layer[j], layer[j + 1], m.triangles);

  std::vector<int> bottom;
  for (int j = 0; j <= ny; ++j) bottom.push_back(layer[j].front());
  for (int i = 1; i <= nx; ++i) bottom.push_back(layer[ny][i]);
  for (int j = ny - 1; j >= 0; --j) bottom.push_back(layer[j].back());
  chain_edges(m, bottom, EdgeTag::Bottom);
  std::vector<int> srev(layer[0].rbegin(), layer[0].rend());
  chain_edges(m, srev, EdgeTag::Surface);

  d.surface_nodes = layer[0];
  d.bottom_nodes = bottom;
  d.contact_nodes = {layer[0].front(), layer[0].back()};
  d.contact_angles = {kPi / 2, kPi / 2};
  d.bottom = std::make_shared<PolylineBottom>(std::vector<Vec2>{
      {0.0, depth}, {0.0, 0.0}, {0.0, -depth}, {width, -depth}, {width, 0.0}, {width, depth}});
  std::vector<Vec2> ref_nodes;
  for (int v : layer[0]) ref_nodes.push_back(m.vertices[v]);
  d.graph = flat_graph(make_reference_surface(ref_nodes, d.bottom, delta));
  return d;
}

CornerDomain build_beach(double omega, const std::optional<VecX>& surface_eta, double h, const BeachOptions& opts) {
  if (!(omega > 0 && omega < kPi / 2)) throw LabError(ErrorKind::InvalidInput, "beach slope must lie in (0, pi/2)");
  if (!(h > 0) || !(opts.length > 0)) throw LabError(ErrorKind::InvalidInput, "beach length and h must be positive");
  if (omega < opts.omega_min || omega > opts.omega_max) {
    std::ostringstream os;
    os << "contact angle " << omega << " outside [" << opts.omega_min << ", " << opts.omega_max << "]";
    throw LabError(ErrorKind::InvalidInput, os.str());
  }
  auto bottom = std::make_shared<ParabolaBottom>(omega, opts.length);
  const double depth = bottom->depth();
  const double L = opts.length;

  CornerDomain d;
  d.kind = "beach";
  Mesh& m = d.mesh;
  m.h = h;

  // Horizontal layers y_j = -j h, closed laterally by the bottom.
  int J = static_cast<int>(std::floor((depth - 0.5 * h) / h));
  if (J < 0) J = 0;
  struct Layer { std::vector<int> ids; };
  std::vector<Layer> layers(J + 1);
  auto make_layer = [&](double y, double xl, double xr) {
    Layer l;
    int nint = std::max(1, static_cast<int>(std::lround((xr - xl) / h)));
    for (int i = 0; i <= nint; ++i) l.ids.push_back(add_vertex(m, Vec2(xl + (xr - xl) * i / nint, y)));
    return l;
  };
  layers[0] = make_layer(0.0, 0.0, L);
  // Deeper layers reuse the surface abscissae so the interior grid is aligned column by column;
  // only the end cells adjacent to the bottom are irregular.
  const double hs = L / (static_cast<double>(layers[0].ids.size()) - 1.0);
  for (int j = 1; j <= J; ++j) {
    auto [xl, xr] = bottom->crossing(-j * h);
    Layer l;
    l.ids.push_back(add_vertex(m, Vec2(xl, -j * h)));
    for (size_t k = 1; k + 1 < layers[0].ids.size(); ++k) {
      const double x = k * hs;
      if (x > xl + 0.5 * hs && x < xr - 0.5 * hs) l.ids.push_back(add_vertex(m, Vec2(x, -j * h)));
    }
    l.ids.push_back(add_vertex(m, Vec2(xr, -j * h)));
    layers[j] = l;
  }
  // Bottom pieces between consecutive layer endpoints, parametrized by x.
  auto piece = [&](double xa, double xb) {
    double len = 0.0;
    const int sub = 64;
    for (int q = 0; q < sub; ++q) {
      double x0 = xa + (xb - xa) * q / sub, x1 = xa + (xb - xa) * (q + 1) / sub;
      len += (Vec2(x1, bottom->y(x1)) - Vec2(x0, bottom->y(x0))).norm();
    }
    int nint = std::max(1, static_cast<int>(std::lround(len / h)));
    std::vector<int> ids;
    for (int i = 1; i < nint; ++i) {
      double x = xa + (xb - xa) * i / nint;
      ids.push_back(add_vertex(m, Vec2(x, bottom->y(x))));
    }
    return ids;  // interior points only, ordered from xa to xb
  };

  std::vector<int> bottom_ids;
  std::vector<std::vector<int>> right_pieces(J);
  for (int j = 0; j < J; ++j) {
    const auto& up = layers[j].ids;
    const auto& lo = layers[j + 1].ids;
    auto left = piece(m.vertices[up.front()].x(), m.vertices[lo.front()].x());
    auto right = piece(m.vertices[lo.back()].x(), m.vertices[up.back()].x());
    std::vector<int> chain{up.front()};
    chain.insert(chain.end(), left.begin(), left.end());
    chain.insert(chain.end(), lo.begin(), lo.end());
    chain.insert(chain.end(), right.begin(), right.end());
    chain.push_back(up.back());
    zip(m.vertices, up, chain, m.triangles);
    bottom_ids.push_back(up.front());
    bottom_ids.insert(bottom_ids.end(), left.begin(), left.end());
    right_pieces[j] = right;
  }
  {
    const auto& up = layers[J].ids;
    auto arc = piece(m.vertices[up.front()].x(), m.vertices[up.back()].x());
    std::vector<int> chain{up.front()};
    chain.insert(chain.end(), arc.begin(), arc.end());
    chain.push_back(up.back());
    zip(m.vertices, up, chain, m.triangles);
    bottom_ids.push_back(up.front());
    bottom_ids.insert(bottom_ids.end(), arc.begin(), arc.end());
    bottom_ids.push_back(up.back());
  }
  for (int j = J - 1; j >= 0; --j) {
    bottom_ids.insert(bottom_ids.end(), right_pieces[j].begin(), right_pieces[j].end());
    bottom_ids.push_back(layers[j].ids.back());
  }
  chain_edges(m, bottom_ids, EdgeTag::Bottom);
  std::vector<int> srev(layers[0].ids.rbegin(), layers[0].ids.rend());
  chain_edges(m, srev, EdgeTag::Surface);

  d.surface_nodes = layers[0].ids;
  d.bottom_nodes = bottom_ids;
  d.contact_nodes = {layers[0].ids.front(), layers[0].ids.back()};
  d.contact_angles = {omega, omega};
  d.bottom = bottom;
  std::vector<Vec2> ref_nodes;
  for (int v : layers[0].ids) ref_nodes.push_back(m.vertices[v]);
  d.graph = flat_graph(make_reference_surface(ref_nodes, d.bottom, opts.delta));

  if (surface_eta) {
    if (surface_eta->size() != static_cast<Eigen::Index>(d.surface_nodes.size()))
      throw LabError(ErrorKind::InvalidInput, "surface_eta size does not match the surface node count " +
                                                  std::to_string(d.surface_nodes.size()));
    SurfaceGraph g = *d.graph;
    g.eta = *surface_eta;
    d = MeshMotion(d).deform(g);
    auto w = d.measured_contact_angles();
    for (double a : w)
      if (a < opts.omega_min || a > opts.omega_max) {
        std::ostringstream os;
        os << "perturbed contact angles (" << w[0] << ", " << w[1] << ") leave [" << opts.omega_min << ", "
           << opts.omega_max << "]";
        throw LabError(ErrorKind::InvalidInput, os.str());
      }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Mesh motion: surface from the graph, bottom nodes slide along M, interior by
// discrete harmonic extension of the boundary displacement.

struct MeshMotion::Impl {
  std::unique_ptr<ConstrainedSolver> solver;
};

MeshMotion::MeshMotion(const CornerDomain& rest) : rest_(rest) {
  if (!rest_.graph) throw LabError(ErrorKind::InvalidInput, "mesh motion requires a surface graph");
  const Mesh& m = rest_.mesh;
  std::vector<char> fixed(m.num_vertices(), 0);
  for (const auto& e : m.boundary) fixed[e.a] = fixed[e.b] = 1;
  impl_ = std::make_shared<Impl>();
  impl_->solver = std::make_unique<ConstrainedSolver>(assemble_stiffness(m), fixed);

  const auto& B = rest_.bottom;
  contact_param_left_ = B->project(m.vertices[rest_.surface_nodes.front()]).param;
  contact_param_right_ = B->project(m.vertices[rest_.surface_nodes.back()]).param;
  const double ell = B->sliding_length();
  for (int v : rest_.bottom_nodes) {
    double s = B->project(m.vertices[v]).param;
    bottom_param_.push_back(s);
    weight_left_.push_back(std::max(0.0, 1.0 - std::abs(s - contact_param_left_) / ell));
    weight_right_.push_back(std::max(0.0, 1.0 - std::abs(s - contact_param_right_) / ell));
  }
}

CornerDomain MeshMotion::deform(const SurfaceGraph& g) const {
  CornerDomain d = rest_;
  const Mesh& m0 = rest_.mesh;
  const int nv = m0.num_vertices();
  if (g.size() != static_cast<int>(rest_.surface_nodes.size()))
    throw LabError(ErrorKind::InvalidInput, "graph size does not match the surface");
  VecX dx = VecX::Zero(nv), dy = VecX::Zero(nv);
  const auto& B = rest_.bottom;
  const double sl = B->project(g.position(0)).param - contact_param_left_;
  const double sr = B->project(g.position(g.size() - 1)).param - contact_param_right_;
  for (size_t j = 0; j < rest_.bottom_nodes.size(); ++j) {
    int v = rest_.bottom_nodes[j];
    Vec2 p = B->at(bottom_param_[j] + sl * weight_left_[j] + sr * weight_right_[j]).point;
    dx[v] = p.x() - m0.vertices[v].x();
    dy[v] = p.y() - m0.vertices[v].y();
  }
  for (int i = 0; i < g.size(); ++i) {
    int v = rest_.surface_nodes[i];
    Vec2 p = g.position(i);
    dx[v] = p.x() - m0.vertices[v].x();
    dy[v] = p.y() - m0.vertices[v].y();
  }
  VecX zero = VecX::Zero(nv);
  VecX ux = impl_->solver->solve(zero, dx);
  VecX uy = impl_->solver->solve(zero, dy);
  for (int v = 0; v < nv; ++v) d.mesh.vertices[v] = m0.vertices[v] + Vec2(ux[v], uy[v]);
  d.graph = g;
  d.contact_angles = d.measured_contact_angles();
  return d;
}

CornerDomain translate(const CornerDomain& d, const Vec2& shift) {
  CornerDomain out = d;
  for (auto& v : out.mesh.vertices) v += shift;
  out.bottom = std::make_shared<ShiftedBottom>(d.bottom, shift);
  if (d.graph) {
    auto ref = std::make_shared<ReferenceSurface>(*d.graph->ref);
    for (auto& p : ref->nodes) p += shift;
    ref->bottom = out.bottom;
    out.graph->ref = ref;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> curvature(const std::vector<Vec2>& c) {
  const size_t n = c.size();
  if (n < 3) throw LabError(ErrorKind::InvalidInput, "curvature needs at least 3 nodes");
  for (size_t i = 1; i < n; ++i)
    if ((c[i] - c[i - 1]).norm() == 0.0) throw LabError(ErrorKind::InvalidInput, "duplicate curve nodes");
  auto menger = [&](size_t a, size_t b, size_t e) {
    double den = (c[b] - c[a]).norm() * (c[e] - c[b]).norm() * (c[e] - c[a]).norm();
    return -2.0 * cross(c[b] - c[a], c[e] - c[b]) / den;
  };
  std::vector<double> k(n);
  for (size_t i = 1; i + 1 < n; ++i) k[i] = menger(i - 1, i, i + 1);
  k[0] = menger(0, 1, 2);
  k[n - 1] = menger(n - 3, n - 2, n - 1);
  return k;
}

double neighborhood_distance(const SurfaceGraph& s, double sigma) {
  const auto& nodes = s.ref->nodes;
  const size_t n = nodes.size();
  std::vector<double> arc(n, 0.0);
  for (size_t i = 1; i < n; ++i) arc[i] = arc[i - 1] + (nodes[i] - nodes[i - 1]).norm();
  const double len = arc.back();
  std::vector<double> w(n, 0.0);  // trapezoid weights
  for (size_t i = 0; i + 1 < n; ++i) {
    double hseg = arc[i + 1] - arc[i];
    w[i] += 0.5 * hseg;
    w[i + 1] += 0.5 * hseg;
  }
  double total = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double xi = kPi * double(k) / len;
    const double norm2 = (k == 0 || k + 1 == n) ? len : 0.5 * len;
    double proj = 0.0;
    for (size_t i = 0; i < n; ++i) proj += w[i] * s.eta[i] * std::cos(xi * arc[i]);
    double ck = proj / norm2;
    total += std::pow(1.0 + xi * xi, sigma) * ck * ck * norm2;
  }
  return std::sqrt(total);
}

SurfaceGraph advect_surface(const SurfaceGraph& s, const std::vector<Vec2>& v, double dt) {
  if (v.size() != static_cast<size_t>(s.size())) throw LabError(ErrorKind::InvalidInput, "velocity size mismatch");
  auto N = nodal_tangents(s.curve());
  for (auto& t : N) t = perp(t);
  SurfaceGraph out = s;
  for (int i = 0; i < s.size(); ++i) {
    double denom = s.chart_derivative(i).dot(N[i]);
    out.eta[i] = s.eta[i] + dt * v[i].dot(N[i]) / denom;
    if (std::abs(out.eta[i]) >= s.ref->delta)
      throw LabError(ErrorKind::MonitorHalt, "collar overflow at surface node " + std::to_string(i));
  }
  return out;
}

std::string domain_to_json(const CornerDomain& d) {
  nlohmann::ordered_json j;
  j["kind"] = d.kind;
  j["h"] = d.mesh.h;
  j["grading"] = d.mesh.grading;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : d.mesh.vertices) verts.push_back({v.x(), v.y()});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : d.mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  auto& tags = j["boundary_tags"] = nlohmann::json::array();
  for (const auto& e : d.mesh.boundary) tags.push_back({{"a", e.a}, {"b", e.b}, {"tag", to_string(e.tag)}});
  auto& cps = j["contact_points"] = nlohmann::json::array();
  for (const auto& p : d.contact_points()) cps.push_back({p.x(), p.y()});
  j["angles"] = d.contact_angles;
  j["surface_nodes"] = d.surface_nodes;
  return j.dump();
}

}  // namespace beachlab
