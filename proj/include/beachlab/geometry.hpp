#pragma once

#include "beachlab/common.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace beachlab {

// ---------------------------------------------------------------------------
// Analytic bottom manifold M. Outward normal points out of the fluid, and
// d(normal)/ds = curvature * tangent, with s the arclength along `tangent`.
// ---------------------------------------------------------------------------
struct BottomFrame {
  Vec2 point;
  Vec2 tangent;
  Vec2 normal;
  double curvature = 0.0;
  double dcurvature = 0.0;  // derivative of curvature w.r.t. arclength
  double param = 0.0;
};

class BottomCurve {
 public:
  virtual ~BottomCurve() = default;
  virtual BottomFrame at(double param) const = 0;
  virtual BottomFrame project(const Vec2& x) const = 0;
  // Parameter span over which bottom nodes may slide when a contact point moves.
  virtual double sliding_length() const = 0;
  virtual bool is_flat() const = 0;
  virtual std::string describe() const = 0;
};

// Straight line origin + s*dir (dir unit); fluid on the left of dir, as for every bottom.
class LineBottom final : public BottomCurve {
 public:
  LineBottom(Vec2 origin, Vec2 dir, double length);
  BottomFrame at(double param) const override;
  BottomFrame project(const Vec2& x) const override;
  double sliding_length() const override { return 0.25 * length_; }
  bool is_flat() const override { return true; }
  std::string describe() const override { return "line"; }

 private:
  Vec2 origin_, dir_;
  double length_;
};

// Polyline, parameter is arclength.
class PolylineBottom final : public BottomCurve {
 public:
  explicit PolylineBottom(std::vector<Vec2> pts);
  BottomFrame at(double param) const override;
  BottomFrame project(const Vec2& x) const override;
  double sliding_length() const override;
  bool is_flat() const override { return true; }
  std::string describe() const override { return "polyline"; }
  double total_length() const { return cum_.back(); }

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

// y = c (x - x0) (x - x0 - L) with c = tan(omega)/L: meets y = 0 at angle omega on both ends.
class ParabolaBottom final : public BottomCurve {
 public:
  ParabolaBottom(double omega, double length, double x0 = 0.0);
  BottomFrame at(double x) const override;
  BottomFrame project(const Vec2& x) const override;
  double sliding_length() const override { return 0.25 * length_; }
  bool is_flat() const override { return false; }
  std::string describe() const override { return "parabola"; }
  double y(double x) const;
  double depth() const { return c_ * length_ * length_ / 4.0; }
  // x-coordinates where the bottom crosses height yv (yv in [-depth, 0]).
  std::pair<double, double> crossing(double yv) const;

 private:
  double c_, length_, x0_;
};

// Rigid translation of another bottom.
class ShiftedBottom final : public BottomCurve {
 public:
  ShiftedBottom(std::shared_ptr<const BottomCurve> base, Vec2 shift) : base_(std::move(base)), shift_(shift) {}
  BottomFrame at(double param) const override;
  BottomFrame project(const Vec2& x) const override;
  double sliding_length() const override { return base_->sliding_length(); }
  bool is_flat() const override { return base_->is_flat(); }
  std::string describe() const override { return base_->describe(); }

 private:
  std::shared_ptr<const BottomCurve> base_;
  Vec2 shift_;
};

// ---------------------------------------------------------------------------
// Reference surface S_* with transversal collar field X, and graphs over it.
// ---------------------------------------------------------------------------
struct ReferenceSurface {
  std::vector<Vec2> nodes;        // ordered, fluid on the right-hand side
  std::vector<Vec2> transversal;  // unit X per node
  std::shared_ptr<const BottomCurve> bottom;
  double delta = 0.1;             // collar half-width
  // Blend weights of the two ends. Nodes near a contact point also follow the bottom's
  // departure from its tangent line, so the collar bends with the bottom.
  std::vector<double> bend_left, bend_right;
  double length() const;
  // Bottom curve minus its tangent line at end node i (0 or n-1), at collar coordinate e.
  Vec2 end_correction(int i, double e) const;
};

// X = outward normal in the interior, bottom tangent at the endpoints,
// blended by a smooth partition of unity over `blend_fraction` of the length.
std::shared_ptr<ReferenceSurface> make_reference_surface(std::vector<Vec2> nodes,
                                                         std::shared_ptr<const BottomCurve> bottom,
                                                         double delta, double blend_fraction = 0.1);

struct SurfaceGraph {
  std::shared_ptr<const ReferenceSurface> ref;
  VecX eta;

  int size() const { return static_cast<int>(eta.size()); }
  Vec2 position(int i) const { return position(i, eta[i]); }
  Vec2 position(int i, double e) const;
  // d position / d eta at node i.
  Vec2 chart_derivative(int i) const;
  std::vector<Vec2> curve() const;
};

SurfaceGraph flat_graph(std::shared_ptr<const ReferenceSurface> ref);

// ---------------------------------------------------------------------------
// Mesh and corner domain.
// ---------------------------------------------------------------------------
enum class EdgeTag { Surface, Bottom, Arc };
enum class NodeTag { Interior, Surface, Bottom, Contact, Arc };

const char* to_string(EdgeTag t);
const char* to_string(NodeTag t);

struct BoundaryEdge {
  int a = 0, b = 0;  // domain on the left of a->b
  EdgeTag tag = EdgeTag::Bottom;
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<BoundaryEdge> boundary;
  double h = 0.0;
  double grading = 1.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  double area() const;
  double boundary_length() const;
  double min_signed_area() const;
  std::vector<NodeTag> node_tags() const;
  std::vector<std::vector<int>> vertex_neighbors() const;
  double max_edge_length() const;
};

struct CornerDomain {
  std::string kind;  // "sector" | "box" | "beach"
  Mesh mesh;
  std::vector<int> surface_nodes;  // ordered along S (fluid on the right)
  std::vector<int> bottom_nodes;   // ordered along B
  std::vector<int> contact_nodes;  // vertices on the water line L
  std::vector<double> contact_angles;
  std::shared_ptr<const BottomCurve> bottom;
  std::optional<SurfaceGraph> graph;  // present for box and beach
  double radius = 0.0;                // sector only

  std::vector<Vec2> contact_points() const;
  // Outward unit normal at each surface node (one-sided at the ends).
  std::vector<Vec2> surface_normals() const;
  std::vector<Vec2> surface_tangents() const;
  std::vector<Vec2> surface_curve() const;
  // <nu, N> at contact point c, with nu from the analytic bottom.
  double nu_dot_N(int c) const;
  std::vector<double> measured_contact_angles() const;
};

struct BeachOptions {
  double length = 2.0;
  double omega_min = 0.05;
  double omega_max = kPi / 2.0 - 0.05;
  double delta = 0.1;
};

CornerDomain build_sector(double angle, double radius, double h, double grading = 1.0);
CornerDomain build_box(double width, double depth, double h, double delta = 0.1);
CornerDomain build_beach(double bottom_slope, const std::optional<VecX>& surface_eta, double h,
                         const BeachOptions& opts = {});

// Default corner grading exponent max(1, 2/lambda_1) with lambda_1 = pi/(2 omega).
double default_grading(double omega);

// Moves a rest box/beach domain onto a new surface graph, keeping connectivity.
class MeshMotion {
 public:
  explicit MeshMotion(const CornerDomain& rest);
  CornerDomain deform(const SurfaceGraph& g) const;
  const CornerDomain& rest() const { return rest_; }

 private:
  CornerDomain rest_;
  std::vector<int> interior_index_;  // vertex -> interior unknown or -1
  std::vector<double> bottom_param_;
  std::vector<double> weight_left_, weight_right_;
  double contact_param_left_ = 0.0, contact_param_right_ = 0.0;
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

CornerDomain translate(const CornerDomain& d, const Vec2& shift);

// Signed curvature per node; positive when the curve turns toward its right-hand side.
std::vector<double> curvature(const std::vector<Vec2>& curve);

// Spectral Sobolev-type norm of eta on the reference curve, weight (1+xi^2)^{sigma/2}.
double neighborhood_distance(const SurfaceGraph& s, double sigma);

// Normal motion of the surface: eta_t = <v,N>/<dPhi/deta,N>. Throws if the collar overflows.
SurfaceGraph advect_surface(const SurfaceGraph& s, const std::vector<Vec2>& surface_velocity, double dt);

std::string domain_to_json(const CornerDomain& d);

}  // namespace beachlab
