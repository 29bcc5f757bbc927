#include <doctest.h>

#include "beachlab/fem.hpp"
#include "beachlab/geometry.hpp"

#include <cmath>
#include <map>

using namespace beachlab;

namespace {

// Every interior edge shared by exactly two triangles, boundary edges by one,
// and the tagged boundary matches the one-sided edges with consistent direction.
void check_conforming(const Mesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) count[{t[k], t[(k + 1) % 3]}]++;
  int boundary = 0;
  for (const auto& [e, c] : count) {
    CHECK(c == 1);
    if (!count.count({e.second, e.first})) ++boundary;
  }
  CHECK(boundary == static_cast<int>(m.boundary.size()));
  for (const auto& e : m.boundary) CHECK(count.count({e.a, e.b}) == 1);
}

}  // namespace

TEST_CASE("sector mesh") {
  auto d = build_sector(kPi / 2, 1.0, 0.1);
  CHECK(d.contact_angles[0] == doctest::Approx(kPi / 2));
  CHECK(d.mesh.min_signed_area() > 0);
  check_conforming(d.mesh);
  CHECK(d.mesh.area() == doctest::Approx(kPi / 4).epsilon(0.01));

  auto d5 = build_sector(kPi / 5, 1.0, 0.05);
  CHECK(d5.nu_dot_N(0) == doctest::Approx(-std::cos(kPi / 5)).epsilon(1e-12));
  CHECK(d5.measured_contact_angles()[0] == doctest::Approx(kPi / 5));

  auto g = build_sector(3 * kPi / 4, 1.0, 0.1, 1.5);
  CHECK(g.mesh.min_signed_area() > 0);
  check_conforming(g.mesh);
  CHECK_THROWS_AS(build_sector(0.0, 1.0, 0.1), LabError);
}

TEST_CASE("graded sizes follow the grading law") {
  const double beta = 1.5, h = 0.05;
  auto d = build_sector(3 * kPi / 4, 1.0, h, beta);
  for (const auto& t : d.mesh.triangles) {
    Vec2 c = (d.mesh.vertices[t[0]] + d.mesh.vertices[t[1]] + d.mesh.vertices[t[2]]) / 3.0;
    double he = 0.0;
    for (int k = 0; k < 3; ++k) he = std::max(he, (d.mesh.vertices[t[k]] - d.mesh.vertices[t[(k + 1) % 3]]).norm());
    double r = c.norm();
    if (r < 2 * h) continue;
    double target = h * std::pow(r, 1.0 - 1.0 / beta);
    CHECK(he < 2.5 * target);
    CHECK(he > target / 2.5);
  }
}

TEST_CASE("box mesh") {
  auto d = build_box(1, 1, 0.05);
  CHECK(d.contact_angles[0] == doctest::Approx(kPi / 2));
  CHECK(d.contact_angles[1] == doctest::Approx(kPi / 2));
  CHECK(std::abs(d.mesh.boundary_length() - 4.0) < 1e-12);
  check_conforming(d.mesh);
  auto d2 = build_box(2, 1, 0.1);
  CHECK(d2.mesh.area() == doctest::Approx(2.0).epsilon(1e-12));
  auto w = d.measured_contact_angles();
  CHECK(w[0] == doctest::Approx(kPi / 2));
  CHECK(w[1] == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(build_box(0, 1, 0.1), LabError);
}

TEST_CASE("beach mesh") {
  for (double om : {kPi / 8, kPi / 5, kPi / 4}) {
    auto d = build_beach(om, std::nullopt, 0.05);
    CHECK(d.mesh.min_signed_area() > 0);
    check_conforming(d.mesh);
    for (double a : d.measured_contact_angles()) CHECK(std::abs(a - om) < 1e-3);
    CHECK(d.nu_dot_N(0) == doctest::Approx(-std::cos(om)).epsilon(1e-3));
    // Area under the parabola: c L^3 / 6 with c = tan(om)/L.
    double L = 2.0, exact = std::tan(om) * L * L / 6.0;
    CHECK(d.mesh.area() == doctest::Approx(exact).epsilon(0.01));
  }
}

TEST_CASE("beach with perturbed surface") {
  auto flat = build_beach(kPi / 5, std::nullopt, 0.05);
  const int n = static_cast<int>(flat.surface_nodes.size());
  const double depth = std::tan(kPi / 5) * 2.0 / 4.0;
  VecX small(n), big(n);
  for (int i = 0; i < n; ++i) {
    double x = flat.mesh.vertices[flat.surface_nodes[i]].x();
    small[i] = 0.01 * std::cos(kPi * x / 2.0);
    big[i] = 0.4 * depth * std::cos(kPi * x / 2.0);
  }
  auto d = build_beach(kPi / 5, small, 0.05);
  CHECK(d.mesh.min_signed_area() > 0);
  BeachOptions tight;
  tight.omega_min = 0.55;
  tight.omega_max = 0.75;
  tight.delta = 1.0;
  CHECK_THROWS_AS(build_beach(kPi / 5, big, 0.05, tight), LabError);
}

TEST_CASE("reference surface collar field") {
  auto d = build_beach(kPi / 5, std::nullopt, 0.05);
  const auto& ref = *d.graph->ref;
  auto tang = d.surface_tangents();
  for (size_t i = 0; i < ref.nodes.size(); ++i) {
    CHECK(ref.transversal[i].norm() == doctest::Approx(1.0));
    CHECK(std::abs(ref.transversal[i].dot(tang[i])) < 1 - 1e-6);
  }
  for (size_t i : {size_t(0), ref.nodes.size() - 1}) {
    Vec2 t = d.bottom->project(ref.nodes[i]).tangent;
    CHECK(std::abs(cross(t, ref.transversal[i])) < 1e-10);
  }
}

TEST_CASE("curvature") {
  std::vector<Vec2> arc;
  for (int i = 0; i <= 40; ++i) {
    double t = -0.5 + i / 40.0;
    arc.emplace_back(2 * std::sin(t), 2 * std::cos(t) - 2);  // bends downward, toward a fluid below
  }
  for (double k : curvature(arc)) CHECK(k == doctest::Approx(0.5).epsilon(1e-3));
  std::vector<Vec2> line{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  for (double k : curvature(line)) CHECK(k == doctest::Approx(0.0));
  // y = -x^2/2 near the apex, traversed left to right.
  double prev = 1.0;
  for (double h : {0.1, 0.05, 0.025}) {
    std::vector<Vec2> p;
    for (int i = -2; i <= 2; ++i) p.emplace_back(i * h, -0.5 * (i * h) * (i * h));
    double err = std::abs(curvature(p)[2] - 1.0);
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
  CHECK_THROWS_AS(curvature({{0, 0}, {0, 0}, {1, 0}}), LabError);
}

TEST_CASE("neighborhood distance") {
  auto d = build_box(1, 1, 0.02);
  SurfaceGraph g = *d.graph;
  CHECK(neighborhood_distance(g, 1.0) == 0.0);
  g.eta.setConstant(0.01);
  CHECK(neighborhood_distance(g, 1.0) == doctest::Approx(0.01).epsilon(1e-9));
  // cos(k pi x) on [0,1]: norm^2 = (1+(k pi)^2)^sigma * A^2 / 2.
  const double A = 0.02, sigma = 2.0;
  for (int i = 0; i < g.size(); ++i) g.eta[i] = A * std::cos(2 * kPi * g.ref->nodes[i].x());
  double oracle = A * std::pow(1 + 4 * kPi * kPi, sigma / 2) * std::sqrt(0.5);
  CHECK(neighborhood_distance(g, sigma) == doctest::Approx(oracle).epsilon(1e-3));
  VecX e = g.eta;
  g.eta = 2 * e;
  CHECK(neighborhood_distance(g, sigma) == doctest::Approx(2 * oracle).epsilon(1e-3));
}

TEST_CASE("advect surface") {
  auto d = build_box(1, 1, 0.05);
  SurfaceGraph g = *d.graph;
  std::vector<Vec2> zero(g.size(), Vec2::Zero()), up(g.size(), Vec2(0, 0.3));
  auto same = advect_surface(g, zero, 0.1);
  CHECK((same.eta - g.eta).norm() == 0.0);
  auto moved = advect_surface(g, up, 0.01);
  for (int i = 1; i + 1 < g.size(); ++i) CHECK(moved.eta[i] == doctest::Approx(0.003));
  std::vector<Vec2> fast(g.size(), Vec2(0, 100.0));
  CHECK_THROWS_AS(advect_surface(g, fast, 0.01), LabError);
}

TEST_CASE("mesh motion keeps connectivity and contact on the bottom") {
  auto d = build_beach(kPi / 5, std::nullopt, 0.05);
  MeshMotion mm(d);
  SurfaceGraph g = *d.graph;
  for (int i = 0; i < g.size(); ++i) g.eta[i] = 0.02 * std::cos(kPi * g.ref->nodes[i].x() / 2.0);
  auto moved = mm.deform(g);
  CHECK(moved.mesh.min_signed_area() > 0);
  for (const auto& p : moved.contact_points()) CHECK((d.bottom->project(p).point - p).norm() < 1e-10);
  auto rest = mm.deform(*d.graph);
  for (int v = 0; v < d.mesh.num_vertices(); ++v) CHECK((rest.mesh.vertices[v] - d.mesh.vertices[v]).norm() < 1e-12);
  // Area of the perturbed fluid: bump is odd about x=1 so area is unchanged to first order.
  CHECK(moved.mesh.area() == doctest::Approx(d.mesh.area()).epsilon(2e-3));
}

TEST_CASE("json serialization") {
  auto d = build_box(1, 1, 0.5);
  auto s = domain_to_json(d);
  CHECK(s.find("\"vertices\"") != std::string::npos);
  CHECK(s.find("\"boundary_tags\"") != std::string::npos);
  CHECK(s.find("\"contact_points\"") != std::string::npos);
}
