#include <doctest.h>

#include "beachlab/dtn.hpp"
#include "beachlab/elliptic.hpp"

#include <cmath>

using namespace beachlab;

TEST_CASE("DtN structure on box and beaches") {
  std::vector<CornerDomain> doms{build_box(1, 1, 0.05)};
  for (double om : {kPi / 8, kPi / 5, kPi / 4}) doms.push_back(build_beach(om, std::nullopt, 0.05));
  for (const auto& d : doms) {
    DtNOperator N(d);
    CHECK(N.self_adjoint_defect() < 1e-8);
    VecX one = VecX::Ones(N.size());
    CHECK(N.apply(one).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(N.eigenvalues()[0] > -1e-10);
    CHECK(std::abs(N.eigenvalues()[0]) < 1e-10);
    CHECK(N.eigenvalues()[1] > 1e-3);
    CHECK(N.orthonormality_error() < 1e-10);
    // phi_0 is constant
    VecX p0 = N.eigenvectors().col(0);
    CHECK((p0.array() - p0.mean()).abs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("DtN agrees with the weak flux of the harmonic extension") {
  auto d = build_beach(kPi / 5, std::nullopt, 0.05);
  DtNOperator N(d);
  const int ns = N.size();
  VecX f(ns);
  for (int i = 0; i < ns; ++i) f[i] = std::sin(3.0 * d.mesh.vertices[d.surface_nodes[i]].x());
  auto data = BoundaryDataTriple::zeros(d.mesh.num_vertices());
  for (int i = 0; i < ns; ++i) data.f[d.surface_nodes[i]] = f[i];
  MixedSolver s(d);
  VecX u = s.solve(data);
  VecX flux = s.surface_flux(u, s.load(data));
  CHECK((flux - N.apply(f)).cwiseAbs().maxCoeff() < 1e-8 * flux.cwiseAbs().maxCoeff());
  // Energy identity f^T K f = a(Hf, Hf).
  CHECK(f.dot(N.stiffness() * f) == doctest::Approx(u.dot(s.stiffness() * u)).epsilon(1e-10));
}

TEST_CASE("box eigenvalues match separation of variables") {
  auto d = build_box(1, 1, 0.02);
  DtNOperator N(d);
  for (int k = 1; k <= 5; ++k) {
    double oracle = box_dtn_eigenvalue(k, 1, 1);
    double rel = std::abs(N.eigenvalues()[k] - oracle) / oracle;
    CHECK(rel < (k == 1 ? 0.02 : 0.05));
  }
  CHECK(box_dtn_eigenvalue(1, 1, 1) == doctest::Approx(kPi * std::tanh(kPi)));
  // Order-one growth: lambda_k / (k pi) -> 1.
  for (int k = 3; k <= 10; ++k) CHECK(N.eigenvalues()[k] / (k * kPi) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fractional powers and Sobolev norms") {
  auto d = build_box(1, 1, 0.05);
  DtNOperator N(d);
  const int ns = N.size();
  VecX f(ns);
  for (int i = 0; i < ns; ++i) f[i] = std::exp(d.mesh.vertices[d.surface_nodes[i]].x());
  CHECK((N.fractional_power(0.0, f) - f).norm() < 1e-10 * f.norm());
  VecX p1 = N.eigenvectors().col(1);
  CHECK((N.fractional_power(1.0, p1) - N.eigenvalues()[1] * p1).norm() < 1e-10);
  VecX half2 = N.fractional_power(0.5, N.fractional_power(0.5, f));
  VecX one = N.fractional_power(1.0, f);
  CHECK((half2 - one).norm() < 1e-8 * one.norm());
  CHECK((one - N.apply(f)).norm() < 1e-8 * one.norm());
  CHECK(N.sobolev_norm(VecX::Zero(ns), 1.0) == 0.0);
  CHECK(N.sobolev_norm(f, 0.0) == doctest::Approx(N.l2_norm(f)).epsilon(1e-12));
  CHECK(N.sobolev_norm(p1, 1.0) == doctest::Approx((1 + N.eigenvalues()[1]) * N.l2_norm(p1)).epsilon(1e-12));
  CHECK(N.eigenvalues()[1] == doctest::Approx(3.130).epsilon(0.02));
}
