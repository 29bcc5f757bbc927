#include <doctest.h>

#include "beachlab/sector.hpp"

#include <cmath>
#include <complex>

using namespace beachlab;

namespace {

// Shooting oracle: RK4 on v'' = -lambda^2 v from the theta = 0 condition,
// returns the residual of the theta = omega condition.
double shoot(BoundaryPair bc, double omega, double lambda) {
  double v = bc == BoundaryPair::NeumannNeumann ? 1.0 : 0.0;
  double w = bc == BoundaryPair::NeumannNeumann ? 0.0 : lambda;
  const int n = 4000;
  const double h = omega / n, l2 = lambda * lambda;
  for (int i = 0; i < n; ++i) {
    double k1v = w, k1w = -l2 * v;
    double k2v = w + 0.5 * h * k1w, k2w = -l2 * (v + 0.5 * h * k1v);
    double k3v = w + 0.5 * h * k2w, k3w = -l2 * (v + 0.5 * h * k2v);
    double k4v = w + h * k3w, k4w = -l2 * (v + h * k3v);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
  }
  return bc == BoundaryPair::DirichletDirichlet ? v : w / lambda;
}

std::vector<double> shooting_roots(BoundaryPair bc, double omega, int count) {
  std::vector<double> roots;
  double a = 1e-3, fa = shoot(bc, omega, a);
  while (static_cast<int>(roots.size()) < count) {
    double b = a + 0.01, fb = shoot(bc, omega, b);
    if (fa * fb < 0) {
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (x0 + x1), fm = shoot(bc, omega, m);
        if ((fm < 0) == (f0 < 0)) { x0 = m; f0 = fm; } else x1 = m;
      }
      roots.push_back(0.5 * (x0 + x1));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

// Lanczos approximation (g = 7, n = 9) with reflection.
std::complex<double> gamma_c(std::complex<double> z) {
  static const double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059,   12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * gamma_c(1.0 - z));
  z -= 1.0;
  std::complex<double> x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + double(i));
  std::complex<double> t = z + 7.5;
  return std::sqrt(2 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("singular exponents") {
  auto dn = singular_exponents(BoundaryPair::DirichletNeumann, kPi / 2, 3);
  CHECK(dn == std::vector<double>{1, 3, 5});
  auto nn = singular_exponents(BoundaryPair::NeumannNeumann, kPi / 2, 3);
  CHECK(nn == std::vector<double>{2, 4, 6});
  auto dd = singular_exponents(BoundaryPair::DirichletDirichlet, kPi, 3);
  CHECK(dd == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(singular_exponents(BoundaryPair::NeumannNeumann, 0.0, 3), LabError);
  CHECK_THROWS_AS(singular_exponents(BoundaryPair::NeumannNeumann, 3.5, 3), LabError);
}

TEST_CASE("pencil roots agree with shooting and with the formula") {
  for (auto bc : {BoundaryPair::DirichletNeumann, BoundaryPair::NeumannNeumann, BoundaryPair::DirichletDirichlet})
    for (double om : {kPi / 8, kPi / 5, kPi / 4, kPi / 2, 3 * kPi / 4}) {
      auto formula = singular_exponents(bc, om, 6);
      OperatorPencil p{om, Mat2::Identity(), bc};
      auto num = pencil_exponents_numeric(p, 0.0, formula.back() + 0.1);
      CHECK(num.failures.empty());
      REQUIRE(num.roots.size() == formula.size());
      auto sh = shooting_roots(bc, om, 3);
      for (size_t k = 0; k < formula.size(); ++k) CHECK(std::abs(num.roots[k] - formula[k]) < 1e-8);
      for (size_t k = 0; k < sh.size(); ++k) CHECK(std::abs(num.roots[k] - sh[k]) < 1e-7);
    }
  OperatorPencil a{kPi / 4, Mat2::Identity(), BoundaryPair::DirichletNeumann};
  CHECK(std::abs(pencil_exponents_numeric(a, 0, 3).roots.at(0) - 2.0) < 1e-8);
  OperatorPencil b{kPi / 3, Mat2::Identity(), BoundaryPair::NeumannNeumann};
  CHECK(std::abs(pencil_exponents_numeric(b, 0, 4).roots.at(0) - 3.0) < 1e-8);
}

TEST_CASE("anisotropic pencil reduces to the mapped angle") {
  Mat2 alpha;
  alpha << 4, 0, 0, 1;
  for (double om : {kPi / 2, kPi / 5, 2.0}) {
    // Image of the edge directions under (x, y) -> (x/2, y).
    Vec2 e0(0.5, 0.0), e1(0.5 * std::cos(om), std::sin(om));
    double mapped = std::atan2(cross(e0, e1), e0.dot(e1));
    CHECK(mapped_angle(alpha, om) == doctest::Approx(mapped).epsilon(1e-14));
    OperatorPencil p{om, alpha, BoundaryPair::DirichletNeumann};
    auto expect = singular_exponents(BoundaryPair::DirichletNeumann, mapped, 4);
    auto got = pencil_exponents_numeric(p, 0, expect.back() + 0.1).roots;
    REQUIRE(got.size() == expect.size());
    for (size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - expect[k]) < 1e-8);
  }
  Mat2 gen;
  gen << 2.0, 0.7, 0.7, 1.0;
  OperatorPencil p{kPi / 3, gen, BoundaryPair::NeumannNeumann};
  double m = mapped_angle(gen, kPi / 3);
  auto got = pencil_exponents_numeric(p, 0, 3 * kPi / m + 0.1).roots;
  auto sh = shooting_roots(BoundaryPair::NeumannNeumann, m, 3);
  REQUIRE(got.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(got[k] - sh[k]) < 1e-7);
}

TEST_CASE("first DN exponent decreases with the angle") {
  double prev = 1e9;
  for (double om = 0.1; om < kPi; om += 0.1) {
    double l = singular_exponents(BoundaryPair::DirichletNeumann, om, 1)[0];
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("singular functions") {
  auto s = singular_function(BoundaryPair::DirichletNeumann, kPi / 2, 0);
  CHECK(s.lambda == doctest::Approx(1.0));
  CHECK(s.value({0.3, 0.7}) == doctest::Approx(0.7));
  auto q = singular_function(BoundaryPair::DirichletNeumann, kPi / 4, 0);
  CHECK(q.value({0.3, 0.2}) == doctest::Approx(2 * 0.3 * 0.2));
  CHECK_THROWS_AS(singular_function(BoundaryPair::NeumannNeumann, kPi / 4, 0), LabError);

  for (auto bc : {BoundaryPair::DirichletNeumann, BoundaryPair::NeumannNeumann, BoundaryPair::DirichletDirichlet}) {
    const double om = 3 * kPi / 4;
    auto f = singular_function(bc, om, bc == BoundaryPair::DirichletNeumann ? 0 : 1);
    // Five-point Laplacian with Richardson extrapolation in h.
    double worst = 0.0;
    for (double r : {0.3, 0.6, 0.9})
      for (double th : {0.3, 1.0, 2.0}) {
        Vec2 x(r * std::cos(th), r * std::sin(th));
        auto lap = [&](double h) {
          return (f.value(x + Vec2(h, 0)) + f.value(x - Vec2(h, 0)) + f.value(x + Vec2(0, h)) +
                  f.value(x - Vec2(0, h)) - 4 * f.value(x)) / (h * h);
        };
        worst = std::max(worst, std::abs((16 * lap(1e-3) - lap(2e-3)) / 15));
      }
    CHECK(worst < 2e-5);  // h^4 remainder near the corner dominates
    // Angular ODE residual and edge conditions.
    for (size_t i = 1; i + 1 < f.theta.size(); ++i) {
      double res = -f.lambda * f.lambda * f.angular(f.theta[i]) + f.lambda * f.lambda * f.profile[i];
      CHECK(std::abs(res) < 1e-10);
    }
    if (bc == BoundaryPair::NeumannNeumann) CHECK(std::abs(f.dangular(0)) < 1e-12);
    else CHECK(std::abs(f.profile.front()) < 1e-12);
    if (bc == BoundaryPair::DirichletDirichlet) CHECK(std::abs(f.profile.back()) < 1e-12);
    else CHECK(std::abs(f.dangular(om)) < 1e-12);
    CHECK(std::abs(pencil_determinant(bc, om, f.lambda)) < 1e-12);
  }
}

TEST_CASE("analytic singular-function Laplacian on a grid") {
  // r^{2/3} sin(2 theta / 3): closed-form second derivatives in polar form.
  auto f = singular_function(BoundaryPair::DirichletNeumann, 3 * kPi / 4, 0);
  CHECK(f.lambda == doctest::Approx(2.0 / 3.0));
  for (double r = 0.1; r <= 1.0; r += 0.1)
    for (double th = 0.0; th <= 3 * kPi / 4; th += 0.1) {
      double l = f.lambda, v = std::sin(l * th), vpp = -l * l * std::sin(l * th);
      double lap = std::pow(r, l - 2) * (l * l * v + vpp);
      CHECK(std::abs(lap) < 1e-9);
    }
}

TEST_CASE("regularity threshold and config validation") {
  CHECK(regularity_threshold(BoundaryPair::DirichletNeumann, kPi / 4) == doctest::Approx(3.0));
  CHECK(regularity_threshold(BoundaryPair::DirichletNeumann, kPi / 2) == doctest::Approx(2.0));
  CHECK(regularity_threshold(BoundaryPair::NeumannNeumann, kPi / 2) == doctest::Approx(3.0));
  auto ok = validate_config(2.5, kPi / 5);
  CHECK(ok.valid);
  CHECK(ok.upper == doctest::Approx(3.0));
  auto bad = validate_config(2.5, kPi / 3);
  CHECK_FALSE(bad.valid);
  CHECK(bad.upper == doctest::Approx(2.0));
  CHECK_FALSE(validate_config(2.0, kPi / 5).valid);
  for (double s = 2.05; s < 3.5; s += 0.1) {
    bool prev = false;
    for (double om = 1.5; om > 0.05; om -= 0.05) {
      bool v = validate_config(s, om).valid;
      if (prev) CHECK(v);
      prev = v;
    }
  }
}

TEST_CASE("Mellin transform against Gamma") {
  auto u = sample_radial([](double r) { return std::exp(-r); }, 1e-18, 80.0, 4001);
  CHECK(std::abs(mellin(u, -1.0) - 1.0) < 1e-6);
  CHECK(std::abs(mellin(u, -2.0) - 1.0) < 1e-6);
  for (double z : {0.0, 1.5, 7.0}) {
    std::complex<double> lam(-1.5, z);
    CHECK(std::abs(mellin(u, lam) - gamma_c(-lam)) < 1e-6);
  }
  // Integrand r^{1} e^{-r} r^{-lambda}: lambda = 1 is not integrable at 0.
  CHECK_THROWS_AS(mellin(u, 1.0), LabError);
}

TEST_CASE("Mellin of a cut-off linear profile") {
  auto chi = [](double r) { return r * std::exp(-std::pow(r, 4)); };
  auto u = sample_radial(chi, 1e-12, 10.0, 3001);
  // Composite Simpson in r on [0, 6] as the refined oracle.
  const int n = 200000;
  double h = 6.0 / n, s = 0.0;
  for (int i = 0; i <= n; ++i) {
    double r = i * h, w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    s += w * r * r * chi(r);
  }
  s *= h / 3;
  CHECK(std::abs(mellin(u, -3.0).real() - s) < 1e-8);
  CHECK(std::abs(s - 0.25) < 1e-8);
}

TEST_CASE("inverse Mellin roundtrips") {
  std::vector<double> r;
  for (int i = 0; i <= 100; ++i) r.push_back(0.1 * std::pow(50.0, i / 100.0));
  {
    auto bump = [](double x) { return std::exp(-std::pow(std::log(x), 2)); };
    auto u = sample_radial(bump, std::exp(-12.0), std::exp(12.0), 1201);
    auto U = [&](std::complex<double> l) { return mellin(u, l); };
    auto back = inverse_mellin(U, 0.0, r, 20.0, 801);
    std::vector<double> ex;
    for (double x : r) ex.push_back(bump(x));
    CHECK(rel_l2(back.values, ex) < 1e-6);
    CHECK(back.truncation_estimate < 1e-10);
  }
  {
    auto u = sample_radial([](double x) { return std::exp(-x); }, 1e-18, 80.0, 4001);
    auto U = [&](std::complex<double> l) { return mellin(u, l); };
    auto back = inverse_mellin(U, -1.0, r, 40.0, 2001);
    std::vector<double> ex;
    for (double x : r) ex.push_back(std::exp(-x));
    CHECK(rel_l2(back.values, ex) < 1e-5);
    auto g = inverse_mellin([](std::complex<double> l) { return gamma_c(-l); }, -1.0, r, 40.0, 2001);
    CHECK(rel_l2(g.values, ex) < 1e-5);
  }
}
