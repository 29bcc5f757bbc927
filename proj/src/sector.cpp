#include "beachlab/sector.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace beachlab {

const char* to_string(BoundaryPair bc) {
  switch (bc) {
    case BoundaryPair::DirichletNeumann: return "dn";
    case BoundaryPair::NeumannNeumann: return "nn";
    case BoundaryPair::DirichletDirichlet: return "dd";
  }
  return "?";
}

BoundaryPair parse_boundary_pair(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "dn" || l == "dirichletneumann") return BoundaryPair::DirichletNeumann;
  if (l == "nn" || l == "neumannneumann") return BoundaryPair::NeumannNeumann;
  if (l == "dd" || l == "dirichletdirichlet") return BoundaryPair::DirichletDirichlet;
  throw LabError(ErrorKind::InvalidInput, "unknown boundary pair '" + s + "'");
}

namespace {
void check_angle(double omega) {
  if (!(omega > 0.0 && omega <= kPi)) throw LabError(ErrorKind::InvalidInput, "angle must lie in (0, pi]");
}
}  // namespace

std::vector<double> singular_exponents(BoundaryPair bc, double omega, int count) {
  check_angle(omega);
  if (count < 1) throw LabError(ErrorKind::InvalidInput, "count must be >= 1");
  std::vector<double> out;
  for (int k = 0; k < count; ++k)
    out.push_back(bc == BoundaryPair::DirichletNeumann ? (k + 0.5) * kPi / omega : (k + 1) * kPi / omega);
  return out;
}

double mapped_angle(const Mat2& alpha, double omega) {
  if ((alpha - alpha.transpose()).norm() > 1e-12 * alpha.norm())
    throw LabError(ErrorKind::InvalidInput, "pencil coefficient must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(alpha);
  if (es.eigenvalues().minCoeff() <= 0.0) throw LabError(ErrorKind::InvalidInput, "pencil coefficient must be SPD");
  Mat2 inv_sqrt = es.operatorInverseSqrt();
  Vec2 a = inv_sqrt * Vec2(1.0, 0.0);
  Vec2 b = inv_sqrt * Vec2(std::cos(omega), std::sin(omega));
  return std::atan2(cross(a, b), a.dot(b));
}

double pencil_determinant(BoundaryPair bc, double omega, double lambda) {
  // Basis (cos, sin); rows are the edge conditions on v (Dirichlet) or v'/lambda (Neumann).
  auto row = [&](bool dirichlet, double th) -> Vec2 {
    double c = std::cos(lambda * th), s = std::sin(lambda * th);
    return dirichlet ? Vec2(c, s) : Vec2(-s, c);
  };
  const bool d0 = bc != BoundaryPair::NeumannNeumann;
  const bool d1 = bc == BoundaryPair::DirichletDirichlet;
  Vec2 r0 = row(d0, 0.0), r1 = row(d1, omega);
  return r0.x() * r1.y() - r0.y() * r1.x();
}

PencilRoots pencil_exponents_numeric(const OperatorPencil& p, double lo, double hi) {
  check_angle(p.omega);
  if (!(hi > lo) || !std::isfinite(hi)) throw LabError(ErrorKind::InvalidInput, "search window must be bounded");
  const double w = mapped_angle(p.alpha, p.omega);
  auto f = [&](double l) { return pencil_determinant(p.bc, w, l); };
  const double tol = tolerances().root;
  PencilRoots out;
  const double width = 0.25;
  for (double a = lo; a < hi - 1e-14; a += width) {
    double b = std::min(a + width, hi);
    double fa = f(a), fb = f(b);
    if (fb == 0.0) { if (b > 1e-12) out.roots.push_back(b); continue; }
    if (fa * fb > 0.0 || fa == 0.0) continue;
    double x0 = a, x1 = b, f0 = fa;
    while (x1 - x0 > 1e-4) {
      double m = 0.5 * (x0 + x1), fm = f(m);
      if ((fm < 0) == (f0 < 0)) { x0 = m; f0 = fm; } else x1 = m;
    }
    // Secant refinement, kept inside the bracket.
    double xa = x0, xb = x1, fxa = f(xa), fxb = f(xb);
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      double xn = xb - fxb * (xb - xa) / (fxb - fxa);
      if (!(xn > x0 - 1e-12 && xn < x1 + 1e-12)) xn = 0.5 * (x0 + x1);
      double fn = f(xn);
      if ((fn < 0) == (f0 < 0)) x0 = xn; else x1 = xn;
      xa = xb; fxa = fxb; xb = xn; fxb = fn;
      if (std::abs(xb - xa) < tol * 1e-2 || fn == 0.0) { ok = true; break; }
    }
    if (ok) out.roots.push_back(xb);
    else {
      std::ostringstream os;
      os << "no convergence in [" << a << ", " << b << "]";
      out.failures.push_back(os.str());
    }
  }
  return out;
}

double SingularFunction::angular(double th) const {
  return bc == BoundaryPair::NeumannNeumann ? std::cos(lambda * th) : std::sin(lambda * th);
}

double SingularFunction::dangular(double th) const {
  return bc == BoundaryPair::NeumannNeumann ? -lambda * std::sin(lambda * th) : lambda * std::cos(lambda * th);
}

double SingularFunction::value(const Vec2& x) const {
  double r = x.norm();
  if (r == 0.0) return 0.0;
  return std::pow(r, lambda) * angular(std::atan2(x.y(), x.x()));
}

Vec2 SingularFunction::gradient(const Vec2& x) const {
  double r = x.norm();
  if (r == 0.0) return Vec2::Zero();
  double th = std::atan2(x.y(), x.x());
  double rl = std::pow(r, lambda - 1.0);
  Vec2 er(std::cos(th), std::sin(th)), et(-std::sin(th), std::cos(th));
  return rl * (lambda * angular(th) * er + dangular(th) * et);
}

std::string SingularFunction::description() const {
  std::ostringstream os;
  os.precision(17);
  os << "r^" << lambda << " * " << (bc == BoundaryPair::NeumannNeumann ? "cos" : "sin") << "(" << lambda << " theta)";
  return os.str();
}

SingularFunction singular_function(BoundaryPair bc, double omega, int k, int samples) {
  check_angle(omega);
  if (k < 0 || (k == 0 && bc != BoundaryPair::DirichletNeumann))
    throw LabError(ErrorKind::InvalidInput, "invalid singular function index");
  if (samples < 2) throw LabError(ErrorKind::InvalidInput, "need at least two samples");
  SingularFunction s;
  s.bc = bc;
  s.omega = omega;
  s.lambda = bc == BoundaryPair::DirichletNeumann ? (k + 0.5) * kPi / omega : k * kPi / omega;
  for (int i = 0; i < samples; ++i) {
    double th = omega * i / (samples - 1);
    s.theta.push_back(th);
    s.profile.push_back(s.angular(th));
  }
  return s;
}

double regularity_threshold(BoundaryPair bc, double omega) {
  check_angle(omega);
  return bc == BoundaryPair::DirichletNeumann ? 1.0 + kPi / (2.0 * omega) : 1.0 + kPi / omega;
}

ConfigReport validate_config(double s, double omega_max, int n) {
  ConfigReport r;
  r.lower = 1.0 + n / 2.0;
  r.upper = 0.5 + kPi / (2.0 * omega_max);
  std::ostringstream os;
  os.precision(17);
  if (!(omega_max > 0.0 && omega_max < kPi)) {
    os << "omega_max must lie in (0, pi)";
  } else if (!(s > r.lower)) {
    os << "s = " << s << " violates s > " << r.lower;
  } else if (!(s < r.upper)) {
    os << "s = " << s << " violates s < 1/2 + pi/(2 omega_max) = " << r.upper;
  } else {
    r.valid = true;
    os << "valid: " << r.lower << " < " << s << " < " << r.upper;
  }
  r.message = os.str();
  return r;
}

double RadialSamples::r(int i) const { return std::exp(t0 + i * dt); }

RadialSamples sample_radial(const std::function<double(double)>& u, double rmin, double rmax, int n) {
  if (!(rmin > 0.0 && rmax > rmin) || n < 3) throw LabError(ErrorKind::InvalidInput, "bad radial grid");
  RadialSamples s;
  s.t0 = std::log(rmin);
  s.dt = (std::log(rmax) - s.t0) / (n - 1);
  s.values.resize(n);
  for (int i = 0; i < n; ++i) s.values[i] = u(s.r(i));
  return s;
}

std::complex<double> mellin(const RadialSamples& u, std::complex<double> lambda, double tail_tol) {
  const int n = static_cast<int>(u.values.size());
  if (n < 3) throw LabError(ErrorKind::InvalidInput, "too few radial samples");
  std::vector<std::complex<double>> g(n);
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = u.t0 + i * u.dt;
    g[i] = std::exp(-lambda * t) * u.values[i];
    peak = std::max(peak, std::abs(g[i]));
  }
  if (peak > 0.0 && (std::abs(g.front()) > tail_tol * peak || std::abs(g.back()) > tail_tol * peak)) {
    std::ostringstream os;
    os << "Mellin integrand does not decay at the grid ends (relative tails " << std::abs(g.front()) / peak << ", "
       << std::abs(g.back()) / peak << ")";
    throw LabError(ErrorKind::InvalidInput, os.str());
  }
  std::complex<double> sum = 0.5 * (g.front() + g.back());
  for (int i = 1; i + 1 < n; ++i) sum += g[i];
  return sum * u.dt;
}

InverseMellinResult inverse_mellin(const std::function<std::complex<double>(std::complex<double>)>& U, double c,
                                   const std::vector<double>& r, double zeta_max, int n) {
  if (n < 3 || !(zeta_max > 0)) throw LabError(ErrorKind::InvalidInput, "bad inverse Mellin window");
  const double dz = 2.0 * zeta_max / (n - 1);
  std::vector<std::complex<double>> Uz(n);
  double peak = 0.0;
  for (int j = 0; j < n; ++j) {
    Uz[j] = U({c, -zeta_max + j * dz});
    peak = std::max(peak, std::abs(Uz[j]));
  }
  InverseMellinResult out;
  out.truncation_estimate = peak > 0 ? std::max(std::abs(Uz.front()), std::abs(Uz.back())) / peak : 0.0;
  out.values.resize(r.size());
  for (size_t i = 0; i < r.size(); ++i) {
    const double lr = std::log(r[i]);
    std::complex<double> sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      sum += wj * std::exp(std::complex<double>(c, -zeta_max + j * dz) * lr) * Uz[j];
    }
    out.values[i] = (sum * dz / (2.0 * kPi)).real();
  }
  return out;
}

}  // namespace beachlab
