#pragma once

// Corner model problem on the sector 0 < theta < omega: singular exponents,
// angular pencil, singular functions, regularity threshold and Mellin transform.

#include "beachlab/common.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace beachlab {

// Condition on the theta = 0 edge (surface) and on the theta = omega edge (bottom).
enum class BoundaryPair { DirichletNeumann, NeumannNeumann, DirichletDirichlet };

const char* to_string(BoundaryPair bc);
BoundaryPair parse_boundary_pair(const std::string& s);  // "dn" | "nn" | "dd"

struct OperatorPencil {
  double omega = kPi / 2;
  Mat2 alpha = Mat2::Identity();  // frozen SPD coefficient
  BoundaryPair bc = BoundaryPair::DirichletNeumann;
};

std::vector<double> singular_exponents(BoundaryPair bc, double omega, int count);

// Angle of the image sector under x -> alpha^{-1/2} x.
double mapped_angle(const Mat2& alpha, double omega);

// Boundary determinant of the angular problem v'' + lambda^2 v = 0 on (0, omega'),
// zero exactly at the exponents.
double pencil_determinant(BoundaryPair bc, double omega, double lambda);

struct PencilRoots {
  std::vector<double> roots;
  std::vector<std::string> failures;  // per window cell that did not converge
};
// Roots in (lo, hi], found on windows of width 0.25.
PencilRoots pencil_exponents_numeric(const OperatorPencil& p, double lo, double hi);

struct SingularFunction {
  BoundaryPair bc;
  double omega = 0.0;
  double lambda = 0.0;
  std::vector<double> theta;    // sample angles on [0, omega]
  std::vector<double> profile;  // v(theta)
  double angular(double th) const;
  double dangular(double th) const;
  double value(const Vec2& x) const;      // r^lambda v(theta)
  Vec2 gradient(const Vec2& x) const;
  std::string description() const;
};

SingularFunction singular_function(BoundaryPair bc, double omega, int k, int samples = 65);

double regularity_threshold(BoundaryPair bc, double omega);

struct ConfigReport {
  bool valid = false;
  double lower = 0.0;  // 1 + n/2
  double upper = 0.0;  // 1/2 + pi/(2 omega_max)
  std::string message;
};
ConfigReport validate_config(double s, double omega_max, int n = 2);

// Radial samples on a geometric grid r_i = exp(t0 + i dt).
struct RadialSamples {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  double r(int i) const;
};
RadialSamples sample_radial(const std::function<double(double)>& u, double rmin, double rmax, int n);

// M[u](lambda) = int_0^inf r^{-lambda} u(r) dr / r by the trapezoid rule in log r.
// Throws InvalidInput if the integrand does not vanish at both ends of the grid.
std::complex<double> mellin(const RadialSamples& u, std::complex<double> lambda, double tail_tol = 1e-10);

// u(r) = (1/2pi) int r^{c + i zeta} U(c + i zeta) d zeta over |zeta| <= zeta_max.
struct InverseMellinResult {
  std::vector<double> values;
  double truncation_estimate = 0.0;  // |U| at the window ends relative to its peak
};
InverseMellinResult inverse_mellin(const std::function<std::complex<double>(std::complex<double>)>& U, double c,
                                   const std::vector<double>& r, double zeta_max, int n);

}  // namespace beachlab
