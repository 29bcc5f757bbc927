#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <vector>

namespace beachlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind { InvalidInput, SolverFailure, MonitorHalt, Config, Io };

class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind k);

// Process-wide numerical tolerances. Set once at startup (CLI overrides), read-only afterwards.
struct Tolerances {
  double solver_rel = 1e-10;     // relative residual for iterative solves
  double root = 1e-10;           // root finder tolerance on lambda
  double compat = 1e-8;          // Neumann compatibility residual (relative)
  int cg_threshold = 250000;     // unknowns above which CG replaces the direct solver
  double dense_eig_max = 4000;   // largest dense generalized eigenproblem allowed
};

const Tolerances& tolerances();
void set_tolerances(const Tolerances& t);

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace beachlab
