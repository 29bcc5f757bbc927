#pragma once

// Short-time free-surface stepper on box and beach domains.
//
// The state is the surface graph eta over the reference surface and the surface trace psi of
// the velocity potential. Each stage moves the mesh onto the graph, solves the Dirichlet
// problem for phi, and advances (eta, psi) with the kinematic and Bernoulli conditions.

#include "beachlab/energy.hpp"

#include <optional>
#include <string>
#include <vector>

namespace beachlab {

struct MonitorBounds {
  double a0 = 0.1;  // Taylor condition a >= a0
  double omega_min = 0.05;
  double omega_max = kPi / 2 - 0.05;
};

struct SimulationConfig {
  double dt = 1e-3;
  double T = 1.0;
  double g = 9.81;
  double s = 2.5;
  MonitorBounds monitors;
  int remesh_every = 10;  // cadence of the mesh quality check
  int save_every = 10;
  bool energy = true;            // assemble energy reports at the save cadence
  bool check_regularity = true;  // require validate_config(s, omega_max)
};

// Throws LabError(Config) with the offending field.
void validate(const SimulationConfig& c);

struct FlowState {
  double t = 0.0;
  SurfaceGraph surface;
  VecX psi;  // per surface node
  VecX mu;   // nodal vorticity
};

struct StageEval {
  CornerDomain domain;
  VecX phi;
  std::vector<Vec2> v_surface;
  VecX eta_t, psi_t;
  double kinetic = 0.0, potential = 0.0;
};

struct MonitorEvent {
  double t = 0.0;
  int step = 0;
  std::string cause;  // taylor_condition | contact_angle | collar_overflow | mesh_quality | solver_failure
  std::string detail;
};

struct RunResult {
  std::vector<FlowState> saved;
  std::vector<EnergyReport> energy;
  std::vector<double> times, flow_energy, area, vorticity;  // every step
  std::optional<MonitorEvent> halt;
  GronwallResult gronwall;
  double rest_energy = 0.0;

  // max |E0(t) - E0(0)| relative to the wave energy E0(0) - E_rest.
  double wave_energy_drift() const;
  // The same drift relative to |E0(0)|.
  double raw_energy_drift() const;
  double area_drift() const;
  double vorticity_sup() const;
};

class Simulator {
 public:
  Simulator(const CornerDomain& rest, SimulationConfig cfg);

  const SimulationConfig& config() const { return cfg_; }
  const CornerDomain& rest() const { return motion_.rest(); }

  FlowState initial_state(const VecX& eta, const VecX& psi = VecX()) const;
  StageEval evaluate(const FlowState& s) const;
  // Explicit midpoint step; dt may be zero or negative.
  FlowState step(const FlowState& s, double dt) const;
  FlowState step(const FlowState& s, const StageEval& first, double dt) const;

  // Nodal velocity: recovered grad phi inside, the surface velocity on S, tangent on B.
  std::vector<Vec2> nodal_velocity(const StageEval& e) const;
  SurfaceSnapshot snapshot(const FlowState& s) const;
  SurfaceSnapshot snapshot(const FlowState& s, const StageEval& e) const;
  // Largest weak curl of grad phi at interior vertices.
  double irrotational_defect(const StageEval& e) const;
  double rest_potential() const { return rest_potential_; }

  RunResult run(const FlowState& initial) const;

 private:
  SimulationConfig cfg_;
  MeshMotion motion_;
  double rest_potential_ = 0.0;
  double rest_min_quality_ = 0.0;
};

double potential_energy(const Mesh& m, double g);
// Smallest interior angle over all triangles.
double min_angle(const Mesh& m);

// DtN eigenvector k of the rest surface, scaled to unit maximum.
VecX mode_shape(const CornerDomain& rest, int k);
// Graph values whose displacement normal to the rest surface is zeta: eta = zeta / <X, N>.
// Prescribing eta directly would modulate the data by the collar blend and excite short waves.
VecX eta_from_normal_displacement(const CornerDomain& rest, const VecX& zeta);

// Angular frequency from the zero crossings of a signal; NaN with fewer than 3 crossings.
double zero_crossing_frequency(const std::vector<double>& t, const std::vector<double>& x);

std::string state_to_json(const FlowState& s, const CornerDomain& d);

}  // namespace beachlab
