#include "beachlab/common.hpp"

namespace beachlab {

namespace {
Tolerances g_tolerances;
}

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::SolverFailure: return "solver_failure";
    case ErrorKind::MonitorHalt: return "monitor_halt";
    case ErrorKind::Config: return "config_error";
    case ErrorKind::Io: return "io_error";
  }
  return "unknown";
}

const Tolerances& tolerances() { return g_tolerances; }
void set_tolerances(const Tolerances& t) { g_tolerances = t; }

}  // namespace beachlab
