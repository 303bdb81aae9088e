#ifndef CONTOPT_SOLVER_HPP
#define CONTOPT_SOLVER_HPP

#include <functional>

#include "contopt/elasticity.hpp"
#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/spd.hpp"
#include "contopt/types.hpp"

namespace contopt {

// Eigenvalue clamp of a symmetric block; see spd.hpp for the template.
inline void project_spd(Eigen::MatrixXd& H) { project_spd_inplace(H); }

struct NewtonIterRecord {
  int iter = 0;
  double energy = 0.0;
  double residual = 0.0;
  double alpha = 0.0;
  int active_pairs = -1;
};

struct SolverParams {
  double newton_tol = 1e-6;  // on ||direction||_inf / h
  int max_newton_iters = 200;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_bc_substeps = 500;
  // Called on every accepted state (feasibility audits in tests/debug runs).
  std::function<void(const Vec&)> state_validator;
  std::function<void(const NewtonIterRecord&)> log;
};

struct SolveReport {
  bool converged = false;
  int newton_iters = 0;
  double residual = 0.0;
  int bc_substeps = 0;
};

// Projected Newton minimization of e_total(u) - u . f_ext under the field's
// Dirichlet constraints. Prescribed values are marched in step-bound-safe
// increments when they differ from the current state; each accepted state
// satisfies every term's domain (det F > 0, distances > 0, stretch bounds).
SolveReport solve_static(const EnergyModel& model, const Grid2D& grid, DisplacementField& field,
                         const SolverParams& sp);

}  // namespace contopt

#endif
