#ifndef CONTOPT_CONFIG_HPP
#define CONTOPT_CONFIG_HPP

#include <string>
#include <vector>

#include "contopt/contact.hpp"
#include "contopt/density_field.hpp"
#include "contopt/elasticity.hpp"
#include "contopt/filters.hpp"
#include "contopt/friction.hpp"
#include "contopt/grid.hpp"
#include "contopt/mma.hpp"
#include "contopt/projection.hpp"
#include "contopt/solver.hpp"
#include "contopt/strain_limit.hpp"

namespace contopt {

struct RegionRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;  // half-open cell box
  Region tag = Region::Design;
  double rho0 = -1.0;  // < 0: keep the design default
};

struct DirichletRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;  // half-open node box
  int load_case = -1;                  // -1: every case
  Vec2 value = Vec2::Zero();
};

struct LoadRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;  // half-open node box
  int load_case = -1;
  Vec2 total_force = Vec2::Zero();  // distributed evenly over the box nodes
};

struct SeedRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;  // half-open cell box
};

enum class ObjectiveKind { Compliance, MaxCompliance, ReactionMinMax };

struct OptimizationConfig {
  Grid2D grid;

  double E0 = 100.0;
  double nu = 0.3;
  std::string plane = "strain";

  ProjectionParams projection;  // beta/E0/nu mirrored here for the modules
  double beta_growth = 1.0;
  int beta_growth_every = 50;
  double beta_max = 16.0;

  FilterParams filter;

  double eta = 0.01;
  std::vector<SeedRect> seeds;  // empty: default to boundary-condition cells

  double dhat_over_h = 0.1;
  double kappa = -1.0;  // < 0: E0 * h

  FrictionParams friction;

  bool strain_limit_enabled = true;
  StrainLimitParams strain_limit;

  double newton_tol = 1e-6;
  int max_newton_iters = 200;
  double armijo_c = 1e-4;
  double shrink = 0.5;

  MMAParams mma;

  ObjectiveKind objective = ObjectiveKind::Compliance;
  double vhat = 0.5;
  int max_iters = 100;
  double stagnation_tol = 1e-3;
  int stagnation_iters = 10;
  int dirichlet_ramp_steps = 0;  // 0: auto (10 when max |u| > 5h)
  double design_rho0 = 0.5;
  std::string output_dir = "out";

  std::vector<RegionRect> regions;
  std::vector<DirichletRect> dirichlet;
  std::vector<LoadRect> loads;

  // reaction_minmax objective
  int case_small = 0;
  int case_large = 1;
  int reaction_i0 = 0, reaction_j0 = 0, reaction_i1 = 0, reaction_j1 = 0;
  Vec2 reaction_dir = Vec2::UnitX();

  int load_case_count() const;
  DensityField initial_field() const;
  DisplacementField boundary_conditions(const Grid2D& g, int load_case) const;
  Vec external_forces(const Grid2D& g, int load_case) const;
  std::vector<int> seed_cells() const;
  BarrierParams barrier_params() const;
  LameParams unit_lame() const;
  SolverParams solver_params() const;
  std::vector<int> reaction_nodes() const;

  void validate() const;  // throws ConfigError naming the offending field
};

// Parses the key-value scene format. Unknown sections or keys are rejected
// with the file line; the result is validated with defaults applied.
OptimizationConfig load_config(const std::string& path);

}  // namespace contopt

#endif
