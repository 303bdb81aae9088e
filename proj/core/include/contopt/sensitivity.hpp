#ifndef CONTOPT_SENSITIVITY_HPP
#define CONTOPT_SENSITIVITY_HPP

#include <Eigen/SparseCholesky>
#include <vector>

#include "contopt/density_field.hpp"
#include "contopt/elasticity.hpp"
#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/projection.hpp"
#include "contopt/types.hpp"

namespace contopt {

struct ReactionSpec {
  std::vector<int> nodes;  // must be Dirichlet nodes
  Vec2 dir = Vec2::UnitX();
};

// Factored equilibrium Hessian at u_star, reduced to the free dofs. By
// default the operator is the same SPD-projected one the final Newton
// iteration used.
class EquilibriumLinearization {
 public:
  EquilibriumLinearization(const EnergyModel& model, const Grid2D& grid,
                           const DisplacementField& field, bool project = true);

  // Solves H_red w = rhs restricted to free dofs; returns a full-size vector
  // with zeros on constrained dofs.
  Vec solve(const Vec& rhs_full) const;

  // sum_B H_full[free, dofs(B)] . dir, as a full-size vector supported on
  // the free dofs.
  Vec coupling_with_nodes(const std::vector<int>& nodes, const Vec2& dir) const;

  // Newton direction norm ||H^{-1} g||_inf / h for staleness checks.
  double direction_residual(const Vec& grad_full) const;

  bool is_free_dof(int dof) const { return free_of_dof_[dof] >= 0; }

 private:
  double h_;
  std::vector<int> free_of_dof_;
  int n_free_ = 0;
  SpMat H_full_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

// Compliance G = e_elasticity(u*): value, per-cell dG/dE_c via one adjoint
// solve. The chain to densities happens in chain_to_density.
double compliance_value(const ElasticEnergy& el, const Vec& u_star);
std::vector<double> compliance_dE(const ElasticEnergy& el, const EquilibriumLinearization& lin,
                                  const Vec& u_star);

// Reaction force R = sum_B (d e_total / d u_B) . n on Dirichlet nodes.
// Throws std::invalid_argument when a node is not constrained.
double reaction_force_value(const EnergyModel& model, const DisplacementField& field,
                            const ReactionSpec& rs);
std::vector<double> reaction_dE(const ElasticEnergy& el, const EquilibriumLinearization& lin,
                                const Vec& u_star, const ReactionSpec& rs);

// dG/drho_c = 3 E0 H^2 H' dG/dE_c on active design cells, zero on
// fixed-region and narrow-band-removed cells. dG_dE is indexed by the
// elastic term's active-cell list; the result is per grid cell.
std::vector<double> chain_to_density(const std::vector<double>& dG_dE, const ElasticEnergy& el,
                                     const DensityField& rho, const ProjectionParams& pp,
                                     int cell_count);

}  // namespace contopt

#endif
