#include "contopt/sensitivity.hpp"

#include <stdexcept>

namespace contopt {

EquilibriumLinearization::EquilibriumLinearization(const EnergyModel& model, const Grid2D& grid,
                                                   const DisplacementField& field, bool project)
    : h_(grid.h) {
  free_of_dof_.assign(field.u.size(), -1);
  for (std::size_t n = 0; n < field.dirichlet_mask.size(); ++n) {
    if (field.dirichlet_mask[n]) continue;
    free_of_dof_[2 * n] = n_free_++;
    free_of_dof_[2 * n + 1] = n_free_++;
  }

  std::vector<Triplet> trips;
  model.hessian(field.u, trips, project);
  H_full_.resize(field.u.size(), field.u.size());
  H_full_.setFromTriplets(trips.begin(), trips.end());

  std::vector<Triplet> red;
  red.reserve(trips.size());
  for (const auto& t : trips) {
    const int r = free_of_dof_[t.row()];
    const int c = free_of_dof_[t.col()];
    if (r >= 0 && c >= 0) red.emplace_back(r, c, t.value());
  }
  SpMat H(n_free_, n_free_);
  H.setFromTriplets(red.begin(), red.end());
  ldlt_.compute(H);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("EquilibriumLinearization: factorization failed");
}

Vec EquilibriumLinearization::solve(const Vec& rhs_full) const {
  Vec rhs(n_free_);
  for (int dof = 0; dof < rhs_full.size(); ++dof)
    if (free_of_dof_[dof] >= 0) rhs[free_of_dof_[dof]] = rhs_full[dof];
  const Vec w = ldlt_.solve(rhs);
  Vec out = Vec::Zero(rhs_full.size());
  for (int dof = 0; dof < rhs_full.size(); ++dof)
    if (free_of_dof_[dof] >= 0) out[dof] = w[free_of_dof_[dof]];
  return out;
}

Vec EquilibriumLinearization::coupling_with_nodes(const std::vector<int>& nodes,
                                                  const Vec2& dir) const {
  Vec out = Vec::Zero(H_full_.rows());
  for (int B : nodes) {
    for (int c = 0; c < 2; ++c) {
      const int col = 2 * B + c;
      for (SpMat::InnerIterator it(H_full_, col); it; ++it) {
        if (free_of_dof_[it.row()] >= 0) out[it.row()] += dir[c] * it.value();
      }
    }
  }
  return out;
}

double EquilibriumLinearization::direction_residual(const Vec& grad_full) const {
  const Vec d = solve(grad_full);
  return d.cwiseAbs().maxCoeff() / h_;
}

double compliance_value(const ElasticEnergy& el, const Vec& u_star) { return el.value(u_star); }

std::vector<double> compliance_dE(const ElasticEnergy& el, const EquilibriumLinearization& lin,
                                  const Vec& u_star) {
  Vec dG_du = Vec::Zero(u_star.size());
  el.add_gradient(u_star, dG_du);
  const Vec w = lin.solve(dG_du);

  const auto& cells = el.active_cells();
  std::vector<double> out(cells.size(), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double dG_dE = el.cell_unit_energy(u_star, static_cast<int>(i));
    const Eigen::Matrix<double, 8, 1> mixed = el.cell_unit_gradient_local(u_star, static_cast<int>(i));
    const auto nodes = el.grid().cell_nodes(cells[i]);
    double corr = 0.0;
    for (int a = 0; a < 4; ++a)
      corr += mixed.segment<2>(2 * a).dot(w.segment<2>(2 * nodes[a]));
    out[i] = dG_dE - corr;
  }
  return out;
}

double reaction_force_value(const EnergyModel& model, const DisplacementField& field,
                            const ReactionSpec& rs) {
  Vec ge = Vec::Zero(field.u.size());
  for (const auto& t : model.terms) t->add_gradient(field.u, ge);
  double R = 0.0;
  for (int B : rs.nodes) {
    if (!field.dirichlet_mask[B])
      throw std::invalid_argument("reaction_force: node is not a Dirichlet node");
    R += rs.dir.dot(ge.segment<2>(2 * B));
  }
  return R;
}

std::vector<double> reaction_dE(const ElasticEnergy& el, const EquilibriumLinearization& lin,
                                const Vec& u_star, const ReactionSpec& rs) {
  const Vec rhs = lin.coupling_with_nodes(rs.nodes, rs.dir);
  const Vec w = lin.solve(rhs);

  std::vector<std::uint8_t> in_B(u_star.size() / 2, 0);
  for (int B : rs.nodes) in_B[B] = 1;

  const auto& cells = el.active_cells();
  std::vector<double> out(cells.size(), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Eigen::Matrix<double, 8, 1> mixed = el.cell_unit_gradient_local(u_star, static_cast<int>(i));
    const auto nodes = el.grid().cell_nodes(cells[i]);
    double direct = 0.0, corr = 0.0;
    for (int a = 0; a < 4; ++a) {
      if (in_B[nodes[a]]) direct += rs.dir.dot(mixed.segment<2>(2 * a));
      corr += mixed.segment<2>(2 * a).dot(w.segment<2>(2 * nodes[a]));
    }
    out[i] = direct - corr;
  }
  return out;
}

std::vector<double> chain_to_density(const std::vector<double>& dG_dE, const ElasticEnergy& el,
                                     const DensityField& rho, const ProjectionParams& pp,
                                     int cell_count) {
  std::vector<double> out(cell_count, 0.0);
  const auto& cells = el.active_cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const int c = cells[i];
    if (rho.region[c] != Region::Design) continue;
    out[c] = simp_modulus_deriv(rho.rho[c], pp) * dG_dE[i];
  }
  return out;
}

}  // namespace contopt
