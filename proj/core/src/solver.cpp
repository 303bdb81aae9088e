#include "contopt/solver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <sstream>

#include "contopt/contact.hpp"
#include "contopt/errors.hpp"

namespace contopt {

namespace {

struct Reduction {
  std::vector<int> free_of_dof;  // -1 on constrained dofs
  int n_free = 0;

  explicit Reduction(const DisplacementField& f) {
    free_of_dof.assign(f.u.size(), -1);
    for (std::size_t n = 0; n < f.dirichlet_mask.size(); ++n) {
      if (f.dirichlet_mask[n]) continue;
      free_of_dof[2 * n] = n_free++;
      free_of_dof[2 * n + 1] = n_free++;
    }
  }
};

int count_active_pairs(const EnergyModel& model, const Vec& u) {
  for (const auto& t : model.terms)
    if (const auto* c = dynamic_cast<const ContactEnergy*>(t.get()))
      return static_cast<int>(c->active_pairs(u).size());
  return -1;
}

// One Newton descent to the direction-norm tolerance on the free dofs.
SolveReport newton_minimize(const EnergyModel& model, const Grid2D& grid, DisplacementField& field,
                            const Reduction& red, const SolverParams& sp) {
  SolveReport rep;
  Vec& u = field.u;
  std::vector<Triplet> trips;
  for (int it = 0; it < sp.max_newton_iters; ++it) {
    const Vec g = model.gradient(u);
    Vec g_free(red.n_free);
    for (int dof = 0; dof < g.size(); ++dof)
      if (red.free_of_dof[dof] >= 0) g_free[red.free_of_dof[dof]] = g[dof];

    trips.clear();
    model.hessian(u, trips, /*project=*/true);
    std::vector<Triplet> red_trips;
    red_trips.reserve(trips.size());
    for (const auto& t : trips) {
      const int r = red.free_of_dof[t.row()];
      const int c = red.free_of_dof[t.col()];
      if (r >= 0 && c >= 0) red_trips.emplace_back(r, c, t.value());
    }
    SpMat H(red.n_free, red.n_free);
    H.setFromTriplets(red_trips.begin(), red_trips.end());

    Eigen::SimplicialLDLT<SpMat> ldlt(H);
    if (ldlt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "solve_static: LDLT factorization failed on " << red.n_free
         << " unknowns (structure may lack boundary conditions)";
      throw SolverError(os.str());
    }
    const Vec d_free = ldlt.solve(-g_free);
    if (ldlt.info() != Eigen::Success) throw SolverError("solve_static: LDLT back-substitution failed");

    const double residual = red.n_free > 0 ? d_free.cwiseAbs().maxCoeff() / grid.h : 0.0;
    rep.residual = residual;
    if (residual < sp.newton_tol) {
      rep.converged = true;
      if (sp.log) sp.log({it, model.objective(u), residual, 0.0, count_active_pairs(model, u)});
      return rep;
    }

    Vec d = Vec::Zero(u.size());
    for (int dof = 0; dof < u.size(); ++dof)
      if (red.free_of_dof[dof] >= 0) d[dof] = d_free[red.free_of_dof[dof]];

    double alpha = std::min(1.0, model.step_bound(u, d));
    const double phi0 = model.objective(u);
    const double slope = g_free.dot(d_free);
    bool accepted = false;
    Vec u_try;
    for (int ls = 0; ls < 80; ++ls) {
      u_try = u + alpha * d;
      double phi;
      try {
        phi = model.objective(u_try);
      } catch (const std::domain_error&) {
        alpha *= sp.shrink;
        continue;
      }
      if (std::isfinite(phi) && phi <= phi0 + sp.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= sp.shrink;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "solve_static: line search failed at iteration " << it << " (residual " << residual
         << ")";
      throw SolverError(os.str());
    }
    u = u_try;
    ++rep.newton_iters;
    if (sp.state_validator) sp.state_validator(u);
    if (sp.log) sp.log({it, model.objective(u), residual, alpha, count_active_pairs(model, u)});
  }
  std::ostringstream os;
  os << "solve_static: no convergence after " << sp.max_newton_iters
     << " Newton iterations (residual " << rep.residual << ")";
  throw SolverError(os.str());
}

}  // namespace

SolveReport solve_static(const EnergyModel& model, const Grid2D& grid, DisplacementField& field,
                         const SolverParams& sp) {
  const Reduction red(field);
  SolveReport total;

  // March prescribed values toward their targets within the step bounds,
  // re-equilibrating after each increment.
  for (int sub = 0;; ++sub) {
    Vec du_bc = Vec::Zero(field.u.size());
    double gap = 0.0;
    for (std::size_t n = 0; n < field.dirichlet_mask.size(); ++n) {
      if (!field.dirichlet_mask[n]) continue;
      for (int c = 0; c < 2; ++c) {
        du_bc[2 * n + c] = field.dirichlet_value[2 * n + c] - field.u[2 * n + c];
        gap = std::max(gap, std::abs(du_bc[2 * n + c]));
      }
    }
    if (gap <= 1e-14 * std::max(1.0, field.dirichlet_value.cwiseAbs().maxCoeff())) break;
    if (sub >= sp.max_bc_substeps)
      throw SolverError("solve_static: Dirichlet application blocked (target may be infeasible)");

    const double alpha = std::min(1.0, model.step_bound(field.u, du_bc));
    if (alpha >= 1.0) {
      for (std::size_t n = 0; n < field.dirichlet_mask.size(); ++n) {
        if (!field.dirichlet_mask[n]) continue;
        field.u[2 * n] = field.dirichlet_value[2 * n];
        field.u[2 * n + 1] = field.dirichlet_value[2 * n + 1];
      }
    } else {
      field.u += alpha * du_bc;
    }
    if (sp.state_validator) sp.state_validator(field.u);
    const SolveReport r = newton_minimize(model, grid, field, red, sp);
    total.newton_iters += r.newton_iters;
    ++total.bc_substeps;
  }

  const SolveReport r = newton_minimize(model, grid, field, red, sp);
  total.newton_iters += r.newton_iters;
  total.converged = r.converged;
  total.residual = r.residual;
  return total;
}

}  // namespace contopt
