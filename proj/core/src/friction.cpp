#include "contopt/friction.hpp"

#include <cmath>

namespace contopt {

double mollifier_f1(double y, double dt, double eps_v) {
  const double a = dt * eps_v;
  if (y >= a) return 1.0;
  return -y * y / (a * a) + 2.0 * y / a;
}

double mollifier_f1_deriv(double y, double dt, double eps_v) {
  const double a = dt * eps_v;
  if (y >= a) return 0.0;
  return -2.0 * y / (a * a) + 2.0 / a;
}

double mollifier_f0(double y, double dt, double eps_v) {
  const double a = dt * eps_v;
  if (y >= a) return y;
  return -y * y * y / (3.0 * a * a) + y * y / a + a / 3.0;
}

FrictionState capture_lagged_state(const BoundaryMesh& mesh, const Vec& u_prev,
                                   const BarrierParams& bp, const Grid2D& g, double dt) {
  FrictionState state;
  state.anchor = u_prev;
  state.dt = dt;
  const auto x = mesh.world_positions(u_prev);
  const double weight = 0.5 * g.h * bp.d_hat;
  for (const auto& pr : build_contact_set(mesh, x, bp, g.h)) {
    double db;
    barrier(pr.d, bp, &db);
    FrictionPair fp;
    fp.lambda = weight * std::abs(db);
    if (fp.lambda <= 0.0) continue;
    const int vy = mesh.edges[pr.edge][0], vz = mesh.edges[pr.edge][1];
    if (pr.kind == PairKind::PL) {
      fp.nodes = {mesh.vertex_nodes[pr.p], mesh.vertex_nodes[vy], mesh.vertex_nodes[vz]};
      fp.w = {1.0, -(1.0 - pr.beta), -pr.beta};
      fp.tangent = (x[vz] - x[vy]).normalized();
    } else {
      const int vw = pr.beta <= 0.0 ? vy : vz;
      fp.nodes = {mesh.vertex_nodes[pr.p], mesh.vertex_nodes[vw], -1};
      fp.w = {1.0, -1.0, 0.0};
      fp.tangent = perp((x[pr.p] - x[vw]) / pr.d);
    }
    state.pairs.push_back(fp);
  }
  return state;
}

FrictionEnergy::FrictionEnergy(const Grid2D& /*g*/, FrictionState state, double mu, double eps_v)
    : state_(std::move(state)), mu_(mu), eps_v_(eps_v) {}

double FrictionEnergy::slide(const Vec& u, int k) const {
  const FrictionPair& p = state_.pairs[k];
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (p.nodes[a] < 0) continue;
    s += p.w[a] * p.tangent.dot(u.segment<2>(2 * p.nodes[a]) - state_.anchor.segment<2>(2 * p.nodes[a]));
  }
  return s;
}

double FrictionEnergy::value(const Vec& u) const {
  double e = 0.0;
  for (std::size_t k = 0; k < state_.pairs.size(); ++k)
    e += state_.pairs[k].lambda * mollifier_f0(std::abs(slide(u, static_cast<int>(k))), state_.dt, eps_v_);
  return mu_ * e;
}

void FrictionEnergy::add_gradient(const Vec& u, Vec& grad) const {
  for (std::size_t k = 0; k < state_.pairs.size(); ++k) {
    const FrictionPair& p = state_.pairs[k];
    const double s = slide(u, static_cast<int>(k));
    const double f1 = mollifier_f1(std::abs(s), state_.dt, eps_v_);
    const double coeff = mu_ * p.lambda * f1 * (s >= 0.0 ? 1.0 : -1.0);
    if (s == 0.0) continue;  // f1(0) = 0 anyway
    for (int a = 0; a < 3; ++a) {
      if (p.nodes[a] < 0) continue;
      grad.segment<2>(2 * p.nodes[a]) += coeff * p.w[a] * p.tangent;
    }
  }
}

void FrictionEnergy::add_hessian(const Vec& u, std::vector<Triplet>& out, bool /*project*/) const {
  // Exact Hessian mu lambda f1'(|s|) (grad s)(grad s)^T; f1' >= 0, so the
  // blocks are PSD without projection.
  for (std::size_t k = 0; k < state_.pairs.size(); ++k) {
    const FrictionPair& p = state_.pairs[k];
    const double s = slide(u, static_cast<int>(k));
    const double coeff = mu_ * p.lambda * mollifier_f1_deriv(std::abs(s), state_.dt, eps_v_);
    if (coeff == 0.0) continue;
    for (int a = 0; a < 3; ++a) {
      if (p.nodes[a] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        if (p.nodes[b] < 0) continue;
        const Mat2 blk = coeff * p.w[a] * p.w[b] * (p.tangent * p.tangent.transpose());
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            out.emplace_back(2 * p.nodes[a] + r, 2 * p.nodes[b] + c, blk(r, c));
      }
    }
  }
}

DisplacementField artificial_timestep_solve(
    const Grid2D& grid, const std::vector<std::shared_ptr<EnergyTerm>>& base_terms,
    const Vec& f_ext, const BoundaryMesh& mesh, const BarrierParams& bp, const Vec& bc_total,
    DisplacementField u0, const FrictionParams& fp, const SolverParams& sp,
    std::vector<FrictionStepRecord>* log) {
  DisplacementField field = std::move(u0);
  const Vec rest = field.u;

  auto run_solve = [&](const FrictionState& state, int step_label) {
    EnergyModel model;
    model.terms = base_terms;
    model.f_ext = f_ext;
    std::shared_ptr<FrictionEnergy> fric;
    if (fp.mu > 0.0 && !state.pairs.empty()) {
      fric = std::make_shared<FrictionEnergy>(grid, state, fp.mu, fp.eps_v);
      model.terms.push_back(fric);
    }
    const SolveReport rep = solve_static(model, grid, field, sp);
    if (log) {
      FrictionStepRecord rec;
      rec.step = step_label;
      rec.newton_iters = rep.newton_iters;
      rec.residual = rep.residual;
      if (fric)
        for (std::size_t k = 0; k < state.pairs.size(); ++k)
          rec.max_slide = std::max(rec.max_slide, std::abs(fric->slide(field.u, static_cast<int>(k))));
      log->push_back(rec);
    }
  };

  const double dt = fp.T / fp.N;
  for (int n = 1; n <= fp.N; ++n) {
    const FrictionState state = capture_lagged_state(mesh, field.u, bp, grid, dt);
    const double frac = double(n) / double(fp.N);
    field.dirichlet_value = rest + frac * (bc_total - rest);
    run_solve(state, n);
  }

  // Finalize: forces lagged from u^N, slide anchored at the rest state over
  // the whole horizon.
  FrictionState state = capture_lagged_state(mesh, field.u, bp, grid, fp.T);
  state.anchor = rest;
  field.dirichlet_value = bc_total;
  run_solve(state, 0);
  return field;
}

}  // namespace contopt
