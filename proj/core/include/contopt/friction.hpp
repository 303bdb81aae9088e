#ifndef CONTOPT_FRICTION_HPP
#define CONTOPT_FRICTION_HPP

#include <memory>
#include <vector>

#include "contopt/contact.hpp"
#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/solver.hpp"
#include "contopt/types.hpp"

namespace contopt {

struct FrictionParams {
  double mu = 0.0;      // friction coefficient
  double eps_v = 1e-6;  // static-velocity bound (m/s)
  int N = 10;           // artificial step count
  double T = 1.0;       // artificial horizon (s)
};

// C1 friction magnitude mollifier f1 of the smoothed Coulomb model and its
// antiderivative f0 with f0(eps_v dt) = eps_v dt.
double mollifier_f1(double y, double dt, double eps_v);
double mollifier_f1_deriv(double y, double dt, double eps_v);
double mollifier_f0(double y, double dt, double eps_v);

// One lagged pair: contact-force magnitude, unit sliding tangent, and the
// nodal stencil carrying the same interpolation weights as the distance
// gradient.
struct FrictionPair {
  std::array<int, 3> nodes{-1, -1, -1};  // grid node ids; nodes[2] = -1 for PP
  std::array<double, 3> w{0.0, 0.0, 0.0};
  Vec2 tangent = Vec2::Zero();
  double lambda = 0.0;  // includes the h d_hat / 2 integration weight
};

struct FrictionState {
  std::vector<FrictionPair> pairs;
  Vec anchor;  // displacement u^n the sliding is measured from
  double dt = 1.0;
};

// Freezes lambda_k and T_k at the accepted state u_prev. Pairs at or past
// d_hat carry zero force and are dropped.
FrictionState capture_lagged_state(const BoundaryMesh& mesh, const Vec& u_prev,
                                   const BarrierParams& bp, const Grid2D& g, double dt);

// e = sum_k mu lambda_k^n f0(|T_k^T (u - u^n)|); lambda carries the pair's
// contact-force magnitude, so the per-pair force obeys the Coulomb bound
// mu lambda_k.
class FrictionEnergy final : public EnergyTerm {
 public:
  FrictionEnergy(const Grid2D& g, FrictionState state, double mu, double eps_v);

  const char* name() const override { return "friction"; }
  double value(const Vec& u) const override;
  void add_gradient(const Vec& u, Vec& grad) const override;
  void add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const override;

  // Local tangential slide of pair k relative to the anchor.
  double slide(const Vec& u, int k) const;
  const FrictionState& state() const { return state_; }

 private:
  FrictionState state_;
  double mu_;
  double eps_v_;
};

struct FrictionStepRecord {
  int step = 0;  // 1..N, then 0 for the finalize solve
  int newton_iters = 0;
  double residual = 0.0;
  double max_slide = 0.0;
};

// N quasi-static solves with evenly ramped Dirichlet values and friction
// lagged from the previous state, then a finalize solve anchored at the rest
// displacement with dt = T, warm-started at u^N.
DisplacementField artificial_timestep_solve(
    const Grid2D& grid, const std::vector<std::shared_ptr<EnergyTerm>>& base_terms,
    const Vec& f_ext, const BoundaryMesh& mesh, const BarrierParams& bp, const Vec& bc_total,
    DisplacementField u0, const FrictionParams& fp, const SolverParams& sp,
    std::vector<FrictionStepRecord>* log = nullptr);

}  // namespace contopt

#endif
