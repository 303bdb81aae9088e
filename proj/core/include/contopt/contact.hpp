#ifndef CONTOPT_CONTACT_HPP
#define CONTOPT_CONTACT_HPP

#include <vector>

#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/types.hpp"

namespace contopt {

struct BarrierParams {
  double d_hat = 0.0;  // activation distance (m)
  double kappa = 0.0;  // barrier stiffness
};

enum class PairKind : unsigned char { PP, PL };

struct PointEdgeDist {
  PairKind kind;
  double d;
  double beta;  // clamped foot parameter along (y, z)
};

// Closest distance between point p and segment (y, z), classified PP when
// the clamped foot lands on an endpoint and PL otherwise. Throws
// std::invalid_argument for a degenerate edge.
PointEdgeDist point_edge_distance(const Vec2& p, const Vec2& y, const Vec2& z);

// Distance derivatives on the stacked coordinates (p, y, z). PP derivatives
// place the endpoint terms on the witness endpoint.
void point_edge_distance_grad(const Vec2& p, const Vec2& y, const Vec2& z,
                              const PointEdgeDist& pe, Eigen::Matrix<double, 6, 1>& grad,
                              Eigen::Matrix<double, 6, 6>* hess = nullptr);

// C2 log barrier b(d) = -kappa (d/d_hat - 1)^2 log(d/d_hat) on (0, d_hat),
// zero beyond. Throws std::domain_error when d <= 0.
double barrier(double d, const BarrierParams& bp, double* db = nullptr, double* d2b = nullptr);

struct ContactPair {
  int p;     // mesh vertex index of the point
  int edge;  // mesh edge index
  PairKind kind;
  double d;
  double beta;
};

// All non-incident point-edge pairs with distance < d_hat at positions x.
// Uniform spatial hash with cell size max(h, d_hat) as broad phase; narrow
// phase exact.
std::vector<ContactPair> build_contact_set(const BoundaryMesh& mesh, const std::vector<Vec2>& x,
                                           const BarrierParams& bp, double grid_h);

// Minimum distance over every non-incident point-edge pair (brute force;
// used by feasibility checks and tests).
double min_pair_distance(const BoundaryMesh& mesh, const std::vector<Vec2>& x);

// Additive CCD step bound: largest alpha in (0,1] such that no non-incident
// pair's distance falls below `slack` times its current value along
// x + alpha dx. Conservative, always positive for interpenetration-free x.
double ccd_step_bound(const BoundaryMesh& mesh, const std::vector<Vec2>& x,
                      const std::vector<Vec2>& dx, double grid_h, double slack = 0.1);

// Barrier potential over the active pair set,
//   e = sum_k (h d_hat / 2) b(d_k(x)),
// with PP/PL classification recomputed at every evaluation.
class ContactEnergy final : public EnergyTerm {
 public:
  ContactEnergy(const Grid2D& g, const BoundaryMesh& mesh, BarrierParams bp);

  const char* name() const override { return "contact"; }
  double value(const Vec& u) const override;
  void add_gradient(const Vec& u, Vec& grad) const override;
  void add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const override;
  double step_bound(const Vec& u, const Vec& du) const override;

  std::vector<ContactPair> active_pairs(const Vec& u) const;
  double min_distance(const Vec& u) const;
  const BoundaryMesh& mesh() const { return mesh_; }
  const BarrierParams& params() const { return bp_; }

 private:
  Grid2D grid_;
  BoundaryMesh mesh_;
  BarrierParams bp_;
};

}  // namespace contopt

#endif
