#ifndef CONTOPT_STRAIN_LIMIT_HPP
#define CONTOPT_STRAIN_LIMIT_HPP

#include <vector>

#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/types.hpp"

namespace contopt {

struct StrainLimitParams {
  double s_hat = 1.2;   // upper stretch activation
  double s_bar = 2.0;   // upper stretch asymptote
  double p_hat = 0.8;   // lower stretch activation
  double p_bar = 0.1;   // lower stretch asymptote
  double rho_bar = 0.02;  // density gate; cells below it are relaxed
};

// One-sided C2 stretch barrier:
//   psi(sigma) = -((s_hat - sigma)/(s_bar - s_hat))^2 log((s_bar - sigma)/(s_bar - s_hat))
// for sigma >= s_hat, 0 below. Diverges as sigma -> s_bar; throws
// std::domain_error at or past the asymptote.
double strain_limit_psi(double sigma, double s_hat, double s_bar, double* d1 = nullptr,
                        double* d2 = nullptr);

// Rotation-variant 2x2 SVD: F = U diag(sigma) V^T with U, V in SO(2) and
// sigma_0 >= |sigma_1| (sigma_1 < 0 iff det F < 0).
void svd_rv_2x2(const Mat2& F, Mat2& U, Vec2& sigma, Mat2& V);

// Penalty on principal stretches of gated (low-density) cells:
//   e = sum_q h(rho_q) Psi_SL(F_q) V_q,  h(rho) = 1 - rho/rho_bar,
// where Psi_SL barriers sigma_i above s_hat and below p_hat.
class StrainLimitEnergy final : public EnergyTerm {
 public:
  StrainLimitEnergy(const Grid2D& g, std::vector<int> gated_cells, std::vector<double> gate_weights,
                    StrainLimitParams params);

  const char* name() const override { return "strain_limit"; }
  double value(const Vec& u) const override;
  void add_gradient(const Vec& u, Vec& grad) const override;
  void add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const override;
  double step_bound(const Vec& u, const Vec& du) const override;

  bool empty() const { return cells_.empty(); }

 private:
  Grid2D grid_;
  std::vector<int> cells_;
  std::vector<double> weights_;  // h(rho) per gated cell
  StrainLimitParams params_;
};

}  // namespace contopt

#endif
