#ifndef CONTOPT_MMA_HPP
#define CONTOPT_MMA_HPP

#include <vector>

#include "contopt/types.hpp"

namespace contopt {

struct MMAParams {
  double move_limit = 0.2;
  double asym_init = 0.5;
  double asym_shrink = 0.7;
  double asym_grow = 1.2;
  double x_min = 0.0;
  double x_max = 1.0;
};

// Method of moving asymptotes, single inequality constraint plus box
// constraints. The convex subproblem is solved exactly by bisection on the
// dual variable; the analytic primal map keeps stationarity exact.
class MMA {
 public:
  explicit MMA(int n, MMAParams params = {});

  // One design update: minimize the approximation of F subject to
  // g(x) <= budget and the box. gval/dg describe the constraint at x.
  std::vector<double> update(const std::vector<double>& x, const std::vector<double>& dF,
                             double gval, const std::vector<double>& dg, double budget);

  double last_kkt_residual() const { return kkt_; }

  // Internals exposed for checkpointing and tests.
  Vec low, upp, xold1, xold2;
  int iter = 0;
  MMAParams params;

 private:
  int n_;
  double kkt_ = 0.0;
};

}  // namespace contopt

#endif
