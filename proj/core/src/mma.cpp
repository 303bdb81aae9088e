#include "contopt/mma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace contopt {

namespace {
constexpr double kRaa0 = 1e-5;
}

MMA::MMA(int n, MMAParams p) : params(p), n_(n) {
  low = Vec::Zero(n);
  upp = Vec::Zero(n);
  xold1 = Vec::Zero(n);
  xold2 = Vec::Zero(n);
}

std::vector<double> MMA::update(const std::vector<double>& x, const std::vector<double>& dF,
                                double gval, const std::vector<double>& dg, double budget) {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(dF.size()) != n_ ||
      static_cast<int>(dg.size()) != n_)
    throw std::invalid_argument("MMA::update: array size mismatch");

  const double range = params.x_max - params.x_min;
  ++iter;

  for (int j = 0; j < n_; ++j) {
    if (iter <= 2) {
      low[j] = x[j] - params.asym_init * range;
      upp[j] = x[j] + params.asym_init * range;
    } else {
      const double osc = (x[j] - xold1[j]) * (xold1[j] - xold2[j]);
      double fac = 1.0;
      if (osc > 0.0) fac = params.asym_grow;
      else if (osc < 0.0) fac = params.asym_shrink;
      low[j] = x[j] - fac * (xold1[j] - low[j]);
      upp[j] = x[j] + fac * (upp[j] - xold1[j]);
      low[j] = std::clamp(low[j], x[j] - 10.0 * range, x[j] - 0.01 * range);
      upp[j] = std::clamp(upp[j], x[j] + 0.01 * range, x[j] + 10.0 * range);
    }
  }

  // Sub-bounds: box, move limit, and a 10% margin to the asymptotes.
  std::vector<double> a(n_), b(n_);
  for (int j = 0; j < n_; ++j) {
    a[j] = std::max({params.x_min, low[j] + 0.1 * (x[j] - low[j]), x[j] - params.move_limit * range});
    b[j] = std::min({params.x_max, upp[j] - 0.1 * (upp[j] - x[j]), x[j] + params.move_limit * range});
    if (a[j] > b[j]) a[j] = b[j] = 0.5 * (a[j] + b[j]);
  }

  std::vector<double> p0(n_), q0(n_), p1(n_), q1(n_);
  for (int j = 0; j < n_; ++j) {
    const double du = upp[j] - x[j];
    const double dl = x[j] - low[j];
    const double fp = std::max(dF[j], 0.0), fm = std::max(-dF[j], 0.0);
    p0[j] = du * du * (1.001 * fp + 0.001 * fm + kRaa0 / range);
    q0[j] = dl * dl * (1.001 * fm + 0.001 * fp + kRaa0 / range);
    p1[j] = du * du * std::max(dg[j], 0.0);
    q1[j] = dl * dl * std::max(-dg[j], 0.0);
  }

  // Constraint budget for the separable approximation.
  double r = budget - gval;
  for (int j = 0; j < n_; ++j) r += p1[j] / (upp[j] - x[j]) + q1[j] / (x[j] - low[j]);

  auto primal = [&](double lam, std::vector<double>& out) {
    for (int j = 0; j < n_; ++j) {
      const double sp = std::sqrt(p0[j] + lam * p1[j]);
      const double sq = std::sqrt(q0[j] + lam * q1[j]);
      const double xj = (low[j] * sp + upp[j] * sq) / (sp + sq);
      out[j] = std::clamp(xj, a[j], b[j]);
    }
  };
  auto constraint = [&](const std::vector<double>& xs) {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += p1[j] / (upp[j] - xs[j]) + q1[j] / (xs[j] - low[j]);
    return v;
  };

  std::vector<double> xnew(n_);
  double lam = 0.0;
  primal(0.0, xnew);
  if (constraint(xnew) > r) {
    double lo = 0.0, hi = 1.0;
    primal(hi, xnew);
    while (constraint(xnew) > r) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e14)
        throw std::runtime_error("MMA: infeasible subproblem (volume bound below fixed material)");
      primal(hi, xnew);
    }
    for (int it = 0; it < 200; ++it) {
      lam = 0.5 * (lo + hi);
      primal(lam, xnew);
      if (constraint(xnew) > r) lo = lam;
      else hi = lam;
      if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    lam = hi;  // feasible side
    primal(lam, xnew);
  }

  // KKT residual of the subproblem: primal stationarity is exact by the
  // analytic map, so only complementarity / feasibility remain.
  const double cv = constraint(xnew);
  const double scale = std::max(1.0, std::abs(r));
  kkt_ = lam > 0.0 ? std::abs(cv - r) / scale : std::max(0.0, (cv - r) / scale);

  xold2 = xold1;
  for (int j = 0; j < n_; ++j) xold1[j] = x[j];

  return xnew;
}

}  // namespace contopt
