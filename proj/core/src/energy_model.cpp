#include "contopt/energy_model.hpp"

#include <algorithm>

namespace contopt {

double EnergyModel::value(const Vec& u) const {
  double e = 0.0;
  for (const auto& t : terms) e += t->value(u);
  return e;
}

double EnergyModel::objective(const Vec& u) const {
  double e = value(u);
  if (f_ext.size() > 0) e -= u.dot(f_ext);
  return e;
}

Vec EnergyModel::gradient(const Vec& u) const {
  Vec g = Vec::Zero(u.size());
  for (const auto& t : terms) t->add_gradient(u, g);
  if (f_ext.size() > 0) g -= f_ext;
  return g;
}

void EnergyModel::hessian(const Vec& u, std::vector<Triplet>& out, bool project) const {
  for (const auto& t : terms) t->add_hessian(u, out, project);
}

double EnergyModel::step_bound(const Vec& u, const Vec& du) const {
  double a = 1.0;
  for (const auto& t : terms) a = std::min(a, t->step_bound(u, du));
  return a;
}

}  // namespace contopt
