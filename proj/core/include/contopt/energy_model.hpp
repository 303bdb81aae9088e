#ifndef CONTOPT_ENERGY_MODEL_HPP
#define CONTOPT_ENERGY_MODEL_HPP

#include <memory>
#include <vector>

#include "contopt/types.hpp"

namespace contopt {

// One term of the total potential. Terms are evaluated on the full nodal
// displacement vector; Dirichlet reduction happens in the solver. Hessian
// blocks are projected to SPD before assembly when `project` is set; the
// unprojected variant backs the finite-difference checks.
class EnergyTerm {
 public:
  virtual ~EnergyTerm() = default;
  virtual const char* name() const = 0;
  virtual double value(const Vec& u) const = 0;
  virtual void add_gradient(const Vec& u, Vec& grad) const = 0;
  virtual void add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const = 0;
  // Largest step in (0,1] along du keeping this term's domain intact.
  virtual double step_bound(const Vec& u, const Vec& du) const {
    (void)u;
    (void)du;
    return 1.0;
  }
};

struct EnergyModel {
  std::vector<std::shared_ptr<EnergyTerm>> terms;
  Vec f_ext;  // may be size 0 for no external loads

  double value(const Vec& u) const;
  double objective(const Vec& u) const;  // value(u) - u . f_ext
  Vec gradient(const Vec& u) const;      // d(objective)/du
  void hessian(const Vec& u, std::vector<Triplet>& out, bool project) const;
  double step_bound(const Vec& u, const Vec& du) const;
};

}  // namespace contopt

#endif
