#ifndef CONTOPT_FILTERS_HPP
#define CONTOPT_FILTERS_HPP

#include <vector>

#include "contopt/density_field.hpp"
#include "contopt/grid.hpp"

namespace contopt {

struct FilterParams {
  double r_min = 1.5;   // cone radius in cell units
  double gamma = 1e-3;  // division guard for the sensitivity filter
};

// Cone-weighted density average over neighborhoods dist(c,i) < r_min with
// weights H_ci = r_min - dist(c,i). Fixed-region cells contribute as
// neighbors but are re-clamped afterwards. Output stays in [0,1].
DensityField density_filter(const DensityField& f, const Grid2D& g, const FilterParams& fp);

// Density-weighted cone filter of a sensitivity field:
//   out_c = sum_i H_ci rho_i dG_i / (max(gamma, rho_c) sum_i H_ci).
std::vector<double> sensitivity_filter(const std::vector<double>& dG, const DensityField& f,
                                       const Grid2D& g, const FilterParams& fp);

// Volume fraction g = sum_c H(rho_c; beta) / N over non-AlwaysVoid cells,
// and its per-cell derivative H'(rho_c; beta) / N (zero on AlwaysVoid).
double volume_fraction(const DensityField& f, double beta);
std::vector<double> volume_fraction_grad(const DensityField& f, double beta);

// Thresholds the projected density at 1/2: cells with H(rho; beta) >= 0.5
// become solid, the rest void. Region masks are preserved.
DensityField binarize(const DensityField& f, double beta);

}  // namespace contopt

#endif
