#ifndef CONTOPT_PROJECTION_HPP
#define CONTOPT_PROJECTION_HPP

namespace contopt {

struct ProjectionParams {
  double beta = 2.0;  // Heaviside sharpness
  double p = 3.0;     // stiffness exponent, fixed cubic
  double E0 = 1.0;    // base Young's modulus (Pa)
  double nu = 0.3;    // Poisson ratio
};

// Relaxed Heaviside projection
//   H(rho; beta) = (tanh(beta/2) + tanh(beta (rho - 1/2))) / (2 tanh(beta/2)),
// mapping [0,1] onto [0,1] with H(0)=0, H(1/2)=1/2, H(1)=1. Throws
// std::domain_error for rho outside [0,1] or beta <= 0.
double heaviside(double rho, double beta);
double heaviside_deriv(double rho, double beta);

// Cell stiffness E_c = E0 * H(rho; beta)^3 and its density derivative
// 3 E0 H^2 dH/drho.
double simp_modulus(double rho, const ProjectionParams& p);
double simp_modulus_deriv(double rho, const ProjectionParams& p);

}  // namespace contopt

#endif
