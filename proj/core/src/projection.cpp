#include "contopt/projection.hpp"

#include <cmath>
#include <stdexcept>

namespace contopt {

static void check_domain(double rho, double beta) {
  if (!(beta > 0.0)) throw std::domain_error("heaviside: beta must be positive");
  if (rho < 0.0 || rho > 1.0) throw std::domain_error("heaviside: rho outside [0,1]");
}

double heaviside(double rho, double beta) {
  check_domain(rho, beta);
  const double t = std::tanh(0.5 * beta);
  return (t + std::tanh(beta * (rho - 0.5))) / (2.0 * t);
}

double heaviside_deriv(double rho, double beta) {
  check_domain(rho, beta);
  const double t = std::tanh(0.5 * beta);
  const double s = std::tanh(beta * (rho - 0.5));
  return beta * (1.0 - s * s) / (2.0 * t);
}

double simp_modulus(double rho, const ProjectionParams& p) {
  const double H = heaviside(rho, p.beta);
  return p.E0 * H * H * H;
}

double simp_modulus_deriv(double rho, const ProjectionParams& p) {
  const double H = heaviside(rho, p.beta);
  return 3.0 * p.E0 * H * H * heaviside_deriv(rho, p.beta);
}

}  // namespace contopt
