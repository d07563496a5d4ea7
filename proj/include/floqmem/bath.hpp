#pragma once

#include "floqmem/qcore.hpp"

#include <limits>
#include <vector>

namespace floqmem {

// Drude-Lorentz bath: J(w) = alpha * omega_c * w / (w^2 + omega_c^2).
struct BathSpec {
  double alpha = 0.1;
  double omega_c = 1.0;
  double beta = 1.0;  // +inf for zero temperature
  int pade_terms = 2;

  void validate() const;
};

double spectral_density(const BathSpec& bath, double w);

// 1 / (exp(beta w) - 1), defined for w > 0; zero at beta = +inf.
double bose_occupation(double beta, double w);

// Transition rate gamma(w) = J(w) / (1 - exp(-beta w)) for either sign of w.
// The w -> 0 limit alpha / (beta omega_c) is used for |w| below 1e-12.
double rate(const BathSpec& bath, double w);

struct ExponentialTerm {
  cplx eta;
  cplx gamma;
};

struct ExponentialSeries {
  std::vector<ExponentialTerm> terms;

  cplx value(double t) const;
  std::size_t size() const { return terms.size(); }
};

struct BosePade {
  std::vector<double> poles;     // xi_j, ascending
  std::vector<double> residues;  // kappa_j
};

// [N-1/N] Pade approximant 1/(1 - e^{-x}) = 1/x + 1/2 + sum_j 2 kappa_j x / (x^2 + xi_j^2).
BosePade bose_pade(int n_terms);

// C(t) = eta_0 e^{-omega_c t} + sum_j eta_j e^{-nu_j t} for t >= 0.
// Requires finite beta.
ExponentialSeries pade_series(const BathSpec& bath, int n_terms);

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;
  bool converged = true;
  // At t = 0 the real part diverges logarithmically with the cutoff and only
  // the truncated integral over (-cutoff, cutoff) is returned.
  bool truncated = false;
};

// Direct numerical evaluation of C(t) = (1/pi) int e^{-i w t} J(w) / (1 - e^{-beta w}) dw.
QuadratureResult correlation_quadrature(const BathSpec& bath, double t, double tol = 1e-10,
                                        double cutoff = 50.0);

}  // namespace floqmem
