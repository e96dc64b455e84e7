#pragma once

#include <array>
#include <complex>

#include "grazing/config.hpp"
#include "grazing/normal_form.hpp"
#include "grazing/ode_model.hpp"

namespace grazing {

// Eigenvalue targets for the inverse problem: the left return matrix must
// have one positive real multiplier and a complex pair, the right one two
// real multipliers (its third is structurally zero).
struct EigTargets {
  double lambdaL1 = 0;                    // > 0
  std::complex<double> lambdaL23{0, 0};   // p + iq with q > 0
  double lambdaR1 = 0;
  double lambdaR2 = 0;
};

struct Alphas {
  double alpha1 = 0;
  double alpha2 = 0;
  double alpha3 = 0;
  double imag_residue = 0;  // conjugate-symmetry leftover, ~1e-16
};

struct Betas {
  double beta1 = 0;
  double beta2 = 0;
  double denominator = 0;
};

Alphas alphas_from_eigs(const EigTargets& t);

Betas betas_from_eigs(const EigTargets& t, const Alphas& a,
                      const Tolerances& tol = {});

// Reads the targets off the two companion matrices of a piecewise-linear
// parameter set; throws ValidationError when the structure does not fit.
EigTargets targets_from_normal_form(const NormalFormParams& p,
                                    const Tolerances& tol = {});

struct FitReport {
  EigTargets targets;
  OdeParams params;  // gamma preset to the fitted grazing amplitude
  Alphas alphas;
  Betas betas;
  std::array<Cplx, 3> achieved_L{};
  std::array<Cplx, 3> achieved_R{};
  double residual_L = 0;
  double residual_R = 0;
};

FitReport fit_pipeline(const NormalFormParams& p, const Tolerances& tol = {});

}  // namespace grazing
