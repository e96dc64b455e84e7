#pragma once

#include <optional>
#include <vector>

#include "grazing/config.hpp"
#include "grazing/normal_form.hpp"
#include "grazing/theorem.hpp"
#include "grazing/words.hpp"

namespace grazing {

// Residuals of the three scalar conditions a parameter set must satisfy for
// the homoclinic construction to close up, with the intermediate vectors.
struct ConstructionResidual {
  Vec3 r;  // (second trace of M_X minus 1, e2^T xi1, e1^T xi2)
  Vec3 y0;
  Vec3 psi1;
  Vec3 psi2;
  Vec3 xi1;
  Vec3 xi2;
  double norm() const { return r.norm(); }
};

struct FamilyResult {
  NormalFormParams params;
  bool in_domain = false;
};

// (sigma_L, sigma_R) region on which the two-parameter closed-form family is
// proved to satisfy the verifier.
bool in_domain(double sigma_L, double sigma_R);

// Closed-form family with delta_R = 0, mu = 1. Throws ValidationError at the
// removable singularities sigma_R in {0, -1}.
FamilyResult closed_family(double sigma_L, double sigma_R);

// y0 = (0, -e1^T P b mu / e1^T M e2, 0) where (M, P) belong to the first
// alpha letters of xy. Throws NumericError when the denominator vanishes.
Vec3 y0_from_alpha(const PwlMap& m, const Word& xy, std::size_t alpha);

ConstructionResidual residuals(const NormalFormParams& params, const Word& x,
                               const Word& y, std::size_t alpha);

struct NewtonReport {
  NormalFormParams params;
  Vec3 residual = Vec3::Zero();
  int iterations = 0;
  double jacobian_cond = 0;
  std::vector<double> history;  // residual norm after each accepted step
};

// Damped Newton on (tau_L, tau_R, delta_L) at fixed (sigma_L, sigma_R),
// delta_R = 0, mu = 1. Throws NumericError on stagnation or a singular
// Jacobian.
NewtonReport newton_solve(const Word& x, const Word& y, std::size_t alpha,
                          double sigma_L, double sigma_R, const Vec3& guess,
                          const Tolerances& tol = {});

struct SolveCandidate {
  NewtonReport newton;
  bool verified = false;  // passes the orbit-structure verifier
  Vec3 guess = Vec3::Zero();
};

// Newton from every point of a cubic offset grid around `center`; candidates
// are deduplicated, verified, and ordered verified-first then by residual.
// A converged root failing verification is kept and marked (spurious root).
std::vector<SolveCandidate> multi_start(const Word& x, const Word& y,
                                        std::size_t alpha, double sigma_L,
                                        double sigma_R, const Vec3& center,
                                        const std::vector<double>& offsets,
                                        const Tolerances& tol = {});

}  // namespace grazing
