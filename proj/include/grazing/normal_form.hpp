#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "grazing/config.hpp"
#include "grazing/words.hpp"

namespace grazing {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Cplx = std::complex<double>;

struct NormalFormParams {
  double tau_L = 0, sigma_L = 0, delta_L = 0;
  double tau_R = 0, sigma_R = 0, delta_R = 0;
  double mu = 0;
};

// Continuous piecewise-linear map x -> A_J x + b mu, branch J selected by the
// sign of e1^T x.  Columns 2 and 3 of A_L and A_R coincide, so both branches
// agree on the switching plane e1^T x = 0.
struct PwlMap {
  Mat3 A_L, A_R;
  Vec3 b;
  double mu = 0;
};

PwlMap build_map(const NormalFormParams& p);

// -1 left of the switching plane, +1 right of it, 0 within tolerance of it.
int side_of(const Vec3& x, double on_sigma_tol);

// Branch chosen by sign; on the plane both branches agree.
Vec3 apply(const PwlMap& m, const Vec3& x);
// Branch forced by the symbol regardless of sign (admissibility is a separate
// check, so inadmissible cycles remain computable).
Vec3 apply_branch(const PwlMap& m, char symbol, const Vec3& x);

// f_w is affine: f_w(x) = M x + P b mu.
struct WordMatrices {
  Mat3 M, P;
};
WordMatrices word_matrices(const PwlMap& m, const Word& w);

struct Cycle {
  Word word;
  std::vector<Vec3> points;
  std::vector<int> sides;  // per-point side report
  std::vector<std::size_t> on_boundary;
  bool admissible = false;
  std::array<Cplx, 3> eigenvalues{};  // of M_w
  double residual = 0;                // max closure defect over the cycle
  double cond = 0;                    // condition estimate of I - M_w
};

// x0 = (I - M_w)^{-1} P_w b mu, then forced application along the word.
// Throws NumericError carrying det(I - M_w) when the system is singular.
Cycle solve_cycle(const PwlMap& m, const Word& w, const Tolerances& tol = {});

// Coefficients of lambda^3 - t*lambda^2 + s*lambda - d.
struct CharCoeffs {
  double trace, second_trace, determinant;
};
CharCoeffs char_coeffs(const Mat3& Q);

// Closed-form cubic on the characteristic coefficients; companion-matrix QR
// fallback when the relative discriminant is within tol of zero.
std::array<Cplx, 3> eigenvalues_of(const Mat3& Q, const Tolerances& tol = {});

enum class Stability { stable, saddle, unstable, inconclusive };
const char* to_string(Stability s);

struct StabilityVerdict {
  Stability kind = Stability::inconclusive;
  std::array<double, 3> moduli{};
};
// "inconclusive" when a cycle point lies on the switching plane.
StabilityVerdict classify_stability(const Cycle& c);

}  // namespace grazing
