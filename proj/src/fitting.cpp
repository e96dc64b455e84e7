#include "grazing/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "grazing/errors.hpp"

namespace grazing {

Alphas alphas_from_eigs(const EigTargets& t) {
  if (!(t.lambdaL1 > 0)) {
    std::ostringstream os;
    os << "left real multiplier must be positive, got " << t.lambdaL1;
    throw ValidationError(os.str());
  }
  const double p = t.lambdaL23.real(), q = t.lambdaL23.imag();
  if (!(q > 0)) {
    std::ostringstream os;
    os << "left complex pair must have positive imaginary part, got " << q;
    throw ValidationError(os.str());
  }
  const double twopi = 2 * M_PI;
  const Cplx nu1(std::log(t.lambdaL1) / twopi, 0);
  // log of the pair member with the angle taken in (0, pi): any other branch
  // makes e^{2 pi nu} disagree with the target.
  const Cplx nu2(std::log(p * p + q * q) / (2 * twopi),
                 std::atan2(q, p) / twopi);
  const Cplx nu3 = std::conj(nu2);
  const Cplx a1 = -nu1 * nu2 * nu3;
  const Cplx a2 = nu1 * nu2 + nu1 * nu3 + nu2 * nu3;
  const Cplx a3 = -(nu1 + nu2 + nu3);
  Alphas out;
  out.alpha1 = a1.real();
  out.alpha2 = a2.real();
  out.alpha3 = a3.real();
  out.imag_residue = std::max(
      {std::abs(a1.imag()), std::abs(a2.imag()), std::abs(a3.imag())});
  return out;
}

Betas betas_from_eigs(const EigTargets& t, const Alphas& al,
                      const Tolerances& tol) {
  OdeParams tmp;
  tmp.alpha1 = al.alpha1;
  tmp.alpha2 = al.alpha2;
  tmp.alpha3 = al.alpha3;
  const Mat3 E = matrix_exponential(system_matrix(tmp), 2 * M_PI);
  const double a12 = E(0, 1), a13 = E(0, 2), a22 = E(1, 1), a23 = E(1, 2),
               a32 = E(2, 1), a33 = E(2, 2);
  Betas out;
  out.denominator =
      a12 * a12 * a23 - a13 * a13 * a32 + a12 * a13 * (a33 - a22);
  const double scale = std::abs(a12 * a12 * a23) + std::abs(a13 * a13 * a32) +
                       std::abs(a12 * a13) * (std::abs(a33) + std::abs(a22));
  if (std::abs(out.denominator) < tol.fit_genericity * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << "genericity failure: fit denominator " << out.denominator
       << " below " << tol.fit_genericity << " * scale";
    throw ValidationError(os.str());
  }
  const double s = t.lambdaR1 + t.lambdaR2;
  const double pr = t.lambdaR1 * t.lambdaR2;
  out.beta1 = -1 + (a12 * a23 * (s - a22 - a33) +
                    a13 * (pr - a22 * s + a23 * a32 + a22 * a22)) /
                       out.denominator;
  out.beta2 = -(a12 * (pr - a33 * s + a23 * a32 + a33 * a33) +
                a13 * a32 * (s - a22 - a33)) /
              out.denominator;
  return out;
}

EigTargets targets_from_normal_form(const NormalFormParams& p,
                                    const Tolerances& tol) {
  const PwlMap m = build_map(p);
  const std::array<Cplx, 3> left = eigenvalues_of(m.A_L, tol);
  double scale = 0;
  for (const Cplx& l : left) scale = std::max(scale, std::abs(l));
  const double im_tol = tol.eq_tol * (1 + scale);

  EigTargets t;
  bool have_pair = false, have_real = false;
  for (const Cplx& l : left) {
    if (std::abs(l.imag()) > im_tol) {
      if (l.imag() > 0) t.lambdaL23 = l;
      have_pair = true;
    } else if (!have_real) {
      t.lambdaL1 = l.real();
      have_real = true;
    }
  }
  if (!have_pair) {
    throw ValidationError(
        "not fittable: left spectrum is entirely real; the construction "
        "needs one real multiplier and a complex pair");
  }
  if (!(t.lambdaL1 > 0)) {
    std::ostringstream os;
    os << "not fittable: left real multiplier " << t.lambdaL1
       << " is not positive";
    throw ValidationError(os.str());
  }
  if (std::abs(p.delta_R) > tol.eq_tol) {
    std::ostringstream os;
    os << "not fittable: right determinant " << p.delta_R
       << " must vanish (the right matrix has a structurally zero "
          "multiplier)";
    throw ValidationError(os.str());
  }
  const double disc = p.tau_R * p.tau_R - 4 * p.sigma_R;
  if (disc < 0) {
    std::ostringstream os;
    os << "not fittable: right multipliers are complex (discriminant "
       << disc << ")";
    throw ValidationError(os.str());
  }
  t.lambdaR1 = (p.tau_R + std::sqrt(disc)) / 2;
  t.lambdaR2 = (p.tau_R - std::sqrt(disc)) / 2;
  return t;
}

FitReport fit_pipeline(const NormalFormParams& p, const Tolerances& tol) {
  FitReport rep;
  rep.targets = targets_from_normal_form(p, tol);
  rep.alphas = alphas_from_eigs(rep.targets);
  rep.betas = betas_from_eigs(rep.targets, rep.alphas, tol);
  rep.params.alpha1 = rep.alphas.alpha1;
  rep.params.alpha2 = rep.alphas.alpha2;
  rep.params.alpha3 = rep.alphas.alpha3;
  rep.params.beta1 = rep.betas.beta1;
  rep.params.beta2 = rep.betas.beta2;
  rep.params.gamma = grazing_data(rep.params).gamma_graz;

  const LeadingOrderNF nf = leading_order_normal_form(rep.params);
  rep.achieved_L = eigenvalues_of(nf.A_L, tol);
  rep.achieved_R = eigenvalues_of(nf.A_R, tol);

  auto closest = [](const std::array<Cplx, 3>& got, const Cplx& want) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cplx& g : got) best = std::min(best, std::abs(g - want));
    return best;
  };
  rep.residual_L = std::max(
      {closest(rep.achieved_L, Cplx(rep.targets.lambdaL1, 0)),
       closest(rep.achieved_L, rep.targets.lambdaL23),
       closest(rep.achieved_L, std::conj(rep.targets.lambdaL23))});
  rep.residual_R = std::max({closest(rep.achieved_R, Cplx(0, 0)),
                             closest(rep.achieved_R, rep.targets.lambdaR1),
                             closest(rep.achieved_R, rep.targets.lambdaR2)});
  return rep;
}

}  // namespace grazing
