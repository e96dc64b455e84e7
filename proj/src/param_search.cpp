#include "grazing/param_search.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include <Eigen/Dense>

#include "grazing/errors.hpp"

namespace grazing {

bool in_domain(double sigma_L, double sigma_R) {
  if (!(sigma_R > 1)) return false;
  return sigma_L > (sigma_R - 1) / (sigma_R * (sigma_R * sigma_R + 1));
}

FamilyResult closed_family(double sigma_L, double sigma_R) {
  if (sigma_R == 0 || sigma_R == -1) {
    std::ostringstream os;
    os << "closed family undefined at sigma_R = " << sigma_R;
    throw ValidationError(os.str());
  }
  FamilyResult out;
  NormalFormParams& p = out.params;
  p.sigma_L = sigma_L;
  p.sigma_R = sigma_R;
  p.delta_R = 0;
  p.mu = 1;
  p.tau_R = -(sigma_R + 1);
  p.delta_L = (1 - sigma_L * sigma_R * sigma_R) / (sigma_R * (sigma_R + 1));
  p.tau_L = 1 / (sigma_R * sigma_R + 1) - (sigma_L + sigma_R) / (sigma_R + 1);
  out.in_domain = in_domain(sigma_L, sigma_R);
  return out;
}

Vec3 y0_from_alpha(const PwlMap& m, const Word& xy, std::size_t alpha) {
  const Word head = prefix(xy, alpha);
  const WordMatrices wm = word_matrices(m, head);
  const double denom = wm.M(0, 1);
  const double num = (wm.P * m.b)(0) * m.mu;
  const double y02 = -num / denom;
  if (denom == 0 || !std::isfinite(y02)) {
    std::ostringstream os;
    os << "degenerate pairing index: e1^T M e2 = " << denom << " over "
       << head.str();
    throw NumericError(os.str());
  }
  return Vec3(0, y02, 0);
}

ConstructionResidual residuals(const NormalFormParams& params, const Word& x,
                               const Word& y, std::size_t alpha) {
  const PwlMap m = build_map(params);
  const WordMatrices wx = word_matrices(m, x);
  const WordMatrices wy = word_matrices(m, y);
  ConstructionResidual out;
  out.y0 = y0_from_alpha(m, concat(x, y), alpha);
  out.psi1 = wx.P * m.b * m.mu - (Mat3::Identity() - wx.M) * out.y0;
  out.psi2 = wy.M * out.psi1;
  const Vec3 mp1 = wx.M * out.psi1;
  const Vec3 mp2 = wx.M * out.psi2;
  out.xi1 = mp1 * out.psi1(0) - out.psi1 * mp1(0);
  out.xi2 = mp2 * mp1(0) - out.psi2 * out.psi1(0);
  out.r(0) = char_coeffs(wx.M).second_trace - 1;
  out.r(1) = out.xi1(1);
  out.r(2) = out.xi2(0);
  return out;
}

namespace {

NormalFormParams assemble(double sigma_L, double sigma_R, const Vec3& v) {
  NormalFormParams p;
  p.tau_L = v(0);
  p.sigma_L = sigma_L;
  p.delta_L = v(2);
  p.tau_R = v(1);
  p.sigma_R = sigma_R;
  p.delta_R = 0;
  p.mu = 1;
  return p;
}

}  // namespace

NewtonReport newton_solve(const Word& x, const Word& y, std::size_t alpha,
                          double sigma_L, double sigma_R, const Vec3& guess,
                          const Tolerances& tol) {
  auto eval = [&](const Vec3& v) {
    return residuals(assemble(sigma_L, sigma_R, v), x, y, alpha).r;
  };

  NewtonReport rep;
  Vec3 p = guess;
  Vec3 r = eval(p);
  rep.history.push_back(r.norm());
  for (int it = 0; it < tol.newton_max_iter; ++it) {
    if (r.norm() < tol.newton_tol) {
      rep.params = assemble(sigma_L, sigma_R, p);
      rep.residual = r;
      rep.iterations = it;
      return rep;
    }
    Mat3 J;
    for (int j = 0; j < 3; ++j) {
      const double h = tol.newton_fd_step * (1 + std::abs(p(j)));
      Vec3 hi = p, lo = p;
      hi(j) += h;
      lo(j) -= h;
      J.col(j) = (eval(hi) - eval(lo)) / (2 * h);
    }
    const Eigen::JacobiSVD<Mat3> svd(J, Eigen::ComputeFullU |
                                            Eigen::ComputeFullV);
    rep.jacobian_cond =
        svd.singularValues()(0) / svd.singularValues()(2);
    if (!(rep.jacobian_cond < tol.cond_limit)) {
      std::ostringstream os;
      os << "singular Jacobian, condition " << rep.jacobian_cond;
      throw NumericError(os.str());
    }
    const Vec3 step = svd.solve(-r);
    double t = 1;
    Vec3 p_new;
    Vec3 r_new;
    int halvings = 0;
    for (;; ++halvings) {
      p_new = p + t * step;
      r_new = eval(p_new);
      if (r_new.norm() < r.norm()) break;
      if (halvings >= tol.newton_max_halvings) {
        std::ostringstream os;
        os << "line search stalled at residual " << r.norm();
        throw NumericError(os.str());
      }
      t *= 0.5;
    }
    p = p_new;
    r = r_new;
    rep.history.push_back(r.norm());
    rep.iterations = it + 1;
  }
  if (r.norm() < tol.newton_tol) {
    rep.params = assemble(sigma_L, sigma_R, p);
    rep.residual = r;
    return rep;
  }
  std::ostringstream os;
  os << "no convergence after " << tol.newton_max_iter
     << " iterations, residual " << r.norm();
  throw NumericError(os.str());
}

std::vector<SolveCandidate> multi_start(const Word& x, const Word& y,
                                        std::size_t alpha, double sigma_L,
                                        double sigma_R, const Vec3& center,
                                        const std::vector<double>& offsets,
                                        const Tolerances& tol) {
  std::vector<Vec3> guesses;
  for (double a : offsets) {
    for (double b : offsets) {
      for (double c : offsets) {
        guesses.emplace_back(center(0) + a, center(1) + b, center(2) + c);
      }
    }
  }
  if (guesses.empty()) guesses.push_back(center);

  std::vector<std::future<std::optional<NewtonReport>>> futs;
  futs.reserve(guesses.size());
  for (const Vec3& g : guesses) {
    futs.push_back(std::async(std::launch::async,
                              [&, g]() -> std::optional<NewtonReport> {
                                try {
                                  return newton_solve(x, y, alpha, sigma_L,
                                                      sigma_R, g, tol);
                                } catch (const NumericError&) {
                                  return std::nullopt;
                                }
                              }));
  }

  std::vector<SolveCandidate> out;
  for (std::size_t i = 0; i < futs.size(); ++i) {
    auto rep = futs[i].get();
    if (!rep) continue;
    const Vec3 root(rep->params.tau_L, rep->params.tau_R, rep->params.delta_L);
    bool dup = false;
    for (const SolveCandidate& c : out) {
      const Vec3 other(c.newton.params.tau_L, c.newton.params.tau_R,
                       c.newton.params.delta_L);
      if ((root - other).norm() < 1e-8 * (1 + root.norm())) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    SolveCandidate cand;
    cand.newton = std::move(*rep);
    cand.guess = guesses[i];
    try {
      cand.verified = verify(cand.newton.params, x, y, tol).overall;
    } catch (const Error&) {
      cand.verified = false;
    }
    out.push_back(std::move(cand));
  }
  std::sort(out.begin(), out.end(),
            [](const SolveCandidate& a, const SolveCandidate& b) {
              if (a.verified != b.verified) return a.verified;
              return a.newton.residual.norm() < b.newton.residual.norm();
            });
  return out;
}

}  // namespace grazing
