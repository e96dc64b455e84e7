#include "grazing/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grazing/errors.hpp"

namespace grazing {

namespace {

Mat3 companion(double tau, double sigma, double delta) {
  Mat3 a;
  a << tau, 1, 0, -sigma, 0, 1, delta, 0, 0;
  return a;
}

}  // namespace

PwlMap build_map(const NormalFormParams& p) {
  PwlMap m;
  m.A_L = companion(p.tau_L, p.sigma_L, p.delta_L);
  m.A_R = companion(p.tau_R, p.sigma_R, p.delta_R);
  m.b = Vec3(1, 0, 0);
  m.mu = p.mu;
  return m;
}

int side_of(const Vec3& x, double on_sigma_tol) {
  if (std::abs(x(0)) <= on_sigma_tol * (1.0 + x.norm())) return 0;
  return x(0) < 0 ? -1 : 1;
}

Vec3 apply(const PwlMap& m, const Vec3& x) {
  // The two branches agree on the switching plane, so the tie is harmless.
  const Mat3& a = x(0) > 0 ? m.A_R : m.A_L;
  return a * x + m.b * m.mu;
}

Vec3 apply_branch(const PwlMap& m, char symbol, const Vec3& x) {
  if (symbol != 'L' && symbol != 'R') {
    throw ValidationError("branch symbol must be 'L' or 'R'");
  }
  const Mat3& a = symbol == 'R' ? m.A_R : m.A_L;
  return a * x + m.b * m.mu;
}

WordMatrices word_matrices(const PwlMap& m, const Word& w) {
  WordMatrices out{Mat3::Identity(), Mat3::Zero()};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Mat3& a = w[i] == 'R' ? m.A_R : m.A_L;
    out.M = a * out.M;
    out.P = a * out.P + Mat3::Identity();
  }
  return out;
}

Cycle solve_cycle(const PwlMap& m, const Word& w, const Tolerances& tol) {
  if (w.empty()) throw ValidationError("cannot solve a cycle of the empty word");
  const WordMatrices wm = word_matrices(m, w);
  const Mat3 W = Mat3::Identity() - wm.M;

  Eigen::JacobiSVD<Mat3> svd(W);
  const double smin = svd.singularValues()(2);
  const double cond =
      smin > 0 ? svd.singularValues()(0) / smin
               : std::numeric_limits<double>::infinity();
  if (!(cond < tol.cond_limit)) {
    throw NumericError("cycle not unique/existent for word " + w.str() +
                       ": det(I - M) = " + std::to_string(W.determinant()) +
                       ", condition " + std::to_string(cond));
  }

  Cycle c;
  c.word = w;
  c.cond = cond;
  c.points.resize(w.size());
  c.points[0] = W.partialPivLu().solve(wm.P * m.b * m.mu);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    c.points[i + 1] = apply_branch(m, w[i], c.points[i]);
  }

  double maxnorm = 0;
  for (const Vec3& x : c.points) maxnorm = std::max(maxnorm, x.norm());
  double resid = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 next = apply_branch(m, w[i], c.points[i]);
    resid = std::max(resid,
                     (next - c.points[(i + 1) % w.size()]).norm());
  }
  c.residual = resid;

  c.sides.resize(w.size());
  c.admissible = true;
  for (std::size_t i = 0; i < w.size(); ++i) {
    c.sides[i] = side_of(c.points[i], tol.on_sigma);
    if (c.sides[i] == 0) {
      c.on_boundary.push_back(i);
    } else if ((w[i] == 'L') != (c.sides[i] < 0)) {
      c.admissible = false;
    }
  }
  c.eigenvalues = eigenvalues_of(wm.M, tol);
  return c;
}

CharCoeffs char_coeffs(const Mat3& q) {
  CharCoeffs c;
  c.trace = q(0, 0) + q(1, 1) + q(2, 2);
  c.second_trace = q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0) +
                   q(0, 0) * q(2, 2) - q(0, 2) * q(2, 0) +
                   q(1, 1) * q(2, 2) - q(1, 2) * q(2, 1);
  c.determinant = q.determinant();
  return c;
}

std::array<Cplx, 3> eigenvalues_of(const Mat3& q, const Tolerances& tol) {
  const CharCoeffs cc = char_coeffs(q);
  const double t = cc.trace, s = cc.second_trace, d = cc.determinant;

  // lambda = y + t/3 gives y^3 + p y + q0 = 0.
  const double p = s - t * t / 3.0;
  const double q0 = -2.0 * t * t * t / 27.0 + t * s / 3.0 - d;
  const double disc = -4.0 * p * p * p - 27.0 * q0 * q0;
  const double scale =
      std::max({1.0, std::abs(t), std::sqrt(std::abs(s)),
                std::cbrt(std::abs(d))});
  const double scale6 = std::pow(scale, 6);

  std::array<Cplx, 3> lam;
  if (std::abs(disc) < tol.cubic_discriminant * scale6) {
    // Near-multiple roots: companion QR avoids spurious imaginary parts of
    // the closed form.
    Mat3 comp;
    comp << t, -s, d, 1, 0, 0, 0, 1, 0;
    Eigen::EigenSolver<Mat3> es(comp);
    for (int i = 0; i < 3; ++i) lam[i] = es.eigenvalues()(i);
  } else if (disc > 0) {
    // Three distinct real roots; disc > 0 forces p < 0.
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg =
        std::clamp(3.0 * q0 / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double theta = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      lam[k] = r * std::cos((theta - 2.0 * M_PI * k) / 3.0) + t / 3.0;
    }
  } else {
    // One real root and a conjugate pair.
    const double rad = std::sqrt(q0 * q0 / 4.0 + p * p * p / 27.0);
    const double u = std::cbrt(-q0 / 2.0 + rad);
    const double v = std::cbrt(-q0 / 2.0 - rad);
    lam[0] = u + v + t / 3.0;
    const double re = -(u + v) / 2.0 + t / 3.0;
    const double im = std::sqrt(3.0) / 2.0 * (u - v);
    lam[1] = Cplx(re, im);
    lam[2] = Cplx(re, -im);
  }
  std::sort(lam.begin(), lam.end(), [](const Cplx& a, const Cplx& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  return lam;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
    case Stability::inconclusive: return "inconclusive";
  }
  return "?";
}

StabilityVerdict classify_stability(const Cycle& c) {
  StabilityVerdict v;
  for (int i = 0; i < 3; ++i) v.moduli[i] = std::abs(c.eigenvalues[i]);
  if (!c.on_boundary.empty()) {
    v.kind = Stability::inconclusive;
    return v;
  }
  const double lo = *std::min_element(v.moduli.begin(), v.moduli.end());
  const double hi = *std::max_element(v.moduli.begin(), v.moduli.end());
  if (hi < 1.0) {
    v.kind = Stability::stable;
  } else if (lo < 1.0) {
    v.kind = Stability::saddle;
  } else {
    v.kind = Stability::unstable;
  }
  return v;
}

}  // namespace grazing
