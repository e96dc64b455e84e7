#include "grazing/theorem.hpp"

#include <cmath>
#include <sstream>

#include "grazing/errors.hpp"

namespace grazing {

namespace {

bool on_sigma(const Vec3& x, double tol) {
  return std::abs(x(0)) <= tol * (1.0 + x.norm());
}

char side_symbol(const Vec3& x) { return x(0) < 0 ? 'L' : 'R'; }

// Kernel direction of a rank-2 matrix: the largest cross product of two rows.
Vec3 kernel_direction(const Mat3& a) {
  Vec3 best = Vec3::Zero();
  double best_norm = -1;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const Vec3 c = a.row(i).transpose().cross(a.row(j).transpose());
      if (c.norm() > best_norm) {
        best_norm = c.norm();
        best = c;
      }
    }
  }
  return best;
}

void fix_sign(Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace

char itinerary_symbol(const Word& x, const Word& y, long i) {
  const long n = static_cast<long>(x.size());
  const long m = static_cast<long>(y.size());
  if (i >= 0 && i < m) return y[static_cast<std::size_t>(i)];
  if (i >= m) return x[static_cast<std::size_t>((i - m) % n)];
  return x[static_cast<std::size_t>(((i % n) + n) % n)];
}

EigenFrame eigen_frame(const Mat3& M_X, double eq_tol) {
  EigenFrame f;
  Tolerances tol;
  f.all_eigs = eigenvalues_of(M_X, tol);
  const Cplx l1 = f.all_eigs[0], l2 = f.all_eigs[1], l3 = f.all_eigs[2];

  std::ostringstream why;
  if (std::abs(l1.imag()) >= eq_tol) {
    why << "largest eigenvalue is not real: " << l1.real() << " + "
        << l1.imag() << "i";
  } else if (!(l1.real() > 1)) {
    why << "largest eigenvalue " << l1.real() << " is not > 1";
  } else if (std::abs(l2.imag()) >= eq_tol) {
    why << "second eigenvalue is not real: " << l2.real() << " + "
        << l2.imag() << "i";
  } else if (std::abs(l1.real() * l2.real() - 1) >= eq_tol) {
    why << "eigenvalue product " << l1.real() * l2.real() << " is not 1";
  } else if (!(std::abs(l3) < std::abs(l2.real()) - eq_tol)) {
    why << "third eigenvalue modulus " << std::abs(l3)
        << " is not below " << std::abs(l2.real());
  }
  if (!why.str().empty()) throw NumericError("eigenvalue structure: " + why.str());

  f.lambda1 = l1.real();
  f.lambda2 = l2.real();
  f.zeta1 = kernel_direction(M_X - f.lambda1 * Mat3::Identity());
  f.zeta2 = kernel_direction(M_X - f.lambda2 * Mat3::Identity());
  f.zeta1.normalize();
  f.zeta2.normalize();
  fix_sign(f.zeta1);
  fix_sign(f.zeta2);
  Vec3 w1 = kernel_direction(M_X.transpose() - f.lambda1 * Mat3::Identity());
  Vec3 w2 = kernel_direction(M_X.transpose() - f.lambda2 * Mat3::Identity());
  f.omega1 = w1 / w1.dot(f.zeta1);
  f.omega2 = w2 / w2.dot(f.zeta2);

  const double r12 = std::abs(f.omega1.dot(f.zeta2));
  const double r21 = std::abs(f.omega2.dot(f.zeta1));
  const double s1 = f.omega1.norm() * f.zeta2.norm();
  const double s2 = f.omega2.norm() * f.zeta1.norm();
  f.ortho_residual = std::max(r12 / s1, r21 / s2);
  return f;
}

MatrixC matrix_C(const EigenFrame& f, const Mat3& M_Y) {
  Eigen::Matrix<double, 2, 3> w;
  w.row(0) = f.omega1.transpose();
  w.row(1) = f.omega2.transpose();
  Eigen::Matrix<double, 3, 2> z;
  z.col(0) = f.zeta1;
  z.col(1) = f.zeta2;
  MatrixC out;
  out.C = w * M_Y * z;
  out.det = out.C.determinant();
  return out;
}

HomoclinicOrbit homoclinic_orbit(const PwlMap& m, const Word& x, const Word& y,
                                 const Cycle& xcycle, const EigenFrame& frame,
                                 const Tolerances& tol) {
  const long n = static_cast<long>(x.size());
  const long mlen = static_cast<long>(y.size());
  const Vec3& x0 = xcycle.points.at(0);
  const double e1z1 = frame.zeta1(0);
  if (std::abs(e1z1) <= tol.eq_tol) {
    throw NumericError("degenerate eigenvector: e1^T zeta1 = " +
                       std::to_string(e1z1));
  }
  const Vec3 y0 = x0 - (x0(0) / e1z1) * frame.zeta1;

  HomoclinicOrbit orb;
  orb.first = -static_cast<long>(tol.backward_periods) * n;

  // Backward window: each period is anchored on the unstable direction and
  // filled by forced iteration, never iterated backward numerically.
  std::vector<Vec3> pts;
  const Vec3 d = y0 - x0;
  for (int k = tol.backward_periods; k >= 1; --k) {
    Vec3 cur = x0 + std::pow(frame.lambda1, -k) * d;
    pts.push_back(cur);
    for (long j = 0; j + 1 < n; ++j) {
      cur = apply_branch(m, x[static_cast<std::size_t>(j)], cur);
      pts.push_back(cur);
    }
  }

  // Forward window: iterate until the contracting-direction distance to the
  // cycle anchor falls below target at block-aligned indices, then two safety
  // periods; hard cap forward_cap_periods * n.
  pts.push_back(y0);
  Vec3 yi = y0;
  long i = 0;
  const long cap = static_cast<long>(tol.forward_cap_periods) * n;
  long stop = cap;
  while (i < cap) {
    yi = apply_branch(m, itinerary_symbol(x, y, i), yi);
    ++i;
    pts.push_back(yi);
    if (i >= mlen && (i - mlen) % n == 0) {
      if (std::abs(frame.omega2.dot(yi - x0)) < tol.forward_target) {
        stop = i;
        break;
      }
    }
  }
  orb.stop_index = stop;
  for (long k = 0; k < 2 * n; ++k) {
    yi = apply_branch(m, itinerary_symbol(x, y, i), yi);
    ++i;
    pts.push_back(yi);
  }

  orb.points = std::move(pts);
  orb.symbols.resize(orb.points.size());
  orb.sides.resize(orb.points.size());
  for (std::size_t j = 0; j < orb.points.size(); ++j) {
    const long idx = orb.first + static_cast<long>(j);
    orb.symbols[j] = itinerary_symbol(x, y, idx);
    orb.sides[j] = side_of(orb.points[j], tol.on_sigma);
  }
  return orb;
}

TheoremReport verify(const NormalFormParams& params, const Word& x,
                     const Word& y, const Tolerances& tol) {
  const PairingAlpha pa = pairing_alpha(x, y);
  if (!pa.alpha) {
    throw ValidationError("words " + x.str() + ", " + y.str() +
                          " admit no pairing index");
  }
  TheoremReport rep;
  rep.alpha = *pa.alpha;
  const PwlMap m = build_map(params);
  const WordMatrices wx = word_matrices(m, x);
  const WordMatrices wy = word_matrices(m, y);
  rep.eigs = eigenvalues_of(wx.M, tol);

  EigenFrame frame;
  try {
    frame = eigen_frame(wx.M, tol.eq_tol);
    rep.i.pass = true;
    std::ostringstream os;
    os << "multipliers " << frame.lambda1 << ", " << frame.lambda2 << ", "
       << rep.eigs[2].real();
    rep.i.detail = os.str();
  } catch (const NumericError& e) {
    rep.i.detail = e.what();
    rep.overall = false;
    return rep;
  }
  rep.lambda1 = frame.lambda1;
  rep.lambda2 = frame.lambda2;
  rep.zeta1 = frame.zeta1;
  rep.e1_zeta1 = frame.zeta1(0);

  const MatrixC mc = matrix_C(frame, wy.M);
  rep.detC = mc.det;
  {
    const bool e1ok = std::abs(rep.e1_zeta1) > tol.eq_tol;
    const bool detok = frame.lambda2 + tol.eq_tol < mc.det &&
                       mc.det < 1.0 - tol.eq_tol;
    rep.ii.pass = e1ok && detok;
    std::ostringstream os;
    os << "e1^T zeta1 = " << rep.e1_zeta1 << ", det(C) = " << mc.det
       << " vs (" << frame.lambda2 << ", 1)";
    rep.ii.detail = os.str();
  }

  try {
    rep.xcycle = solve_cycle(m, x, tol);
    bool iii = true;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.xcycle.points.size(); ++i) {
      const Vec3& p = rep.xcycle.points[i];
      margin = std::min(margin, std::abs(p(0)) / (1.0 + p.norm()));
      if (on_sigma(p, tol.on_sigma) || side_symbol(p) != x[i]) iii = false;
    }
    rep.cycle_margin = margin;
    rep.iii.pass = iii;
    std::ostringstream os;
    os << (iii ? "cycle admissible, off the switching plane; margin "
               : "cycle touches the plane or leaves its side; margin ")
       << margin;
    rep.iii.detail = os.str();
  } catch (const NumericError& e) {
    rep.iii.detail = e.what();
    rep.overall = false;
    return rep;
  }

  HomoclinicOrbit orb;
  try {
    orb = homoclinic_orbit(m, x, y, rep.xcycle, frame, tol);
  } catch (const NumericError& e) {
    rep.iv_b.detail = e.what();
    rep.overall = false;
    return rep;
  }
  const long n = static_cast<long>(x.size());
  rep.y0 = orb.at(0);
  rep.forward_stop = orb.stop_index;

  // (iv)(a): every window point off the plane sits on the side its symbol
  // names; the tail beyond the window is certified by geometric decay onto
  // the cycle, which (iii) keeps off the plane.
  {
    std::vector<long> bad;
    for (std::size_t j = 0; j < orb.points.size(); ++j) {
      if (orb.sides[j] != 0 &&
          side_symbol(orb.points[j]) != orb.symbols[j]) {
        bad.push_back(orb.first + static_cast<long>(j));
      }
    }
    rep.iv_a.pass = bad.empty();
    std::ostringstream os;
    if (bad.empty()) {
      os << "itinerary matches over [" << orb.first << ", " << orb.last()
         << "]";
    } else {
      os << bad.size() << " mismatched indices, first " << bad.front();
    }
    rep.iv_a.detail = os.str();
  }

  rep.iv_b.pass = on_sigma(rep.y0, tol.on_sigma);
  {
    std::ostringstream os;
    os << "e1^T y_0 = " << rep.y0(0);
    rep.iv_b.detail = os.str();
  }

  const Vec3& ya = orb.at(static_cast<long>(rep.alpha));
  rep.e1_y_alpha = std::abs(ya(0));
  rep.iv_c.pass = on_sigma(ya, tol.on_sigma);
  {
    std::ostringstream os;
    os << "|e1^T y_alpha| = " << rep.e1_y_alpha << " at alpha = " << rep.alpha;
    rep.iv_c.detail = os.str();
  }

  for (long i = 0; i <= orb.last(); ++i) {
    if (on_sigma(orb.at(i), tol.on_sigma)) rep.sigma_hits.push_back(i);
  }
  {
    bool clash = false;
    long where = 0;
    for (long i : rep.sigma_hits) {
      if (i + n <= orb.last() && on_sigma(orb.at(i + n), tol.on_sigma)) {
        clash = true;
        where = i;
        break;
      }
    }
    rep.iv_d.pass = !clash;
    std::ostringstream os;
    if (clash) {
      os << "indices " << where << " and " << where + n
         << " both on the switching plane";
    } else {
      os << rep.sigma_hits.size()
         << " on-plane indices, none a period apart";
    }
    rep.iv_d.detail = os.str();
  }

  rep.orbit = std::move(orb);
  rep.overall = rep.i.pass && rep.ii.pass && rep.iii.pass && rep.iv_a.pass &&
                rep.iv_b.pass && rep.iv_c.pass && rep.iv_d.pass;
  return rep;
}

std::vector<EnumerationRow> enumerate_attractors(const NormalFormParams& params,
                                                 const Word& x, const Word& y,
                                                 std::size_t k_max,
                                                 const Tolerances& tol) {
  const PwlMap m = build_map(params);
  std::vector<EnumerationRow> rows;
  const Word y_flipped = flip(y, 0);
  for (std::size_t k = 0; k <= k_max; ++k) {
    for (const Word& tail : {y, y_flipped}) {
      EnumerationRow row;
      row.k = k;
      row.word = concat(power(x, k), tail);
      try {
        row.cycle = solve_cycle(m, row.word, tol);
        row.stability = classify_stability(*row.cycle);
      } catch (const NumericError& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::optional<std::size_t> k_min_estimate(
    const std::vector<EnumerationRow>& rows) {
  // Smallest k whose whole enumerated tail of unflipped-suffix cycles is
  // admissible and stable; even rows carry the unflipped suffix.
  std::optional<std::size_t> k_min;
  for (std::size_t i = rows.size() / 2 * 2; i >= 2; i -= 2) {
    const EnumerationRow& r = rows[i - 2];
    const bool good = r.cycle && r.cycle->admissible &&
                      r.stability.kind == Stability::stable;
    if (good) {
      k_min = r.k;
    } else {
      break;
    }
  }
  return k_min;
}

}  // namespace grazing
