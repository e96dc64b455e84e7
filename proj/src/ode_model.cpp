#include "grazing/ode_model.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "grazing/errors.hpp"

namespace grazing {

Mat3 matrix_exponential(const Mat3& a, double t) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  static const double theta13 = 5.371920351148152;
  Mat3 A = a * t;
  const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    A /= std::pow(2.0, squarings);
  }
  const Mat3 I = Mat3::Identity();
  const Mat3 A2 = A * A;
  const Mat3 A4 = A2 * A2;
  const Mat3 A6 = A2 * A4;
  const Mat3 U =
      A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
           b[5] * A4 + b[3] * A2 + b[1] * I);
  const Mat3 V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                 b[4] * A4 + b[2] * A2 + b[0] * I;
  Mat3 F = (V - U).fullPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) F = F * F;
  return F;
}

Mat3 system_matrix(const OdeParams& p) {
  Mat3 A;
  A << 0, 1, 0, 0, 0, 1, -p.alpha1, -p.alpha2, -p.alpha3;
  return A;
}

Vec3 particular_solution(const OdeParams& p, double t) {
  const double k1 = p.alpha1 - p.alpha3;
  const double k2 = p.alpha2 - 1;
  const double d = k1 * k1 + k2 * k2;
  const double c = std::cos(t), s = std::sin(t);
  const double r = p.gamma / d;
  return Vec3(r * (k1 * c + k2 * s) - 1, r * (-k1 * s + k2 * c),
              r * (-k1 * c - k2 * s));
}

GrazingData grazing_data(const OdeParams& p) {
  const double k1 = p.alpha1 - p.alpha3;
  const double k2 = p.alpha2 - 1;
  const double d = k1 * k1 + k2 * k2;
  if (d == 0) {
    throw ValidationError(
        "degenerate forcing response: (alpha1-alpha3, alpha2-1) = (0, 0)");
  }
  GrazingData g;
  g.gamma_graz = std::sqrt(d);
  g.t_graz = std::atan2(k2, k1);
  if (g.t_graz < 0) g.t_graz += 2 * M_PI;
  g.X_graz = Vec3(0, 0, -1);
  g.Z_graz = -1;
  return g;
}

namespace {

// Closed-form left-half flow with precomputed modal decomposition; falls back
// to fresh matrix exponentials when the eigenbasis is ill-conditioned.
class Flow {
 public:
  const Mat3& A() const { return A_; }

  explicit Flow(const OdeParams& p) : p_(p), A_(system_matrix(p)) {
    Eigen::EigenSolver<Mat3> es(A_);
    nu_ = es.eigenvalues();
    V_ = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(V_);
    const double cond =
        svd.singularValues()(0) / svd.singularValues()(2);
    modal_ = std::isfinite(cond) && cond < 1e8;
    if (modal_) Vinv_ = V_.inverse();
  }

  Vec3 xp(double t) const { return particular_solution(p_, t); }

  Vec3 at(const Vec3& x0, double t0, double t) const {
    const Vec3 u = x0 - xp(t0);
    if (modal_) {
      Eigen::Vector3cd z = Vinv_ * u.cast<std::complex<double>>();
      for (int i = 0; i < 3; ++i) z(i) *= std::exp(nu_(i) * (t - t0));
      return xp(t) + (V_ * z).real();
    }
    return xp(t) + matrix_exponential(A_, t - t0) * u;
  }

  bool modal() const { return modal_; }
  const Eigen::Vector3cd& nu() const { return nu_; }
  const Eigen::Matrix3cd& V() const { return V_; }
  const Eigen::Matrix3cd& Vinv() const { return Vinv_; }

 private:
  OdeParams p_;
  Mat3 A_;
  bool modal_ = false;
  Eigen::Vector3cd nu_;
  Eigen::Matrix3cd V_, Vinv_;
};

// Grid walker over one left-flight anchored at (x0, t0): cheap sequential
// samples with periodic exact re-synchronization, exact evaluation on demand.
class FlightScan {
 public:
  FlightScan(const Flow& f, const Vec3& x0, double t0, double h)
      : f_(f), x0_(x0), t0_(t0), h_(h) {
    if (f_.modal()) {
      z0_ = f_.Vinv() * (x0 - f_.xp(t0)).cast<std::complex<double>>();
      z_ = z0_;
      for (int i = 0; i < 3; ++i) step_(i) = std::exp(f_.nu()(i) * h);
    } else {
      u_ = x0 - f_.xp(t0);
      E_ = matrix_exponential(f_.A(), h);
    }
  }

  // Advance one cell and return the state at the new grid time.
  Vec3 advance() {
    ++k_;
    if (f_.modal()) {
      if (k_ % 64 == 0) {
        for (int i = 0; i < 3; ++i) {
          z_(i) = z0_(i) * std::exp(f_.nu()(i) * (h_ * k_));
        }
      } else {
        z_ = z_.cwiseProduct(step_);
      }
      return f_.xp(t()) + (f_.V() * z_).real();
    }
    u_ = E_ * u_;
    return f_.xp(t()) + u_;
  }

  double t() const { return t0_ + h_ * k_; }
  Vec3 exact(double at_t) const { return f_.at(x0_, t0_, at_t); }

 private:
  const Flow& f_;
  Vec3 x0_;
  double t0_;
  double h_;
  long k_ = 0;
  Eigen::Vector3cd z0_, z_, step_;
  Vec3 u_ = Vec3::Zero();
  Mat3 E_ = Mat3::Identity();
};

// Safeguarded Newton for a root of component `comp` along the flight, using
// the chain dX/dt = Y, dY/dt = Z; bracket endpoints must straddle the root.
double polish(const Flow& f, const Vec3& x0, double t0, int comp, double ta,
              double tb, double fa, const Tolerances& tol) {
  double t = 0.5 * (ta + tb);
  for (int it = 0; it < 80; ++it) {
    const Vec3 x = f.at(x0, t0, t);
    const double v = x(comp);
    if ((v > 0) == (fa > 0)) {
      ta = t;
      fa = v;
    } else {
      tb = t;
    }
    const double dv = x(comp + 1);
    double tn = dv != 0 ? t - v / dv : 0.5 * (ta + tb);
    if (!(tn > ta && tn < tb)) tn = 0.5 * (ta + tb);
    if (std::abs(tn - t) < tol.event_t_tol) return tn;
    t = tn;
  }
  return t;
}

}  // namespace

Vec3 left_flow(const OdeParams& p, const Vec3& x0, double t0, double t) {
  return Flow(p).at(x0, t0, t);
}

Eigen::Vector2d sliding_rhs(const OdeParams& p, double y, double z, double t,
                            const Tolerances& tol) {
  const double den = y + 1;
  if (den < tol.sliding_denominator_min) {
    std::ostringstream os;
    os << "sliding singularity: denominator Y + 1 = " << den;
    throw NumericError(os.str());
  }
  const double dy = (p.beta1 * y + z) / den;
  const double dz = (-p.alpha1 + (p.beta2 - p.alpha2) * y - p.alpha3 * z +
                     p.gamma * std::cos(t)) /
                    den;
  return Eigen::Vector2d(dy, dz);
}

GammaReturnResult gamma_return(const OdeParams& p, const PoincareState& s,
                               double t_max, const Tolerances& tol,
                               std::vector<TrajectorySample>* trace) {
  const Flow flow(p);
  const double h = 2 * M_PI / tol.grid_per_period;
  const Vec3 x0(0, 0, s.Z);
  const double t0 = s.t;

  GammaReturnResult out;
  // Left flight to the first switching-plane contact reached with Y >= 0;
  // interior downward Y-crossings are completed loops.
  FlightScan scan(flow, x0, t0, h);
  Vec3 xl = x0;
  double tl = t0;
  bool armed = false;  // strict X < 0 seen; suppresses the tangential start
  bool hit = false;
  double th = 0;
  Vec3 xh = Vec3::Zero();
  if (trace) trace->push_back({t0, x0, false});
  while (scan.t() - t0 < t_max) {
    const Vec3 xr = scan.advance();
    const double tr = scan.t();
    if (trace) trace->push_back({tr, xr, false});
    if (armed && xl(0) < 0 && xr(0) >= 0) {
      th = polish(flow, x0, t0, 0, tl, tr, xl(0), tol);
      xh = scan.exact(th);
      if (xh(1) >= 0) {
        hit = true;
        break;
      }
    } else if (xl(1) > 0 && xr(1) <= 0) {
      const double tc = polish(flow, x0, t0, 1, tl, tr, xl(1), tol);
      const Vec3 xc = scan.exact(tc);
      if (armed && xc(0) > 0) {
        // crest pokes through the plane inside one cell
        th = polish(flow, x0, t0, 0, tl, tc, xl(0), tol);
        xh = scan.exact(th);
        hit = true;
        break;
      }
      out.loop_points.push_back({tc, xc(0), false});
    }
    if (xr(0) < 0) armed = true;
    xl = xr;
    tl = tr;
  }
  if (!hit) {
    std::ostringstream os;
    os << "no switching-plane return within t budget " << t_max
       << " from t = " << t0;
    throw NumericError(os.str());
  }
  out.t_hit = th;
  out.x_hit = xh;

  // Virtual section crossing of the continued left flow: the loop that ends
  // in sliding records the would-be crest height X > 0.
  {
    FlightScan vscan(flow, xh, th, h);
    Vec3 vl = xh;
    double vtl = th;
    bool found = false;
    while (vscan.t() - th < 4 * M_PI) {
      const Vec3 vr = vscan.advance();
      const double vtr = vscan.t();
      if (vl(1) > 0 && vr(1) <= 0) {
        const double tc = polish(flow, xh, th, 1, vtl, vtr, vl(1), tol);
        const Vec3 xc = vscan.exact(tc);
        out.loop_points.push_back({tc, xc(0), true});
        found = true;
        break;
      }
      vl = vr;
      vtl = vtr;
    }
    if (!found) {
      throw NumericError("no virtual section crossing after contact");
    }
  }
  out.loops = static_cast<int>(out.loop_points.size());

  // Sliding until Y returns to 0, classical RK4 with a bisected final step.
  {
    double t = th;
    double y = xh(1), z = xh(2);
    const double hs = tol.sliding_step;
    auto rk4 = [&](double yc, double zc, double tc,
                   double step) -> Eigen::Vector2d {
      const Eigen::Vector2d k1 = sliding_rhs(p, yc, zc, tc, tol);
      const Eigen::Vector2d k2 = sliding_rhs(p, yc + 0.5 * step * k1(0),
                                             zc + 0.5 * step * k1(1),
                                             tc + 0.5 * step, tol);
      const Eigen::Vector2d k3 = sliding_rhs(p, yc + 0.5 * step * k2(0),
                                             zc + 0.5 * step * k2(1),
                                             tc + 0.5 * step, tol);
      const Eigen::Vector2d k4 = sliding_rhs(p, yc + step * k3(0),
                                             zc + step * k3(1), tc + step,
                                             tol);
      return Eigen::Vector2d(yc, zc) +
             (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    };
    const long max_steps =
        static_cast<long>(std::ceil(t_max / hs)) + 2;
    long steps = 0;
    while (y > 0) {
      if (++steps > max_steps) {
        throw NumericError("sliding segment did not exit within t budget");
      }
      const Eigen::Vector2d next = rk4(y, z, t, hs);
      if (next(0) <= 0) {
        double lo = 0, hi = hs;
        Eigen::Vector2d exit = next;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const Eigen::Vector2d probe = rk4(y, z, t, mid);
          if (std::abs(probe(0)) < tol.sliding_exit_tol) {
            exit = probe;
            hi = mid;
            break;
          }
          (probe(0) > 0 ? lo : hi) = mid;
          exit = probe;
        }
        t += hi;
        y = 0;
        z = exit(1);
        if (trace) trace->push_back({t, Vec3(0, 0, z), true});
        break;
      }
      y = next(0);
      z = next(1);
      t += hs;
      if (trace) trace->push_back({t, Vec3(0, y, z), true});
    }
    out.state = PoincareState{0, t, z};
    out.slide_time = t - th;
  }
  return out;
}

LeadingOrderNF leading_order_normal_form(const OdeParams& p) {
  LeadingOrderNF nf;
  const Mat3 A = system_matrix(p);
  nf.A_L = matrix_exponential(A, 2 * M_PI);
  nf.D1 << 0, 0, 0, p.beta1 + 1, 1, 0, p.beta2, 0, 1;
  nf.A_R = nf.A_L * nf.D1;
  const GrazingData g = grazing_data(p);
  nf.b = (1.0 / g.gamma_graz) * (Mat3::Identity() - nf.A_L) * Vec3(1, 0, -1);

  Mat3 obs;  // observation rows in descending power order
  obs.row(2) = Vec3::Unit(0).transpose();
  obs.row(1) = Vec3::Unit(0).transpose() * nf.A_L;
  obs.row(0) = obs.row(1) * nf.A_L;
  nf.det_O_L = obs.determinant();

  const Mat3 m = Mat3::Identity() - nf.A_L;
  Mat3 adj;  // adjugate: transpose of the cofactor matrix
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (i + 1) % 3, r1 = (i + 2) % 3;
      const int c0 = (j + 1) % 3, c1 = (j + 2) % 3;
      adj(j, i) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  }
  nf.rho_b = (adj.row(0) * nf.b)(0);
  return nf;
}

Vec3 leading_Pg(const LeadingOrderNF& nf, const Vec3& x, double mu) {
  return nf.A_L * x + nf.b * mu;
}

Vec3 leading_Pd(const LeadingOrderNF& nf, const Vec3& x) {
  return x(0) > 0 ? Vec3(nf.D1 * x) : x;
}

PwlMap leading_order_map(const LeadingOrderNF& nf, double mu) {
  PwlMap m;
  m.A_L = nf.A_L;
  m.A_R = nf.A_R;
  m.b = nf.b;
  m.mu = mu;
  return m;
}

}  // namespace grazing
