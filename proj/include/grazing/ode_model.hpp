#pragma once

#include <vector>

#include "grazing/config.hpp"
#include "grazing/normal_form.hpp"

namespace grazing {

// Periodically forced three-dimensional Filippov system: smooth affine flow
// for X < 0, constant field for X > 0, sliding on the intersection.
struct OdeParams {
  double alpha1 = 0;
  double alpha2 = 0;
  double alpha3 = 0;
  double beta1 = 0;
  double beta2 = 0;
  double gamma = 0;
};

struct GrazingData {
  double gamma_graz = 0;
  double t_graz = 0;  // in [0, 2pi)
  Vec3 X_graz = Vec3::Zero();
  double Z_graz = -1;
};

// Point on the section {Y = 0}; states on the sliding exit line additionally
// have X = 0.
struct PoincareState {
  double X = 0;
  double t = 0;
  double Z = 0;
};

// e^{tA} by scaling-and-squaring with the degree-13 Pade approximant.
Mat3 matrix_exponential(const Mat3& a, double t);

// Companion matrix of the left-half linear part.
Mat3 system_matrix(const OdeParams& p);

// Particular periodic solution of the left-half system.
Vec3 particular_solution(const OdeParams& p, double t);

GrazingData grazing_data(const OdeParams& p);

// Closed-form left-half flow; valid as a trajectory only while X < 0
// (caller's contract).
Vec3 left_flow(const OdeParams& p, const Vec3& x0, double t0, double t);

// (dY/dt, dZ/dt) on the sliding region of the switching plane.
Eigen::Vector2d sliding_rhs(const OdeParams& p, double y, double z, double t,
                            const Tolerances& tol = {});

struct TrajectorySample {
  double t = 0;
  Vec3 x = Vec3::Zero();
  bool sliding = false;
};

// One loop's downward section crossing. Loops that end in sliding carry the
// virtual crossing of the continued left flow (X > 0 while the orbit exists;
// it reaches 0 exactly when the orbit dies in a secondary grazing).
struct LoopPoint {
  double t = 0;
  double X = 0;
  bool sliding_loop = false;
};

struct GammaReturnResult {
  PoincareState state;  // next sliding-exit point (X = 0)
  int loops = 0;
  std::vector<LoopPoint> loop_points;
  double t_hit = 0;  // time of switching-plane contact
  Vec3 x_hit = Vec3::Zero();
  double slide_time = 0;
};

// Return map of the sliding exit line: left flight to the first switching-
// plane contact reached with dX/dt >= 0, then sliding until Y = 0. t_max is
// the flight-time budget for this excursion.
GammaReturnResult gamma_return(const OdeParams& p, const PoincareState& s,
                               double t_max, const Tolerances& tol = {},
                               std::vector<TrajectorySample>* trace = nullptr);

// Leading-order return map near grazing in coordinates
// (X, t - t_graz, Z - Z_graz), parameter gamma - gamma_graz.
struct LeadingOrderNF {
  Mat3 A_L = Mat3::Zero();
  Mat3 A_R = Mat3::Zero();
  Mat3 D1 = Mat3::Zero();  // discontinuity-map matrix, A_R = A_L * D1
  Vec3 b = Vec3::Zero();
  double det_O_L = 0;  // observability determinant
  double rho_b = 0;    // e1^T adj(I - A_L) b
};

LeadingOrderNF leading_order_normal_form(const OdeParams& p);

// Leading-order global return and discontinuity maps, exposed for testing.
Vec3 leading_Pg(const LeadingOrderNF& nf, const Vec3& x, double mu);
Vec3 leading_Pd(const LeadingOrderNF& nf, const Vec3& x);

// The leading-order model as a piecewise-linear map with mu = gamma - gamma_graz.
PwlMap leading_order_map(const LeadingOrderNF& nf, double mu);

}  // namespace grazing
