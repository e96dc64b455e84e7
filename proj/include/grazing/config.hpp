#pragma once

#include <cstddef>

namespace grazing {

inline constexpr const char* kToolName = "grazing";
inline constexpr const char* kToolVersion = "1.0.0";

// Every numeric default used by the library lives here.  CLI flags override
// individual members (see --set in the tool help); tests that pin published
// values construct their own instances so the defaults stay honest.
struct Tolerances {
  // A point is on the switching plane when |e1^T x| <= on_sigma * (1 + |x|).
  double on_sigma = 1e-9;
  // Cycle closure residual, relative to 1 + max point norm.
  double cycle_residual = 1e-10;
  // Condition number of I - M_X above this means the cycle is not unique.
  double cond_limit = 1e12;
  // Closed-form cubic eigenvalues fall back to companion QR below this
  // relative discriminant.
  double cubic_discriminant = 1e-10;

  // Theorem verification: equality tolerance for exact-arithmetic claims and
  // the forward-window stop threshold measured along the contracting
  // eigendirection.
  double eq_tol = 1e-10;
  double forward_target = 1e-9;
  int backward_periods = 10;
  std::size_t forward_cap_periods = 200;

  // Damped Newton over (tau_L, tau_R, delta_L).
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double newton_fd_step = 1e-7;  // central, scaled by 1 + |p|
  int newton_max_halvings = 40;

  // Hybrid flow events.
  int grid_per_period = 2048;    // uniform samples of one forcing period
  double event_t_tol = 1e-13;    // root polish tolerance in t
  double sliding_step = 1e-3;    // RK4 step for the sliding field
  double sliding_exit_tol = 1e-12;
  double sliding_denominator_min = 1e-12;
  // Escape bound for one return: 2*pi*(t_max_base + t_max_per_loop*loops).
  double t_max_base = 10.0;
  double t_max_per_loop = 4.0;

  // Orbit location on the exit line and branch continuation.
  double orbit_tol = 1e-10;
  int orbit_max_iter = 30;
  double orbit_fd_step = 1e-9;   // one-sided, side chosen away from events
  int orbit_max_halvings = 20;
  double branch_min_step = 1e-8;
  double branch_jump_tol = 5e-3;  // reject steps that move the orbit farther
  double branch_growth = 1.7;     // accepted-step growth factor
  double fold_bracket = 1e-6;
  double fold_gap = 1e-3;        // branch ends farther apart mean no fold
  double marginal_band = 1e-6;   // |multiplier| within this of 1 is marginal

  // Fit genericity: |denominator| below this times the matrix scale fails.
  double fit_genericity = 1e-12;
};

}  // namespace grazing
