#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "grazing/config.hpp"
#include "grazing/ode_model.hpp"
#include "grazing/words.hpp"

namespace grazing {

enum class BranchStability { stable, saddle, unstable, marginal };
std::string to_string(BranchStability s);

// Loops per sliding segment: for each R in the word, the cyclic distance to
// the next R. The sum is the word length.
std::vector<int> gap_pattern(const Word& w);

// True when observed equals some cyclic rotation of expected.
bool pattern_matches(const std::vector<int>& observed,
                     const std::vector<int>& expected);

struct BranchPoint {
  double gamma = 0;
  std::vector<PoincareState> orbit;    // one exit-line state per segment
  std::vector<int> segment_loops;      // per-segment loop counts
  std::vector<LoopPoint> loop_points;  // chronological over one period
  int loops = 0;                       // = |word|
  BranchStability stability = BranchStability::marginal;
  std::array<double, 2> multipliers{0, 0};  // moduli, descending
  int newton_iterations = 0;
  double residual = 0;
  double diag_value = 0;  // loops + 500 * X at the branch's diagram index
};

struct Fold {
  double gamma_k = 0;       // absolute gamma
  double bracket = 0;       // final bisection bracket width
  std::string partner;      // colliding branch label
  double certificate = 0;   // min |X| over section crossings at the last
                            // surviving point
};

struct Branch {
  std::string label;
  std::vector<BranchPoint> points;  // ascending gamma
  std::optional<Fold> fold;
  std::string termination;  // "range-end", "min-step", or "start-failed"
  double last_attempt = 0;  // gamma of the first failed step, if any
  int diag_index = 0;
};

// One exit-line seed per sliding segment, predicted by the leading-order
// model's word-cycle through x = (X, t - t_graz, Z - Z_graz). Segment i
// starts at the word's i-th R; its seed time carries the 2 pi per elapsed
// loop.
std::vector<PoincareState> affine_seed(const OdeParams& p, const Word& word,
                                       double mu, const Tolerances& tol = {});

// Damped multiple-shooting Newton: one (t, Z) unknown pair per sliding
// segment, so saddle-orbit error never amplifies across a full period.
// Finite differences are one-sided with the side flipped when a probe
// changes that segment's loop count. Throws NumericError on non-convergence
// or when a segment's loop count is not the word's.
BranchPoint find_orbit(const OdeParams& p, const Word& word,
                       const std::vector<PoincareState>& seed,
                       const Tolerances& tol = {});

// Natural-parameter continuation from `start` toward gamma_target (either
// direction), previous point seeding the next, step halving on failure down
// to branch_min_step.
Branch continue_branch(const OdeParams& p, const Word& word,
                       const BranchPoint& start, double gamma_target,
                       double step, const Tolerances& tol = {});

// Merge two walks of the same branch (typically down and up from one start)
// into one ascending-gamma branch.
Branch merge_branches(const Branch& a, const Branch& b);

// Bisection in gamma on existence of the pair, starting from the two
// branches' terminal points; refines until the bracket is below
// fold_bracket. Returns nullopt when the branches do not end near each
// other.
std::optional<Fold> detect_fold(const OdeParams& p, const Word& word_a,
                                const Branch& a, const Word& word_b,
                                const Branch& b,
                                const Tolerances& tol = {});

// The no-contact orbit below the grazing amplitude, closed-form.
BranchPoint analytic_no_contact_point(const OdeParams& p, double gamma);
Branch analytic_no_contact_branch(const OdeParams& p, double gamma_lo,
                                  double gamma_hi, int count);

// Choose the diagram index (argmin |X| over loop points at the upper-gamma
// end) and fill every point's diag_value.
void assign_diag_values(Branch& branch);

}  // namespace grazing
