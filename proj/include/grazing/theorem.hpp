#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grazing/normal_form.hpp"

namespace grazing {

// Biorthogonal frame for the two real eigenvalues lambda1 > 1 > lambda2 > 0
// of a cycle matrix.  omega_j^T zeta_j = 1 after normalization.
struct EigenFrame {
  double lambda1 = 0, lambda2 = 0;
  Vec3 zeta1, zeta2;    // right eigenvectors
  Vec3 omega1, omega2;  // left eigenvectors
  double ortho_residual = 0;  // worst biorthogonality defect
  std::array<Cplx, 3> all_eigs{};
};

// Throws NumericError naming the failing inequality when the spectrum does
// not have the multiplier structure (one real > 1, its reciprocal, third
// strictly inside).
EigenFrame eigen_frame(const Mat3& M_X, double eq_tol = 1e-10);

struct MatrixC {
  Eigen::Matrix2d C;
  double det = 0;
};
MatrixC matrix_C(const EigenFrame& frame, const Mat3& M_Y);

// Orbit indexed over a finite window [first, first + points.size()), with
// symbols drawn from the bi-infinite itinerary ...XXX Y XXX... aligned so
// index 0 starts the Y block.
struct HomoclinicOrbit {
  long first = 0;
  std::vector<Vec3> points;
  std::vector<char> symbols;
  std::vector<int> sides;
  long stop_index = 0;  // forward index where the contracting-direction
                        // distance to the cycle first fell below target

  const Vec3& at(long i) const { return points.at(static_cast<size_t>(i - first)); }
  char symbol_at(long i) const { return symbols.at(static_cast<size_t>(i - first)); }
  long last() const { return first + static_cast<long>(points.size()) - 1; }
};

// Symbol of ...XXX Y XXX... at any index (Y occupies [0, |y|)).
char itinerary_symbol(const Word& x, const Word& y, long i);

HomoclinicOrbit homoclinic_orbit(const PwlMap& m, const Word& x, const Word& y,
                                 const Cycle& xcycle, const EigenFrame& frame,
                                 const Tolerances& tol = {});

struct Condition {
  bool pass = false;
  std::string detail;
};

struct TheoremReport {
  Condition i, ii, iii, iv_a, iv_b, iv_c, iv_d;
  bool overall = false;

  // Witnesses.
  std::array<Cplx, 3> eigs{};
  double lambda1 = 0, lambda2 = 0, detC = 0;
  Vec3 zeta1;
  double e1_zeta1 = 0;
  Cycle xcycle;
  double cycle_margin = 0;  // smallest relative first-component magnitude
  std::size_t alpha = 0;
  Vec3 y0;
  double e1_y_alpha = 0;
  std::vector<long> sigma_hits;  // orbit indices on the switching plane
  long forward_stop = 0;
  HomoclinicOrbit orbit;
};

// Total function: failures land in the per-condition verdicts, not in
// exceptions.  Throws ValidationError only when the word pair admits no
// pairing index.
TheoremReport verify(const NormalFormParams& params, const Word& x,
                     const Word& y, const Tolerances& tol = {});

struct EnumerationRow {
  std::size_t k = 0;
  Word word;
  std::optional<Cycle> cycle;
  StabilityVerdict stability;
  std::string error;  // nonempty when the cycle system was singular
};

// For k = 0..k_max, the cycle of x^k y and of x^k y(0-flipped), solved and
// classified; singular instances are recorded and enumeration continues.
std::vector<EnumerationRow> enumerate_attractors(const NormalFormParams& params,
                                                 const Word& x, const Word& y,
                                                 std::size_t k_max,
                                                 const Tolerances& tol = {});

// Smallest k whose x^k y cycle is admissible and stable, if any.
std::optional<std::size_t> k_min_estimate(const std::vector<EnumerationRow>& rows);

}  // namespace grazing
