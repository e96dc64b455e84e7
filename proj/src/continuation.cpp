#include "grazing/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "grazing/errors.hpp"
#include "grazing/normal_form.hpp"

namespace grazing {

std::string to_string(BranchStability s) {
  switch (s) {
    case BranchStability::stable: return "stable";
    case BranchStability::saddle: return "saddle";
    case BranchStability::unstable: return "unstable";
    case BranchStability::marginal: return "marginal";
  }
  return "marginal";
}

std::vector<int> gap_pattern(const Word& w) {
  std::vector<int> rpos;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 'R') rpos.push_back(static_cast<int>(i));
  }
  if (rpos.empty()) {
    throw ValidationError("word " + w.str() +
                          " has no sliding segment (no R symbol)");
  }
  const int n = static_cast<int>(w.size());
  std::vector<int> gaps(rpos.size());
  for (std::size_t j = 0; j < rpos.size(); ++j) {
    const int next = rpos[(j + 1) % rpos.size()];
    const int g = (next - rpos[j] + n) % n;
    gaps[j] = g == 0 ? n : g;
  }
  return gaps;
}

bool pattern_matches(const std::vector<int>& observed,
                     const std::vector<int>& expected) {
  if (observed.size() != expected.size()) return false;
  const std::size_t m = expected.size();
  for (std::size_t r = 0; r < m; ++r) {
    bool ok = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (observed[j] != expected[(j + r) % m]) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

std::vector<PoincareState> affine_seed(const OdeParams& p, const Word& word,
                                       double mu, const Tolerances& tol) {
  gap_pattern(word);  // rejects words without an R
  const LeadingOrderNF nf = leading_order_normal_form(p);
  const PwlMap m = leading_order_map(nf, mu);
  const Cycle cyc = solve_cycle(m, word, tol);
  const GrazingData g = grazing_data(p);
  std::vector<PoincareState> seeds;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] != 'R') continue;
    const Vec3 v = nf.D1 * cyc.points[i];
    seeds.push_back(PoincareState{0, g.t_graz + 2 * M_PI * double(i) + v(1),
                                  g.Z_graz + v(2)});
  }
  return seeds;
}

namespace {

struct SegEval {
  PoincareState exit;
  int loops = 0;
  std::vector<LoopPoint> loop_points;
};

std::array<double, 2> moduli_of(const Eigen::Matrix2d& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = tr * tr - 4 * det;
  double a, b;
  if (disc >= 0) {
    const double root = std::sqrt(disc);
    a = std::abs((tr + root) / 2);
    b = std::abs((tr - root) / 2);
  } else {
    a = b = std::sqrt(std::abs(det));
  }
  if (a < b) std::swap(a, b);
  return {a, b};
}

BranchStability classify(const std::array<double, 2>& m,
                         const Tolerances& tol) {
  if (std::abs(m[0] - 1) <= tol.marginal_band ||
      std::abs(m[1] - 1) <= tol.marginal_band) {
    return BranchStability::marginal;
  }
  if (m[0] < 1) return BranchStability::stable;
  if (m[1] < 1) return BranchStability::saddle;
  return BranchStability::unstable;
}

}  // namespace

BranchPoint find_orbit(const OdeParams& p, const Word& word,
                       const std::vector<PoincareState>& seed,
                       const Tolerances& tol) {
  const std::vector<int> expected = gap_pattern(word);
  const int m = static_cast<int>(expected.size());
  const int loops_total = static_cast<int>(word.size());
  if (static_cast<int>(seed.size()) != m) {
    std::ostringstream os;
    os << "word " << word.str() << " has " << m << " sliding segments but "
       << seed.size() << " seed states were given";
    throw ValidationError(os.str());
  }
  const double t_budget =
      2 * M_PI * (tol.t_max_base + tol.t_max_per_loop * loops_total);

  auto eval_seg = [&](const PoincareState& s) -> SegEval {
    GammaReturnResult g = gamma_return(p, s, t_budget, tol);
    return SegEval{g.state, g.loops, std::move(g.loop_points)};
  };

  // Segment i must connect to segment i+1; the last wraps by one period.
  auto residual = [&](const std::vector<PoincareState>& S,
                      const std::vector<SegEval>& ev) {
    Eigen::VectorXd F(2 * m);
    for (int i = 0; i < m; ++i) {
      const int j = (i + 1) % m;
      const double wrap = j == 0 ? 2 * M_PI * loops_total : 0.0;
      F(2 * i) = ev[i].exit.t - S[j].t - wrap;
      F(2 * i + 1) = ev[i].exit.Z - S[j].Z;
    }
    return F;
  };

  auto eval_all = [&](const std::vector<PoincareState>& S,
                      bool* pattern_ok) -> std::vector<SegEval> {
    std::vector<SegEval> ev;
    ev.reserve(m);
    *pattern_ok = true;
    for (int i = 0; i < m; ++i) {
      ev.push_back(eval_seg(S[i]));
      if (ev.back().loops != expected[i]) *pattern_ok = false;
    }
    return ev;
  };

  std::vector<PoincareState> S = seed;
  bool ok = false;
  std::vector<SegEval> base = eval_all(S, &ok);
  if (!ok) {
    std::ostringstream os;
    os << "seed for " << word.str() << " at gamma = " << p.gamma
       << " produces loop counts (";
    for (int i = 0; i < m; ++i) os << (i ? "," : "") << base[i].loops;
    os << "), word wants (";
    for (int i = 0; i < m; ++i) os << (i ? "," : "") << expected[i];
    os << ")";
    throw NumericError(os.str());
  }
  Eigen::VectorXd F = residual(S, base);

  // One-sided finite differences per segment; a probe that changes that
  // segment's loop count stepped over an event boundary, so the opposite
  // side is used. Returns the per-segment flight blocks for the monodromy.
  std::vector<Eigen::Matrix2d> blocks(m);
  auto jacobian = [&](const std::vector<PoincareState>& S0,
                      const std::vector<SegEval>& ev) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
      const int j = (i + 1) % m;
      J(2 * i, 2 * j) -= 1;
      J(2 * i + 1, 2 * j + 1) -= 1;
      for (int c = 0; c < 2; ++c) {
        double d = tol.orbit_fd_step;
        bool got = false;
        for (int attempt = 0; attempt < 2 && !got; ++attempt, d = -d) {
          PoincareState probe = S0[i];
          (c == 0 ? probe.t : probe.Z) += d;
          try {
            const SegEval pe = eval_seg(probe);
            if (pe.loops != ev[i].loops) continue;
            J(2 * i, 2 * i + c) += (pe.exit.t - ev[i].exit.t) / d;
            J(2 * i + 1, 2 * i + c) += (pe.exit.Z - ev[i].exit.Z) / d;
            blocks[i](0, c) = (pe.exit.t - ev[i].exit.t) / d;
            blocks[i](1, c) = (pe.exit.Z - ev[i].exit.Z) / d;
            got = true;
          } catch (const NumericError&) {
          }
        }
        if (!got) {
          throw NumericError(
              "finite-difference probe crossed an event boundary on both "
              "sides");
        }
      }
    }
    return J;
  };

  int iters = 0;
  bool converged = F.norm() < tol.orbit_tol;
  for (int it = 0; it < tol.orbit_max_iter && !converged; ++it) {
    const Eigen::MatrixXd J = jacobian(S, base);
    Eigen::VectorXd step = J.partialPivLu().solve(-F);
    if (!step.allFinite()) {
      throw NumericError("singular multiple-shooting Jacobian");
    }
    const double cap = 0.3;
    if (step.lpNorm<Eigen::Infinity>() > cap) {
      step *= cap / step.lpNorm<Eigen::Infinity>();
    }
    double tfac = 1;
    bool accepted = false;
    for (int h = 0; h <= tol.orbit_max_halvings; ++h, tfac *= 0.5) {
      std::vector<PoincareState> cand = S;
      for (int i = 0; i < m; ++i) {
        cand[i].t += tfac * step(2 * i);
        cand[i].Z += tfac * step(2 * i + 1);
      }
      try {
        bool cok = false;
        const std::vector<SegEval> ce = eval_all(cand, &cok);
        if (!cok) continue;
        const Eigen::VectorXd Fc = residual(cand, ce);
        if (Fc.norm() < F.norm()) {
          S = cand;
          base = ce;
          F = Fc;
          accepted = true;
          break;
        }
      } catch (const NumericError&) {
      }
    }
    iters = it + 1;
    if (!accepted) {
      std::ostringstream os;
      os << "no convergence for " << word.str() << " at gamma = " << p.gamma
         << ": line search stalled at residual " << F.norm();
      throw NumericError(os.str());
    }
    converged = F.norm() < tol.orbit_tol;
  }
  if (!converged) {
    std::ostringstream os;
    os << "no convergence for " << word.str() << " at gamma = " << p.gamma
       << ": residual " << F.norm() << " after " << iters << " iterations";
    throw NumericError(os.str());
  }

  BranchPoint bp;
  bp.gamma = p.gamma;
  bp.orbit = S;
  bp.segment_loops.clear();
  for (const SegEval& e : base) bp.segment_loops.push_back(e.loops);
  bp.loop_points.clear();
  for (const SegEval& e : base) {
    bp.loop_points.insert(bp.loop_points.end(), e.loop_points.begin(),
                          e.loop_points.end());
  }
  bp.loops = loops_total;
  bp.newton_iterations = iters;
  bp.residual = F.norm();
  jacobian(S, base);  // refresh the flight blocks at the solution
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  for (int i = 0; i < m; ++i) M = blocks[i] * M;
  bp.multipliers = moduli_of(M);
  bp.stability = classify(bp.multipliers, tol);
  return bp;
}

Branch continue_branch(const OdeParams& p, const Word& word,
                       const BranchPoint& start, double gamma_target,
                       double step, const Tolerances& tol) {
  Branch out;
  out.label = word.str();
  out.points.push_back(start);
  const double dir = gamma_target >= start.gamma ? 1.0 : -1.0;
  const double step_max = std::abs(step);
  double h = step_max;
  BranchPoint cur = start;
  out.termination = "range-end";
  while ((gamma_target - cur.gamma) * dir > 0) {
    if (h < tol.branch_min_step) {
      out.termination = "min-step";
      break;
    }
    double gnext = cur.gamma + dir * h;
    if ((gamma_target - gnext) * dir < 0) gnext = gamma_target;
    OdeParams pn = p;
    pn.gamma = gnext;
    bool ok = false;
    try {
      BranchPoint bp = find_orbit(pn, word, cur.orbit, tol);
      const double jump = std::abs(bp.orbit.at(0).t - cur.orbit.at(0).t) +
                          std::abs(bp.orbit.at(0).Z - cur.orbit.at(0).Z);
      if (jump <= tol.branch_jump_tol + 10 * std::abs(gnext - cur.gamma)) {
        cur = bp;
        out.points.push_back(cur);
        ok = true;
      }
    } catch (const NumericError&) {
    }
    if (ok) {
      h = std::min(h * tol.branch_growth, step_max);
    } else {
      out.last_attempt = gnext;
      h *= 0.5;
    }
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const BranchPoint& a, const BranchPoint& b) {
              return a.gamma < b.gamma;
            });
  return out;
}

Branch merge_branches(const Branch& a, const Branch& b) {
  Branch out;
  out.label = a.label;
  out.points = a.points;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  std::sort(out.points.begin(), out.points.end(),
            [](const BranchPoint& x, const BranchPoint& y) {
              return x.gamma < y.gamma;
            });
  out.points.erase(
      std::unique(out.points.begin(), out.points.end(),
                  [](const BranchPoint& x, const BranchPoint& y) {
                    return std::abs(x.gamma - y.gamma) < 1e-15;
                  }),
      out.points.end());
  const double atop = a.points.empty() ? -1e300 : a.points.back().gamma;
  const double btop = b.points.empty() ? -1e300 : b.points.back().gamma;
  const Branch& upper = atop >= btop ? a : b;
  out.termination = upper.termination;
  out.last_attempt = upper.last_attempt;
  out.fold = a.fold ? a.fold : b.fold;
  return out;
}

std::optional<Fold> detect_fold(const OdeParams& p, const Word& word_a,
                                const Branch& a, const Word& word_b,
                                const Branch& b, const Tolerances& tol) {
  if (a.points.empty() || b.points.empty()) return std::nullopt;
  if (a.termination != "min-step" || b.termination != "min-step") {
    return std::nullopt;
  }
  const double ga = a.points.back().gamma;
  const double gb = b.points.back().gamma;
  if (std::abs(ga - gb) > tol.fold_gap) return std::nullopt;

  // March both orbits together: existence of the pair at a probe gamma is
  // decided by short continuation walks from the latest surviving states.
  BranchPoint pa = a.points.back();
  BranchPoint pb = b.points.back();
  double lo = std::min(ga, gb);
  double hi = std::max({a.last_attempt, b.last_attempt, ga, gb});
  if (hi <= lo) hi = lo + 64 * tol.fold_bracket;

  auto walk_to = [&](const BranchPoint& from, const Word& w,
                     double target) -> std::optional<BranchPoint> {
    const Branch br = continue_branch(p, w, from, target,
                                      std::max((target - from.gamma) / 4,
                                               4 * tol.branch_min_step),
                                      tol);
    const BranchPoint& last = br.points.back();
    if (std::abs(last.gamma - target) < 1e-12) return last;
    return std::nullopt;
  };

  // Bring both to the common lower edge first.
  if (pa.gamma < lo - 1e-15 || pb.gamma < lo - 1e-15) return std::nullopt;
  int budget = 60;
  while (hi - lo > tol.fold_bracket && budget-- > 0) {
    const double mid = 0.5 * (lo + hi);
    auto na = walk_to(pa, word_a, mid);
    auto nb = na ? walk_to(pb, word_b, mid) : std::nullopt;
    if (na && nb) {
      pa = *na;
      pb = *nb;
      lo = mid;
    } else {
      hi = mid;
    }
  }

  Fold f;
  f.gamma_k = 0.5 * (lo + hi);
  f.bracket = hi - lo;
  f.partner = word_b.str();
  double cert = std::numeric_limits<double>::infinity();
  for (const LoopPoint& lp : pa.loop_points) {
    cert = std::min(cert, std::abs(lp.X));
  }
  for (const LoopPoint& lp : pb.loop_points) {
    cert = std::min(cert, std::abs(lp.X));
  }
  f.certificate = cert;
  return f;
}

BranchPoint analytic_no_contact_point(const OdeParams& p, double gamma) {
  const GrazingData g = grazing_data(p);
  BranchPoint bp;
  bp.gamma = gamma;
  const double ratio = gamma / g.gamma_graz;
  bp.orbit.push_back(PoincareState{ratio - 1, g.t_graz, -ratio});
  bp.loop_points.push_back({g.t_graz, ratio - 1, false});
  bp.loops = 1;
  bp.segment_loops = {1};
  // monodromy of the purely linear left flow over one period
  Tolerances tol;
  const std::array<Cplx, 3> eigs =
      eigenvalues_of(matrix_exponential(system_matrix(p), 2 * M_PI), tol);
  std::array<double, 3> mods{std::abs(eigs[0]), std::abs(eigs[1]),
                             std::abs(eigs[2])};
  std::sort(mods.begin(), mods.end(), std::greater<double>());
  bp.multipliers = {mods[0], mods[1]};
  bp.stability = classify(bp.multipliers, tol);
  return bp;
}

Branch analytic_no_contact_branch(const OdeParams& p, double gamma_lo,
                                  double gamma_hi, int count) {
  Branch out;
  out.label = "L";
  out.termination = "range-end";
  if (count < 2) count = 2;
  for (int i = 0; i < count; ++i) {
    const double g =
        gamma_lo + (gamma_hi - gamma_lo) * i / double(count - 1);
    out.points.push_back(analytic_no_contact_point(p, g));
  }
  return out;
}

void assign_diag_values(Branch& branch) {
  if (branch.points.empty()) return;
  const BranchPoint& top = branch.points.back();
  int idx = 0;
  for (std::size_t i = 1; i < top.loop_points.size(); ++i) {
    if (std::abs(top.loop_points[i].X) <
        std::abs(top.loop_points[idx].X)) {
      idx = static_cast<int>(i);
    }
  }
  branch.diag_index = idx;
  for (BranchPoint& bp : branch.points) {
    const std::size_t i =
        std::min<std::size_t>(idx, bp.loop_points.size() - 1);
    bp.diag_value =
        bp.loops + 500 * (bp.loop_points.empty() ? 0 : bp.loop_points[i].X);
  }
}

}  // namespace grazing
