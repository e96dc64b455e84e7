// Command-line front end. Subcommands map onto the library modules; all file
// formats are JSON (parameters, reports) and CSV (tables). Exit codes follow
// the error taxonomy in errors.hpp: 0 ok, 1 numeric, 2 validation, 3 I/O.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grazing/config.hpp"
#include "grazing/continuation.hpp"
#include "grazing/errors.hpp"
#include "grazing/fitting.hpp"
#include "grazing/io.hpp"
#include "grazing/normal_form.hpp"
#include "grazing/ode_model.hpp"
#include "grazing/param_search.hpp"
#include "grazing/theorem.hpp"
#include "grazing/words.hpp"

namespace {

using namespace grazing;

constexpr double kPi = 3.14159265358979323846;

// All numeric knobs live in Tolerances; --set name=value reaches every one.
const std::map<std::string, double Tolerances::*>& double_knobs() {
  static const std::map<std::string, double Tolerances::*> m = {
      {"on_sigma", &Tolerances::on_sigma},
      {"cycle_residual", &Tolerances::cycle_residual},
      {"cond_limit", &Tolerances::cond_limit},
      {"cubic_discriminant", &Tolerances::cubic_discriminant},
      {"eq_tol", &Tolerances::eq_tol},
      {"forward_target", &Tolerances::forward_target},
      {"newton_tol", &Tolerances::newton_tol},
      {"newton_fd_step", &Tolerances::newton_fd_step},
      {"event_t_tol", &Tolerances::event_t_tol},
      {"sliding_step", &Tolerances::sliding_step},
      {"sliding_exit_tol", &Tolerances::sliding_exit_tol},
      {"sliding_denominator_min", &Tolerances::sliding_denominator_min},
      {"t_max_base", &Tolerances::t_max_base},
      {"t_max_per_loop", &Tolerances::t_max_per_loop},
      {"orbit_tol", &Tolerances::orbit_tol},
      {"orbit_fd_step", &Tolerances::orbit_fd_step},
      {"branch_min_step", &Tolerances::branch_min_step},
      {"branch_jump_tol", &Tolerances::branch_jump_tol},
      {"branch_growth", &Tolerances::branch_growth},
      {"fold_bracket", &Tolerances::fold_bracket},
      {"fold_gap", &Tolerances::fold_gap},
      {"marginal_band", &Tolerances::marginal_band},
      {"fit_genericity", &Tolerances::fit_genericity},
  };
  return m;
}

const std::map<std::string, int Tolerances::*>& int_knobs() {
  static const std::map<std::string, int Tolerances::*> m = {
      {"backward_periods", &Tolerances::backward_periods},
      {"newton_max_iter", &Tolerances::newton_max_iter},
      {"newton_max_halvings", &Tolerances::newton_max_halvings},
      {"grid_per_period", &Tolerances::grid_per_period},
      {"orbit_max_iter", &Tolerances::orbit_max_iter},
      {"orbit_max_halvings", &Tolerances::orbit_max_halvings},
  };
  return m;
}

void apply_overrides(Tolerances& tol, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--set expects name=value, got '" + s + "'");
    }
    const std::string key = s.substr(0, eq);
    const std::string val = s.substr(eq + 1);
    double parsed = 0;
    try {
      std::size_t used = 0;
      parsed = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ValidationError("--set " + key + ": bad number '" + val + "'");
    }
    if (auto it = double_knobs().find(key); it != double_knobs().end()) {
      if (parsed <= 0 && key != "branch_jump_tol") {
        throw ValidationError("--set " + key + ": must be positive");
      }
      tol.*(it->second) = parsed;
    } else if (auto jt = int_knobs().find(key); jt != int_knobs().end()) {
      tol.*(jt->second) = static_cast<int>(parsed);
    } else if (key == "forward_cap_periods") {
      tol.forward_cap_periods = static_cast<std::size_t>(parsed);
    } else {
      throw ValidationError("--set: unknown tolerance '" + key + "'");
    }
  }
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad number '" + item + "' in '" + csv + "'");
    }
  }
  return out;
}

Vec3 parse_vec3(const std::string& csv, const char* what) {
  const std::vector<double> v = parse_doubles(csv);
  if (v.size() != 3) {
    throw ValidationError(std::string(what) + " needs three comma-separated "
                          "numbers, got '" + csv + "'");
  }
  return Vec3(v[0], v[1], v[2]);
}

Word parse_word(const std::string& s, const char* flag) {
  auto w = Word::parse(s);
  if (!w || w->empty()) {
    throw ValidationError(std::string(flag) + ": words are nonempty strings "
                          "over {L, R}, got '" + s + "'");
  }
  return *w;
}

// stdout unless a path was given; files gain the generator field.
void emit(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    save_json(out, j);
  }
}

Json enumeration_json(const std::vector<EnumerationRow>& rows) {
  Json arr = Json::array();
  for (const EnumerationRow& r : rows) {
    Json row;
    row["k"] = r.k;
    row["word"] = r.word.str();
    if (r.cycle) {
      row["admissible"] = r.cycle->admissible;
      row["residual"] = r.cycle->residual;
      double mx = 0;
      for (const auto& ev : r.cycle->eigenvalues) mx = std::max(mx, std::abs(ev));
      row["max_eig_modulus"] = mx;
    }
    row["stability"] = to_string(r.stability.kind);
    if (!r.error.empty()) row["error"] = r.error;
    arr.push_back(std::move(row));
  }
  return arr;
}

// Seeds at a small offset where the leading-order prediction is reliable,
// then walks outward in both directions. Falls back through a short ladder
// of seed offsets when the first choice does not converge.
Branch walk_contact_branch(const OdeParams& p, const GrazingData& gd,
                           const Word& w, double lo_off, double hi_off,
                           double step, const Tolerances& tol) {
  std::vector<double> ladder = {std::min(lo_off, 1e-4), 1e-5, 3e-4, 1e-3};
  ladder.erase(std::remove_if(ladder.begin(), ladder.end(),
                              [&](double v) { return v > hi_off; }),
               ladder.end());
  std::optional<BranchPoint> start;
  double seed_mu = 0;
  std::string first_error;
  for (double mu : ladder) {
    OdeParams ps = p;
    ps.gamma = gd.gamma_graz + mu;
    try {
      start = find_orbit(ps, w, affine_seed(p, w, mu, tol), tol);
      seed_mu = mu;
      break;
    } catch (const NumericError& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!start) throw NumericError(first_error);
  Branch out =
      continue_branch(p, w, *start, gd.gamma_graz + hi_off, step, tol);
  if (seed_mu - lo_off > tol.branch_min_step) {
    const Branch down =
        continue_branch(p, w, *start, gd.gamma_graz + lo_off, step, tol);
    out = merge_branches(out, down);
  }
  assign_diag_values(out);
  return out;
}

struct DiagramResult {
  GrazingData gd;
  std::vector<Branch> branches;
};

// Standard branch set: no-contact L, the sliding cycle R, the X = RLR cycle
// with its flipped partner RLL, and the X^k Y / X^k Y^{0-bar} pairs. Folds
// are detected within each partner pair.
DiagramResult build_diagram(const OdeParams& p, double lo_off, double hi_off,
                            double step, int k_max, const Tolerances& tol,
                            std::ostream& log) {
  DiagramResult res;
  res.gd = grazing_data(p);
  const Word X("RLR"), Y("LR");

  res.branches.push_back(analytic_no_contact_branch(
      p, res.gd.gamma_graz - hi_off, res.gd.gamma_graz - lo_off,
      std::min(501, static_cast<int>((hi_off - lo_off) / step) + 1)));
  assign_diag_values(res.branches.back());

  std::vector<std::pair<Word, Word>> pairs;
  pairs.emplace_back(X, flip(X, 2));  // RLR folds with RLL
  for (int k = 1; k <= k_max; ++k) {
    const Word body = power(X, static_cast<std::size_t>(k));
    pairs.emplace_back(concat(body, Y), concat(body, flip(Y, 0)));
  }

  auto walk = [&](const Word& w) -> std::optional<Branch> {
    log << "  branch " << w.str() << ": " << std::flush;
    try {
      Branch b = walk_contact_branch(p, res.gd, w, lo_off, hi_off, step, tol);
      log << b.points.size() << " points, " << b.termination << "\n";
      return b;
    } catch (const Error& e) {
      log << "failed (" << e.what() << ")\n";
      return std::nullopt;
    }
  };

  if (auto r = walk(Word("R"))) res.branches.push_back(std::move(*r));

  for (const auto& [wa, wb] : pairs) {
    auto a = walk(wa);
    auto b = walk(wb);
    if (a && b) {
      if (auto fold = detect_fold(p, wa, *a, wb, *b, tol)) {
        a->fold = *fold;
        b->fold = *fold;
        b->fold->partner = wa.str();
        log << "  fold " << wa.str() << "/" << wb.str() << " at offset "
            << format_double(fold->gamma_k - res.gd.gamma_graz) << "\n";
      }
    }
    if (a) res.branches.push_back(std::move(*a));
    if (b) res.branches.push_back(std::move(*b));
  }
  return res;
}

void write_diagram(const DiagramResult& res, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  for (const Branch& b : res.branches) {
    write_branch_csv(dir + "/branch_" + b.label + ".csv", res.gd, {b});
  }
  write_branch_csv(dir + "/diagram.csv", res.gd, res.branches);
  Json folds = Json::object();
  for (const Branch& b : res.branches) {
    if (!b.fold) continue;
    Json f;
    f["gamma"] = b.fold->gamma_k;
    f["offset"] = b.fold->gamma_k - res.gd.gamma_graz;
    f["partner"] = b.fold->partner;
    f["bracket"] = b.fold->bracket;
    f["certificate"] = b.fold->certificate;
    folds[b.label] = std::move(f);
  }
  save_json(dir + "/folds.json", folds);
}

template <typename F>
auto run_stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError("stage " + name + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("stage " + name + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError("stage " + name + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grazing-sliding attractor toolkit: piecewise-linear return "
               "maps, orbit-structure verification, parameter synthesis, and "
               "bifurcation diagrams of the matching hybrid oscillator."};
  app.require_subcommand(1);
  std::function<int()> run;

  // Shared flag storage; each subcommand binds the subset it uses.
  std::vector<std::string> sets;
  std::string out, report_path, cycles_path, ode_path, params_path;
  std::string out_dir = ".", traj_out = "trajectory.csv";
  std::string branch_out = "branch.csv", window_s = "1e-5,0.05";
  std::string word_x_s = "RLR", word_y_s = "LR", word_s, guess_s, offsets_s;
  double sigma_l = 0, sigma_r = 0, gamma_min = 1e-5, gamma_max = 0.05;
  double step = 1e-4, t0 = 0, z0 = 0, gamma_offset = 0;
  int k_max = 8, k_pairs = 4, alpha_flag = -1, returns = 1;
  bool dry_run = false, have_t0 = false, have_z0 = false;

  auto add_set = [&](CLI::App* cmd) {
    cmd->add_option("--set", sets,
                    "Override a named tolerance, e.g. --set eq_tol=1e-6")
        ->type_name("NAME=VALUE");
  };

  {
    CLI::App* c = app.add_subcommand(
        "family", "Closed-form parameter family on the (sigma_L, sigma_R) "
                  "domain; reports domain membership");
    c->add_option("--sigma-l", sigma_l, "Left contraction parameter")
        ->required();
    c->add_option("--sigma-r", sigma_r, "Right expansion parameter")
        ->required();
    c->add_option("--out", out, "Write the parameter JSON here (default stdout)");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        const FamilyResult fr = closed_family(sigma_l, sigma_r);
        emit(to_json(fr.params), out);
        std::cerr << "in domain: " << (fr.in_domain ? "yes" : "no") << "\n";
        return fr.in_domain ? 0 : 2;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "solve", "Newton synthesis of (tau_L, tau_R, delta_L) for a word pair "
                 "at fixed (sigma_L, sigma_R)");
    c->add_option("--word-x", word_x_s, "Cycle word X")->required();
    c->add_option("--word-y", word_y_s, "Cycle word Y")->required();
    c->add_option("--sigma-l", sigma_l, "Fixed sigma_L")->required();
    c->add_option("--sigma-r", sigma_r, "Fixed sigma_R")->required();
    c->add_option("--guess", guess_s, "Start point tau_L,tau_R,delta_L")
        ->required();
    c->add_option("--alpha", alpha_flag,
                  "Pairing index (default: smallest valid)");
    c->add_option("--offsets", offsets_s,
                  "Comma list of per-coordinate offsets; Newton runs from "
                  "every point of the cubic guess+offsets grid (default 0)");
    c->add_option("--out", out, "Write the solved parameter JSON here");
    c->add_option("--report", report_path, "Write all candidates here");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        Tolerances tol;
        apply_overrides(tol, sets);
        const Word x = parse_word(word_x_s, "--word-x");
        const Word y = parse_word(word_y_s, "--word-y");
        std::size_t alpha;
        if (alpha_flag >= 0) {
          alpha = static_cast<std::size_t>(alpha_flag);
        } else {
          const PairingAlpha pa = pairing_alpha(x, y);
          if (!pa.alpha) {
            throw ValidationError("words " + x.str() + ", " + y.str() +
                                  " have no pairing index");
          }
          alpha = *pa.alpha;
        }
        const Vec3 center = parse_vec3(guess_s, "--guess");
        std::vector<double> offsets = {0.0};
        if (!offsets_s.empty()) offsets = parse_doubles(offsets_s);
        const std::vector<SolveCandidate> cands =
            multi_start(x, y, alpha, sigma_l, sigma_r, center, offsets, tol);
        if (!report_path.empty()) {
          Json arr = Json::array();
          for (const SolveCandidate& c2 : cands) arr.push_back(to_json(c2));
          save_json(report_path, arr);
        }
        if (cands.empty()) {
          throw NumericError("no Newton start converged");
        }
        const SolveCandidate& best = cands.front();
        emit(to_json(best.newton.params), out);
        std::cerr << cands.size() << " root(s); best residual "
                  << format_double(best.newton.residual.norm())
                  << (best.verified ? "" : " (not verified)") << "\n";
        return best.verified ? 0 : 1;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "verify", "Check the sufficient conditions for infinitely many "
                  "attractors and enumerate the cycle cascade");
    c->add_option("params", params_path, "Parameter JSON")->required();
    c->add_option("--word-x", word_x_s, "Cycle word X (default RLR)");
    c->add_option("--word-y", word_y_s, "Cycle word Y (default LR)");
    c->add_option("--k-max", k_max, "Enumerate X^k Y up to this k (default 8)");
    c->add_option("--out", out, "Write the report JSON here (default stdout)");
    c->add_option("--cycles", cycles_path, "Write the cycle table CSV here");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        Tolerances tol;
        apply_overrides(tol, sets);
        const NormalFormParams p = params_from_json(load_json(params_path));
        const Word x = parse_word(word_x_s, "--word-x");
        const Word y = parse_word(word_y_s, "--word-y");
        const TheoremReport rep = verify(p, x, y, tol);
        const std::vector<EnumerationRow> rows = enumerate_attractors(
            p, x, y, static_cast<std::size_t>(k_max), tol);
        Json j = to_json(rep, tol);
        j["enumeration"] = enumeration_json(rows);
        if (auto kmin = k_min_estimate(rows)) j["k_min"] = *kmin;
        emit(j, out);
        if (!cycles_path.empty()) write_cycle_csv(cycles_path, rows);
        std::cerr << "overall: " << (rep.overall ? "pass" : "fail") << "\n";
        return rep.overall ? 0 : 1;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "phase", "Simulate the hybrid oscillator from a sliding-exit state "
                 "and dump the trajectory");
    c->add_option("--ode", ode_path, "Oscillator parameter JSON")->required();
    auto* ot = c->add_option("--t", t0, "Start phase (default: grazing phase)");
    auto* oz = c->add_option("--z", z0, "Start Z (default: grazing Z)");
    c->add_option("--gamma-offset", gamma_offset,
                  "Run at the grazing amplitude plus this offset "
                  "(default: the file's gamma)");
    c->add_option("--returns", returns, "Section returns to simulate");
    c->add_option("--out", traj_out,
                  "Trajectory CSV path (default trajectory.csv)");
    add_set(c);
    c->callback([&] {
      have_t0 = ot->count() > 0;
      have_z0 = oz->count() > 0;
      run = [&]() -> int {
        Tolerances tol;
        apply_overrides(tol, sets);
        OdeParams p = ode_from_json(load_json(ode_path));
        const GrazingData gd = grazing_data(p);
        if (gamma_offset != 0) p.gamma = gd.gamma_graz + gamma_offset;
        PoincareState s{0, have_t0 ? t0 : gd.t_graz,
                        have_z0 ? z0 : gd.Z_graz};
        const double budget =
            2 * kPi * (tol.t_max_base + 16 * tol.t_max_per_loop);
        std::vector<TrajectorySample> trace;
        for (int i = 0; i < returns; ++i) {
          const GammaReturnResult r = gamma_return(p, s, budget, tol, &trace);
          s = r.state;
        }
        write_trajectory_csv(traj_out, trace);
        std::cerr << trace.size() << " samples -> " << traj_out << "\n";
        return 0;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "fit-ode", "Fit oscillator coefficients whose return-map linearization "
                   "realizes a parameter set");
    c->add_option("params", params_path, "Parameter JSON")->required();
    c->add_option("--out", out, "Oscillator JSON path (default stdout)");
    c->add_option("--report", report_path, "Fit report JSON path");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        Tolerances tol;
        apply_overrides(tol, sets);
        const NormalFormParams p = params_from_json(load_json(params_path));
        const FitReport fr = fit_pipeline(p, tol);
        emit(to_json(fr.params), out);
        if (!report_path.empty()) save_json(report_path, to_json(fr));
        std::cerr << "residuals: left "
                  << format_double(fr.residual_L) << ", right "
                  << format_double(fr.residual_R) << "\n";
        return 0;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "graze", "Grazing amplitude, phase, and the leading-order return-map "
                 "data of an oscillator");
    c->add_option("--ode", ode_path, "Oscillator parameter JSON")->required();
    c->add_option("--out", out, "Output JSON path (default stdout)");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        const OdeParams p = ode_from_json(load_json(ode_path));
        Json j = to_json(grazing_data(p));
        j["leading_order"] = to_json(leading_order_normal_form(p));
        emit(j, out);
        return 0;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "continue", "Continue one periodic-orbit branch in the forcing "
                    "amplitude; gamma bounds are offsets from grazing");
    c->add_option("--ode", ode_path, "Oscillator parameter JSON")->required();
    c->add_option("--word", word_s,
                  "Orbit word (L for the no-contact branch)")->required();
    c->add_option("--gamma-min", gamma_min, "Lower offset (default 1e-5)");
    c->add_option("--gamma-max", gamma_max, "Upper offset (default 0.05)");
    c->add_option("--step", step, "Largest continuation step (default 1e-4)");
    c->add_option("--out", branch_out, "Branch CSV path (default branch.csv)");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        Tolerances tol;
        apply_overrides(tol, sets);
        const OdeParams p = ode_from_json(load_json(ode_path));
        const GrazingData gd = grazing_data(p);
        const Word w = parse_word(word_s, "--word");
        if (gamma_min >= gamma_max) {
          throw ValidationError("--gamma-min must lie below --gamma-max");
        }
        Branch b;
        if (w.str() == "L") {
          if (gamma_max > 0) {
            throw ValidationError(
                "the no-contact branch lives below the grazing amplitude; "
                "use negative offsets");
          }
          b = analytic_no_contact_branch(
              p, gd.gamma_graz + gamma_min, gd.gamma_graz + gamma_max,
              std::min(501,
                       static_cast<int>((gamma_max - gamma_min) / step) + 1));
          assign_diag_values(b);
        } else {
          if (gamma_min <= 0) {
            throw ValidationError(
                "contact branches live above the grazing amplitude; "
                "--gamma-min must be positive");
          }
          b = walk_contact_branch(p, gd, w, gamma_min, gamma_max, step, tol);
        }
        write_branch_csv(branch_out, gd, {b});
        std::cerr << b.points.size() << " points, " << b.termination
                  << " -> " << branch_out << "\n";
        return 0;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "diagram", "Standard bifurcation-diagram branch set with fold "
                   "detection; one CSV per branch plus a merged file");
    c->add_option("--ode", ode_path, "Oscillator parameter JSON")->required();
    c->add_option("--out-dir", out_dir, "Output directory (default .)");
    c->add_option("--k-max", k_pairs, "Deepest X^k Y pair (default 4)");
    c->add_option("--gamma-min", gamma_min, "Lower offset (default 1e-5)");
    c->add_option("--gamma-max", gamma_max, "Upper offset (default 0.05)");
    c->add_option("--step", step, "Largest continuation step (default 1e-4)");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        Tolerances tol;
        apply_overrides(tol, sets);
        const OdeParams p = ode_from_json(load_json(ode_path));
        const DiagramResult res = build_diagram(
            p, gamma_min, gamma_max, step, k_pairs, tol, std::cerr);
        write_diagram(res, out_dir);
        std::cerr << res.branches.size() << " branches -> " << out_dir << "\n";
        return 0;
      };
    });
  }

  {
    CLI::App* c = app.add_subcommand(
        "pipeline", "family -> verify -> fit-ode -> graze -> diagram, writing "
                    "the full artifact set");
    c->add_option("--sigma-l", sigma_l, "Left contraction parameter")
        ->required();
    c->add_option("--sigma-r", sigma_r, "Right expansion parameter")
        ->required();
    c->add_option("--gamma-offsets", window_s,
                  "Diagram window min,max as offsets from grazing "
                  "(default 1e-5,0.05)");
    c->add_option("--k-max", k_pairs, "Deepest X^k Y pair (default 4)");
    c->add_option("--step", step, "Largest continuation step (default 1e-4)");
    c->add_option("--out-dir", out_dir, "Output directory (default .)");
    c->add_flag("--dry-run", dry_run, "Print the stage plan and exit");
    add_set(c);
    c->callback([&] {
      run = [&]() -> int {
        if (dry_run) {
          std::cout << "family   -> params.json\n"
                       "verify   -> verify.json, cycles.csv\n"
                       "fit-ode  -> ode.json, fit.json\n"
                       "graze    -> grazing.json\n"
                       "diagram  -> branch_<word>.csv, diagram.csv, "
                       "folds.json\n";
          return 0;
        }
        Tolerances tol;
        apply_overrides(tol, sets);
        const std::vector<double> window = parse_doubles(window_s);
        if (window.size() != 2 || window[0] >= window[1]) {
          throw ValidationError("--gamma-offsets expects min,max");
        }
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) {
          throw IoError("cannot create directory " + out_dir + ": " +
                        ec.message());
        }
        const Word x("RLR"), y("LR");

        const FamilyResult fr = run_stage("family", [&] {
          FamilyResult f = closed_family(sigma_l, sigma_r);
          if (!f.in_domain) {
            throw ValidationError("(" + format_double(sigma_l) + ", " +
                                  format_double(sigma_r) +
                                  ") is outside the proved domain");
          }
          save_json(out_dir + "/params.json", to_json(f.params));
          return f;
        });
        std::cerr << "stage family: ok\n";

        run_stage("verify", [&] {
          const TheoremReport rep = verify(fr.params, x, y, tol);
          const auto rows = enumerate_attractors(fr.params, x, y, 8, tol);
          Json j = to_json(rep, tol);
          j["enumeration"] = enumeration_json(rows);
          if (auto kmin = k_min_estimate(rows)) j["k_min"] = *kmin;
          save_json(out_dir + "/verify.json", j);
          write_cycle_csv(out_dir + "/cycles.csv", rows);
          if (!rep.overall) {
            std::string bad;
            for (const auto& [name, cond] :
                 {std::pair<const char*, const Condition*>{"i", &rep.i},
                  {"ii", &rep.ii},
                  {"iii", &rep.iii},
                  {"iv_a", &rep.iv_a},
                  {"iv_b", &rep.iv_b},
                  {"iv_c", &rep.iv_c},
                  {"iv_d", &rep.iv_d}}) {
              if (!cond->pass) bad += std::string(bad.empty() ? "" : ", ") + name;
            }
            throw NumericError("conditions failed: " + bad);
          }
          return 0;
        });
        std::cerr << "stage verify: ok\n";

        const FitReport fit = run_stage("fit-ode", [&] {
          FitReport f = fit_pipeline(fr.params, tol);
          save_json(out_dir + "/ode.json", to_json(f.params));
          save_json(out_dir + "/fit.json", to_json(f));
          return f;
        });
        std::cerr << "stage fit-ode: ok\n";

        run_stage("graze", [&] {
          Json j = to_json(grazing_data(fit.params));
          j["leading_order"] = to_json(leading_order_normal_form(fit.params));
          save_json(out_dir + "/grazing.json", j);
          return 0;
        });
        std::cerr << "stage graze: ok\n";

        run_stage("diagram", [&] {
          const DiagramResult res =
              build_diagram(fit.params, window[0], window[1], step,
                            k_pairs, tol, std::cerr);
          write_diagram(res, out_dir);
          return 0;
        });
        std::cerr << "stage diagram: ok\n";
        return 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
